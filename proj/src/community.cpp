#include "modisco/community.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "modisco/common.hpp"

namespace modisco {

namespace {

using Rng = std::mt19937_64;

std::vector<double> degrees(const SparseRows& g) {
    std::vector<double> k(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i)
        for (const auto& e : g.rows[i]) k[i] += e.second;
    return k;
}

std::vector<std::size_t> shuffled_nodes(std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates with our own index draw so the order does not depend on the
    // standard library's shuffle implementation.
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

double unit_draw(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Community bookkeeping shared by the Louvain and Leiden move phases.
struct Communities {
    std::vector<std::size_t>& comm;
    std::vector<double> tot;
    std::vector<std::size_t> count;
    std::vector<std::size_t> empty;

    Communities(std::vector<std::size_t>& labels, const std::vector<double>& k)
        : comm(labels), tot(labels.size(), 0.0), count(labels.size(), 0) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            tot[labels[i]] += k[i];
            ++count[labels[i]];
        }
        for (std::size_t c = labels.size(); c-- > 0;)
            if (count[c] == 0) empty.push_back(c);
    }

    void remove(std::size_t v, double kv) {
        tot[comm[v]] -= kv;
        if (--count[comm[v]] == 0) empty.push_back(comm[v]);
    }

    void insert(std::size_t v, std::size_t c, double kv) {
        if (count[c] == 0) empty.erase(std::find(empty.begin(), empty.end(), c));
        comm[v] = c;
        tot[c] += kv;
        ++count[c];
    }
};

// Chooses the best community for v (already removed). Returns the target.
std::size_t best_move(const SparseRows& g, const std::vector<double>& k, double m2, Communities& cs, std::size_t v,
                      std::size_t current, bool allow_new, std::vector<double>& wsum,
                      std::vector<std::size_t>& touched) {
    touched.clear();
    for (const auto& [u, w] : g.rows[v]) {
        if (u == v) continue;
        const std::size_t c = cs.comm[u];
        if (wsum[c] == 0.0) touched.push_back(c);
        wsum[c] += w;
    }
    std::sort(touched.begin(), touched.end());
    const double kv = k[v];
    const double eps = 1e-13 * std::max(kv, 1e-300);
    std::size_t best = current;
    double best_gain = wsum[current] - cs.tot[current] * kv / m2;
    for (std::size_t c : touched) {
        const double gain = wsum[c] - cs.tot[c] * kv / m2;
        if (gain > best_gain + eps) {
            best_gain = gain;
            best = c;
        }
    }
    if (allow_new && cs.count[current] > 0 && 0.0 > best_gain + eps && !cs.empty.empty()) best = cs.empty.back();
    for (std::size_t c : touched) wsum[c] = 0.0;
    wsum[current] = 0.0;
    return best;
}

// Louvain local moving phase; returns true if any node moved.
bool louvain_moves(const SparseRows& g, std::vector<std::size_t>& comm, Rng& rng, bool allow_new) {
    const auto k = degrees(g);
    const double m2 = std::accumulate(k.begin(), k.end(), 0.0);
    if (m2 <= 0.0) return false;
    Communities cs(comm, k);
    std::vector<double> wsum(g.size(), 0.0);
    std::vector<std::size_t> touched;
    const auto order = shuffled_nodes(g.size(), rng);
    bool any = false, improved = true;
    while (improved) {
        improved = false;
        for (std::size_t v : order) {
            const std::size_t c0 = comm[v];
            cs.remove(v, k[v]);
            const std::size_t c = best_move(g, k, m2, cs, v, c0, allow_new, wsum, touched);
            cs.insert(v, c, k[v]);
            if (c != c0) improved = any = true;
        }
    }
    return any;
}

// Leiden fast local moving: a queue revisits only neighbours of moved nodes.
void leiden_fast_moves(const SparseRows& g, std::vector<std::size_t>& comm, Rng& rng) {
    const auto k = degrees(g);
    const double m2 = std::accumulate(k.begin(), k.end(), 0.0);
    if (m2 <= 0.0) return;
    Communities cs(comm, k);
    std::vector<double> wsum(g.size(), 0.0);
    std::vector<std::size_t> touched;
    const auto order = shuffled_nodes(g.size(), rng);
    std::deque<std::size_t> queue(order.begin(), order.end());
    std::vector<char> queued(g.size(), 1);
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        queued[v] = 0;
        const std::size_t c0 = comm[v];
        cs.remove(v, k[v]);
        const std::size_t c = best_move(g, k, m2, cs, v, c0, true, wsum, touched);
        cs.insert(v, c, k[v]);
        if (c == c0) continue;
        for (const auto& [u, w] : g.rows[v]) {
            (void)w;
            if (u != v && comm[u] != c && !queued[u]) {
                queued[u] = 1;
                queue.push_back(u);
            }
        }
    }
}

// Leiden refinement: singletons inside each community merge into
// well-connected sub-communities, chosen at random with weight exp(dQ / theta).
std::vector<std::size_t> leiden_refine(const SparseRows& g, const std::vector<std::size_t>& part, std::size_t n_part,
                                       Rng& rng, double theta) {
    const std::size_t n = g.size();
    const auto k = degrees(g);
    const double m2 = std::accumulate(k.begin(), k.end(), 0.0);
    std::vector<std::size_t> refined(n);
    std::iota(refined.begin(), refined.end(), 0);
    if (m2 <= 0.0) return refined;

    std::vector<double> K_part(n_part, 0.0);
    for (std::size_t v = 0; v < n; ++v) K_part[part[v]] += k[v];
    // ext[v]: weight from v to the rest of its community.
    std::vector<double> ext(n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
        for (const auto& [u, w] : g.rows[v])
            if (u != v && part[u] == part[v]) ext[v] += w;

    std::vector<double> K_ref(k);
    std::vector<double> ext_ref(ext);  // E(T, C - T) per refined community
    std::vector<std::size_t> size_ref(n, 1);
    std::vector<double> wsum(n, 0.0);
    std::vector<std::size_t> touched;

    for (std::size_t v : shuffled_nodes(n, rng)) {
        const std::size_t own = refined[v];
        if (size_ref[own] != 1) continue;
        const double KC = K_part[part[v]];
        if (ext[v] < k[v] * (KC - k[v]) / m2) continue;

        touched.clear();
        for (const auto& [u, w] : g.rows[v]) {
            if (u == v || part[u] != part[v]) continue;
            const std::size_t t = refined[u];
            if (wsum[t] == 0.0) touched.push_back(t);
            wsum[t] += w;
        }
        std::sort(touched.begin(), touched.end());
        std::vector<std::size_t> cand{own};
        std::vector<double> dq{0.0};
        for (std::size_t t : touched) {
            if (t == own) continue;
            if (ext_ref[t] < K_ref[t] * (KC - K_ref[t]) / m2) continue;
            const double gain = 2.0 * (wsum[t] - k[v] * K_ref[t] / m2) / m2;
            if (gain < 0.0) continue;
            cand.push_back(t);
            dq.push_back(gain);
        }
        std::size_t chosen = own;
        if (cand.size() > 1) {
            const double mx = *std::max_element(dq.begin(), dq.end());
            std::vector<double> weight(dq.size());
            double total = 0.0;
            for (std::size_t i = 0; i < dq.size(); ++i) total += weight[i] = std::exp((dq[i] - mx) / theta);
            double x = unit_draw(rng) * total;
            chosen = cand.back();
            for (std::size_t i = 0; i < cand.size(); ++i) {
                if (x < weight[i]) {
                    chosen = cand[i];
                    break;
                }
                x -= weight[i];
            }
        }
        if (chosen != own) {
            ext_ref[chosen] = ext_ref[chosen] + ext[v] - 2.0 * wsum[chosen];
            K_ref[chosen] += k[v];
            ++size_ref[chosen];
            size_ref[own] = 0;
            refined[v] = chosen;
        }
        for (std::size_t t : touched) wsum[t] = 0.0;
    }
    return refined;
}

std::size_t count_labels(const std::vector<std::size_t>& labels) {
    return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

std::vector<std::size_t> checked_init(const std::vector<std::size_t>& init, std::size_t n) {
    if (init.size() != n) throw std::invalid_argument("initial labels do not cover every node");
    return renumber(init);
}

}  // namespace

std::uint64_t run_seed(std::uint64_t base, std::size_t i) {
    return mix64(base ^ mix64(0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(i) + 1)));
}

double modularity(const SparseRows& graph, const std::vector<std::size_t>& labels) {
    if (labels.size() != graph.size()) throw std::invalid_argument("modularity: labels do not cover the graph");
    const std::size_t nc = count_labels(labels);
    std::vector<double> in(nc, 0.0), tot(nc, 0.0);
    double m2 = 0.0;
    for (std::size_t i = 0; i < graph.size(); ++i)
        for (const auto& [j, w] : graph.rows[i]) {
            m2 += w;
            tot[labels[i]] += w;
            if (labels[i] == labels[j]) in[labels[i]] += w;
        }
    if (m2 <= 0.0) return 0.0;
    double q = 0.0;
    for (std::size_t c = 0; c < nc; ++c) q += in[c] / m2 - (tot[c] / m2) * (tot[c] / m2);
    return q;
}

std::vector<std::size_t> renumber(const std::vector<std::size_t>& labels) {
    std::vector<std::size_t> out(labels.size());
    std::vector<std::size_t> map;
    const std::size_t none = std::numeric_limits<std::size_t>::max();
    std::size_t next = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= map.size()) map.resize(labels[i] + 1, none);
        if (map[labels[i]] == none) map[labels[i]] = next++;
        out[i] = map[labels[i]];
    }
    return out;
}

SparseRows aggregate_graph(const SparseRows& graph, const std::vector<std::size_t>& labels, std::size_t n_comm) {
    std::vector<std::vector<SparseRows::Entry>> raw(n_comm);
    for (std::size_t i = 0; i < graph.size(); ++i)
        for (const auto& [j, w] : graph.rows[i]) raw[labels[i]].emplace_back(labels[j], w);
    SparseRows out(n_comm);
    for (std::size_t c = 0; c < n_comm; ++c) {
        auto& r = raw[c];
        std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& e : r) {
            if (!out.rows[c].empty() && out.rows[c].back().first == e.first) out.rows[c].back().second += e.second;
            else out.rows[c].push_back(e);
        }
    }
    return out;
}

std::vector<ClusterLabels> louvain(const SparseRows& graph, std::uint64_t seed, const LouvainOptions& opt) {
    const std::size_t n = graph.size();
    std::vector<ClusterLabels> levels;
    if (n == 0) return levels;
    Rng rng(seed);
    SparseRows g = graph;
    std::vector<std::size_t> membership(n);
    std::iota(membership.begin(), membership.end(), 0);
    std::vector<std::size_t> comm(n);
    if (opt.init) comm = checked_init(*opt.init, n);
    else std::iota(comm.begin(), comm.end(), 0);

    for (bool first = true;; first = false) {
        louvain_moves(g, comm, rng, opt.allow_new_communities);
        comm = renumber(comm);
        const std::size_t nc = count_labels(comm);
        if (nc == g.size() && !first) break;
        ClusterLabels level;
        level.labels.resize(n);
        for (std::size_t v = 0; v < n; ++v) level.labels[v] = comm[membership[v]];
        level.labels = renumber(level.labels);
        level.modularity = modularity(graph, level.labels);
        levels.push_back(std::move(level));
        if (nc == g.size()) break;
        g = aggregate_graph(g, comm, nc);
        for (auto& m : membership) m = comm[m];
        comm.resize(nc);
        std::iota(comm.begin(), comm.end(), 0);
    }
    return levels;
}

SparseRows consensus_affinity(const SparseRows& graph, std::size_t n_runs, std::uint64_t seed) {
    if (n_runs == 0) throw std::invalid_argument("consensus needs at least one run");
    const std::size_t n = graph.size();
    std::vector<std::vector<double>> counts(n);
    for (std::size_t i = 0; i < n; ++i) counts[i].assign(graph.rows[i].size(), 0.0);
    for (std::size_t r = 0; r < n_runs; ++r) {
        const auto levels = louvain(graph, run_seed(seed, r));
        const auto& top = levels.back().labels;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t e = 0; e < graph.rows[i].size(); ++e)
                if (top[i] == top[graph.rows[i][e].first]) counts[i][e] += 1.0;
    }
    SparseRows out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t e = 0; e < graph.rows[i].size(); ++e) {
            const std::size_t j = graph.rows[i][e].first;
            if (j != i && counts[i][e] > 0.0) out.rows[i].emplace_back(j, counts[i][e] / static_cast<double>(n_runs));
        }
    return out;
}

ClusterLabels louvain_consensus_cluster(const SparseRows& graph, std::size_t n_runs, std::size_t patience,
                                        std::uint64_t seed) {
    if (graph.size() == 0) return {};
    const SparseRows cons = consensus_affinity(graph, n_runs, seed);
    const std::uint64_t fresh = mix64(seed ^ 0xC0A5E75EULL);
    std::vector<std::size_t> best;
    double best_q = -std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    for (std::size_t r = 0; stale < std::max<std::size_t>(patience, 1); ++r) {
        const auto levels = louvain(cons, run_seed(fresh, r));
        const double q = modularity(cons, levels.front().labels);
        if (q > best_q + 1e-12) {
            best_q = q;
            best = levels.front().labels;
            stale = 0;
        } else {
            ++stale;
        }
    }
    return {best, modularity(graph, best)};
}

ClusterLabels leiden(const SparseRows& graph, std::uint64_t seed, const LeidenOptions& opt) {
    const std::size_t n = graph.size();
    if (n == 0) return {};
    Rng rng(seed);
    std::vector<std::size_t> part(n);
    if (opt.init) part = checked_init(*opt.init, n);
    else std::iota(part.begin(), part.end(), 0);
    double best_q = modularity(graph, part);

    for (;;) {
        SparseRows g = graph;
        std::vector<std::size_t> membership(n);
        std::iota(membership.begin(), membership.end(), 0);
        std::vector<std::size_t> p = part;
        for (;;) {
            leiden_fast_moves(g, p, rng);
            p = renumber(p);
            const std::size_t nc = count_labels(p);
            if (nc == g.size()) break;
            auto refined = renumber(leiden_refine(g, p, nc, rng, opt.theta));
            std::size_t nr = count_labels(refined);
            if (nr == g.size()) {
                refined = p;
                nr = nc;
            }
            std::vector<std::size_t> parent(nr);
            for (std::size_t v = 0; v < g.size(); ++v) parent[refined[v]] = p[v];
            g = aggregate_graph(g, refined, nr);
            for (auto& m : membership) m = refined[m];
            p = std::move(parent);
        }
        std::vector<std::size_t> labels(n);
        for (std::size_t v = 0; v < n; ++v) labels[v] = p[membership[v]];
        labels = renumber(labels);
        const double q = modularity(graph, labels);
        if (q <= best_q + 1e-12) break;
        best_q = q;
        part = std::move(labels);
    }
    return {part, best_q};
}

ClusterLabels leiden_multi_seed(const SparseRows& graph, std::size_t n_seeds, std::uint64_t seed,
                                const LeidenOptions& opt, std::size_t workers) {
    if (n_seeds == 0) throw std::invalid_argument("leiden_multi_seed needs at least one seed");
    std::vector<ClusterLabels> runs(n_seeds);
    parallel_for(n_seeds, workers, [&](std::size_t s) { runs[s] = leiden(graph, run_seed(seed, s), opt); });
    std::size_t best = 0;
    for (std::size_t s = 1; s < n_seeds; ++s)
        if (runs[s].modularity > runs[best].modularity) best = s;
    return runs[best];
}

ClusterLabels dicluster(const SparseRows& graph, std::size_t patience, std::uint64_t seed) {
    const std::size_t n = graph.size();
    if (n == 0) return {};
    ClusterLabels best;
    best.modularity = -std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    for (std::size_t r = 0; stale < std::max<std::size_t>(patience, 1); ++r) {
        const std::uint64_t s = run_seed(seed, r);
        Rng rng(s);
        std::vector<std::size_t> init(n);
        for (auto& l : init) l = static_cast<std::size_t>(rng() & 1U);
        LouvainOptions opt;
        opt.init = init;
        opt.allow_new_communities = false;
        const auto levels = louvain(graph, s, opt);
        const auto& top = levels.back();
        if (top.modularity > best.modularity + 1e-12) {
            best = top;
            stale = 0;
        } else {
            ++stale;
        }
    }
    return best;
}

}  // namespace modisco
