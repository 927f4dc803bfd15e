#include "modisco/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "modisco/common.hpp"
#include "modisco/community.hpp"
#include "modisco/density.hpp"

namespace modisco {

MergeCriteria MergeCriteria::defaults() {
    MergeCriteria c;
    c.similar = {{1e-4, 0.84}, {1e-5, 0.87}, {1e-6, 0.90}};
    c.dissimilar = {{0.1, 0.75}, {0.01, 0.80}, {0.001, 0.83}, {1e-7, 0.90}};
    return c;
}

bool MergeCriteria::is_similar(const MotifSimilarity& s) const {
    return std::any_of(similar.begin(), similar.end(), [&](const MergeDisjunct& d) { return s.p > d.p && s.c > d.c; });
}

bool MergeCriteria::is_dissimilar(const MotifSimilarity& s) const {
    return std::any_of(dissimilar.begin(), dissimilar.end(),
                       [&](const MergeDisjunct& d) { return s.p < d.p && s.c < d.c; });
}

Matrix within_motif_affmat(const Motif& motif, const std::vector<std::size_t>& relevant_tasks) {
    const std::size_t n = motif.members.size();
    std::vector<Matrix> feats;
    feats.reserve(n);
    for (const auto& m : motif.members) feats.push_back(build_feature_matrix(m.seqlet, relevant_tasks));
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        out(i, i) = cj_at_offset(feats[i], feats[i], 0);
        for (std::size_t j = i + 1; j < n; ++j) {
            const long off = motif.members[j].offset - motif.members[i].offset;
            out(i, j) = out(j, i) = cj_at_offset(feats[i], feats[j], off);
        }
    }
    return out;
}

double pearson_at_offset(const Matrix& a, const Matrix& b, long offset) {
    if (a.cols() != b.cols()) throw std::invalid_argument("pearson_at_offset: column mismatch");
    const long la = static_cast<long>(a.rows()), lb = static_cast<long>(b.rows());
    const long lo = std::max(0L, offset), hi = std::min(la, lb + offset);
    if (hi <= lo) return 0.0;
    const std::size_t c = a.cols();
    const double n = static_cast<double>((hi - lo) * static_cast<long>(c));
    double sa = 0.0, sb = 0.0;
    for (long i = lo; i < hi; ++i)
        for (std::size_t k = 0; k < c; ++k) {
            sa += a(static_cast<std::size_t>(i), k);
            sb += b(static_cast<std::size_t>(i - offset), k);
        }
    const double ma = sa / n, mb = sb / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (long i = lo; i < hi; ++i)
        for (std::size_t k = 0; k < c; ++k) {
            const double x = a(static_cast<std::size_t>(i), k) - ma;
            const double y = b(static_cast<std::size_t>(i - offset), k) - mb;
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

AlignmentResult best_alignment_pearson(const Matrix& a, const Matrix& b, double min_overlap, bool revcomp) {
    const long la = static_cast<long>(a.rows()), lb = static_cast<long>(b.rows());
    const long need = static_cast<long>(required_overlap(a.rows(), b.rows(), min_overlap));
    if (la == 0 || lb == 0 || need > std::min(la, lb))
        throw std::invalid_argument("best_alignment_pearson: no admissible offset");
    AlignmentResult best;
    bool have = false;
    auto scan = [&](const Matrix& other, bool rc) {
        for (long o = -(lb - 1); o <= la - 1; ++o) {
            if (std::min(la, lb + o) - std::max(0L, o) < need) continue;
            const double s = pearson_at_offset(a, other, o);
            const long ao = std::labs(o), bo = std::labs(best.offset);
            if (!have || s > best.similarity ||
                (s == best.similarity && (ao < bo || (ao == bo && !rc && best.revcomp) ||
                                          (ao == bo && rc == best.revcomp && o < best.offset)))) {
                best = {s, o, rc};
                have = true;
            }
        }
    };
    scan(b, false);
    if (revcomp) scan(reverse_complement(b), true);
    return best;
}

double crosscorr_similarity(const Motif& m1, const Motif& m2, const std::vector<std::size_t>& relevant_tasks,
                            double min_overlap, bool revcomp) {
    return best_alignment_pearson(motif_features(m1, relevant_tasks), motif_features(m2, relevant_tasks),
                                  min_overlap, revcomp)
        .similarity;
}

namespace {

std::vector<Motif> split_recursive(const Motif& motif, const std::vector<std::size_t>& relevant,
                                   const SpuriousMergeOptions& opt, std::uint64_t seed) {
    const std::size_t n = motif.members.size();
    if (n <= opt.min_size) return {motif};

    const Matrix aff = within_motif_affmat(motif, relevant);
    // Members with no positive affinity to anyone stay out of the graph.
    std::vector<std::size_t> nodes;
    std::vector<std::size_t> index_of(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        bool any = false;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && aff(i, j) > 0.0) any = true;
        if (any) {
            index_of[i] = nodes.size();
            nodes.push_back(i);
        }
    }
    if (nodes.size() < 2) return {motif};
    SparseRows dist(nodes.size());
    for (std::size_t a = 0; a < nodes.size(); ++a)
        for (std::size_t b = 0; b < nodes.size(); ++b)
            if (a != b) dist.rows[a].emplace_back(b, affinity_to_distance(aff(nodes[a], nodes[b])));
    const auto graph = symmetrize(conditional_probs(dist, opt.perplexity).probs);
    const auto labels = dicluster(graph, opt.patience, seed);
    const std::size_t n_labels = *std::max_element(labels.labels.begin(), labels.labels.end()) + 1;
    if (n_labels < 2) return {motif};

    std::vector<std::size_t> sizes(2, 0);
    for (std::size_t l : labels.labels) ++sizes[l];
    const std::size_t larger = sizes[1] > sizes[0] ? 1 : 0;
    std::vector<MotifMember> part[2];
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t l = index_of[i] < n ? labels.labels[index_of[i]] : larger;
        part[l].push_back(motif.members[i]);
    }
    const Motif a = make_motif(part[0]);
    const Motif b = make_motif(part[1]);
    const double corr = crosscorr_similarity(a, b, relevant, opt.min_overlap, opt.revcomp);
    if (corr >= opt.corr_threshold) return {motif};
    auto out = split_recursive(a, relevant, opt, run_seed(seed, 0));
    auto more = split_recursive(b, relevant, opt, run_seed(seed, 1));
    out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    return out;
}

}  // namespace

std::vector<Motif> detect_spurious_merge(const Motif& motif, const std::vector<std::size_t>& relevant_tasks,
                                         const SpuriousMergeOptions& opt, std::uint64_t seed) {
    return split_recursive(motif, relevant_tasks, opt, seed);
}

BetaResult motif_beta_from_distances(std::span<const double> distances, std::size_t member_count) {
    return beta_for_perplexity(distances, static_cast<double>(std::max<std::size_t>(member_count, 1)));
}

BetaResult motif_beta(const Motif& motif, const std::vector<Matrix>& pooled_features,
                      const std::vector<std::size_t>& relevant_tasks, double min_overlap, bool revcomp) {
    const Matrix f = motif_features(motif, relevant_tasks);
    std::vector<double> d;
    d.reserve(pooled_features.size());
    for (const auto& s : pooled_features)
        d.push_back(affinity_to_distance(best_alignment_cj(f, s, min_overlap, revcomp).similarity));
    return motif_beta_from_distances(d, motif.members.size());
}

double density_sensitive_sim(double beta_i, double beta_j, double d_ij) {
    if (std::isinf(d_ij)) return 0.0;
    return std::exp(-std::max(beta_i, beta_j) * d_ij);
}

std::vector<std::vector<std::size_t>> merge_sweep(const std::vector<std::vector<MotifSimilarity>>& sims,
                                                  const MergeCriteria& criteria) {
    const std::size_t n = sims.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::stable_sort(pairs.begin(), pairs.end(),
                     [&](const auto& x, const auto& y) { return sims[x.first][x.second].c > sims[y.first][y.second].c; });

    std::vector<std::size_t> group(n);
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) {
        group[i] = i;
        members[i] = {i};
    }
    for (const auto& [i, j] : pairs) {
        const std::size_t gi = group[i], gj = group[j];
        if (gi == gj || !criteria.is_similar(sims[i][j])) continue;
        bool blocked = false;
        for (std::size_t a : members[gi]) {
            for (std::size_t b : members[gj])
                if (criteria.is_dissimilar(sims[a][b])) {
                    blocked = true;
                    break;
                }
            if (blocked) break;
        }
        if (blocked) continue;
        const std::size_t keep = std::min(gi, gj), gone = std::max(gi, gj);
        for (std::size_t x : members[gone]) group[x] = keep;
        members[keep].insert(members[keep].end(), members[gone].begin(), members[gone].end());
        members[gone].clear();
    }
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t g = 0; g < n; ++g) {
        if (members[g].empty()) continue;
        std::sort(members[g].begin(), members[g].end());
        out.push_back(members[g]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<MotifSimilarity>> motif_similarities(const std::vector<Motif>& motifs,
                                                             const MotifMergeContext& ctx) {
    const std::size_t n = motifs.size();
    std::vector<Matrix> feats, pooled;
    for (const auto& m : motifs) {
        feats.push_back(motif_features(m, ctx.relevant_tasks));
        for (const auto& mem : m.members) pooled.push_back(build_feature_matrix(mem.seqlet, ctx.relevant_tasks));
    }
    std::vector<double> beta(n);
    for (std::size_t i = 0; i < n; ++i)
        beta[i] = motif_beta(motifs[i], pooled, ctx.relevant_tasks, ctx.min_overlap, ctx.revcomp).beta;
    std::vector<std::vector<MotifSimilarity>> out(n, std::vector<MotifSimilarity>(n));
    for (std::size_t i = 0; i < n; ++i) {
        out[i][i] = {1.0, 1.0};
        for (std::size_t j = i + 1; j < n; ++j) {
            const double c = best_alignment_pearson(feats[i], feats[j], ctx.min_overlap, ctx.revcomp).similarity;
            const double d =
                affinity_to_distance(best_alignment_cj(feats[i], feats[j], ctx.min_overlap, ctx.revcomp).similarity);
            out[i][j] = out[j][i] = {c, density_sensitive_sim(beta[i], beta[j], d)};
        }
    }
    return out;
}

Motif merge_motifs(const std::vector<Motif>& motifs, const std::vector<std::size_t>& group,
                   const MotifMergeContext& ctx) {
    std::vector<std::size_t> order = group;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return motifs[a].members.size() > motifs[b].members.size();
    });
    Motif merged = motifs[order.front()];
    for (std::size_t k = 1; k < order.size(); ++k) {
        const Motif& other = motifs[order[k]];
        const auto aln = best_alignment_cj(motif_features(merged, ctx.relevant_tasks),
                                           motif_features(other, ctx.relevant_tasks), ctx.min_overlap, ctx.revcomp);
        std::vector<MotifMember> members = merged.members;
        for (const auto& m : other.members) {
            MotifMember placed = aln.revcomp ? flip_member(m, other.length) : m;
            placed.offset += aln.offset;
            members.push_back(std::move(placed));
        }
        merged = make_motif(std::move(members));
    }
    if (ctx.dataset && merged.length >= ctx.window)
        merged = center_and_standardize(merged, *ctx.dataset, ctx.relevant_tasks, ctx.window, ctx.flank);
    return merged;
}

std::vector<Motif> iterative_merge_motifs(std::vector<Motif> motifs, const MergeCriteria& criteria,
                                          const MotifMergeContext& ctx) {
    return iterative_merge(
        std::move(motifs), criteria, [&](const std::vector<Motif>& ms) { return motif_similarities(ms, ctx); },
        [&](const std::vector<Motif>& ms, const std::vector<std::size_t>& g) { return merge_motifs(ms, g, ctx); });
}

ReassignResult reassign_small_clusters(const std::vector<Motif>& motifs, std::size_t final_min_size,
                                       double min_similarity, const MotifMergeContext& ctx) {
    ReassignResult res;
    std::vector<const Motif*> small;
    for (const auto& m : motifs) {
        if (m.members.size() >= final_min_size) res.motifs.push_back(m);
        else small.push_back(&m);
    }
    if (small.empty()) return res;
    if (res.motifs.empty()) {
        for (const Motif* m : small) res.dropped += m->members.size();
        res.flagged = true;
        return res;
    }
    std::vector<Matrix> feats;
    for (const auto& m : res.motifs) feats.push_back(motif_features(m, ctx.relevant_tasks));
    std::vector<std::vector<MotifMember>> added(res.motifs.size());
    for (const Motif* m : small) {
        for (const auto& mem : m->members) {
            const Matrix f = build_feature_matrix(mem.seqlet, ctx.relevant_tasks);
            std::size_t best = 0;
            AlignmentResult best_aln;
            best_aln.similarity = -std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < feats.size(); ++r) {
                const auto aln = best_alignment_cj(feats[r], f, ctx.min_overlap, ctx.revcomp);
                if (aln.similarity > best_aln.similarity) {
                    best_aln = aln;
                    best = r;
                }
            }
            if (!(best_aln.similarity > min_similarity)) {
                ++res.dropped;
                continue;
            }
            MotifMember placed{best_aln.revcomp ? reverse_complement(mem.seqlet) : mem.seqlet, best_aln.offset};
            const long len = static_cast<long>(res.motifs[best].length);
            std::optional<MotifMember> fitted = placed;
            if (placed.offset != 0 || static_cast<long>(placed.seqlet.length()) != len)
                fitted = ctx.dataset ? reslice_member(placed, *ctx.dataset, 0, len) : std::nullopt;
            if (!fitted) {
                ++res.dropped;
                continue;
            }
            added[best].push_back(std::move(*fitted));
            ++res.reassigned;
        }
    }
    for (std::size_t r = 0; r < res.motifs.size(); ++r) {
        if (added[r].empty()) continue;
        auto members = res.motifs[r].members;
        members.insert(members.end(), added[r].begin(), added[r].end());
        const bool flagged = res.motifs[r].flagged;
        res.motifs[r] = make_motif(std::move(members));
        res.motifs[r].flagged = flagged;
    }
    return res;
}

std::vector<Motif> final_flank_expand(const std::vector<Motif>& motifs, std::size_t flank, const Dataset& dataset) {
    std::vector<Motif> out;
    const long f = static_cast<long>(flank);
    for (const auto& m : motifs) {
        if (flank == 0) {
            out.push_back(m);
            continue;
        }
        std::vector<MotifMember> kept;
        for (const auto& mem : m.members)
            if (auto r = reslice_member(mem, dataset, -f, static_cast<long>(m.length) + f)) kept.push_back(std::move(*r));
        if (kept.empty()) continue;
        Motif e = make_motif(std::move(kept));
        e.flagged = m.flagged;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace modisco
