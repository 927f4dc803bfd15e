#include "modisco/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace modisco {

namespace {

void add_rows(Matrix& dst, const Matrix& src, long offset) {
    for (std::size_t r = 0; r < src.rows(); ++r) {
        auto d = dst.row(static_cast<std::size_t>(offset) + r);
        auto s = src.row(r);
        for (std::size_t c = 0; c < s.size(); ++c) d[c] += s[c];
    }
}

// Running sums of a motif under construction.
struct Accumulator {
    std::vector<MotifMember> members;
    std::size_t length = 0;
    std::size_t n_tasks = 0;
    Matrix onehot;
    std::vector<Matrix> contrib, hyp;
    std::vector<std::size_t> coverage;

    void grow(std::size_t left, std::size_t right) {
        const std::size_t len = length + left + right;
        auto regrow = [&](Matrix& m) {
            Matrix out(len, kAlphabetSize);
            if (!m.empty()) add_rows(out, m, static_cast<long>(left));
            m = std::move(out);
        };
        regrow(onehot);
        for (auto& m : contrib) regrow(m);
        for (auto& m : hyp) regrow(m);
        std::vector<std::size_t> cov(len, 0);
        for (std::size_t i = 0; i < coverage.size(); ++i) cov[i + left] = coverage[i];
        coverage = std::move(cov);
        for (auto& m : members) m.offset += static_cast<long>(left);
        length = len;
    }

    void add(MotifMember m) {
        const long len = static_cast<long>(m.seqlet.length());
        if (members.empty()) {
            n_tasks = m.seqlet.contrib.size();
            contrib.assign(n_tasks, Matrix());
            hyp.assign(n_tasks, Matrix());
            m.offset = 0;
            grow(0, static_cast<std::size_t>(len));
        } else {
            const std::size_t left = m.offset < 0 ? static_cast<std::size_t>(-m.offset) : 0;
            const long end = m.offset + len;
            const std::size_t right = end > static_cast<long>(length) ? static_cast<std::size_t>(end) - length : 0;
            if (left || right) grow(left, right);
            m.offset += static_cast<long>(left);
        }
        add_rows(onehot, m.seqlet.onehot, m.offset);
        for (std::size_t t = 0; t < n_tasks; ++t) {
            add_rows(contrib[t], m.seqlet.contrib[t], m.offset);
            add_rows(hyp[t], m.seqlet.hyp[t], m.offset);
        }
        for (long r = 0; r < len; ++r) ++coverage[static_cast<std::size_t>(m.offset + r)];
        members.push_back(std::move(m));
    }

    Matrix features(const std::vector<std::size_t>& relevant) const {
        std::vector<Matrix> c(n_tasks), h(n_tasks);
        for (std::size_t t : relevant) {
            c[t] = contrib[t];
            h[t] = hyp[t];
            for (std::size_t r = 0; r < length; ++r) {
                if (coverage[r] == 0) continue;
                const double inv = 1.0 / static_cast<double>(coverage[r]);
                for (double& v : c[t].row(r)) v *= inv;
                for (double& v : h[t].row(r)) v *= inv;
            }
        }
        return build_feature_matrix(h, c, relevant);
    }
};

}  // namespace

void recompute(Motif& motif) {
    motif.length = 0;
    motif.coverage.clear();
    if (motif.members.empty()) {
        motif.onehot = Matrix();
        motif.contrib.clear();
        motif.hyp.clear();
        return;
    }
    long lo = motif.members.front().offset, hi = lo;
    for (const auto& m : motif.members) {
        lo = std::min(lo, m.offset);
        hi = std::max(hi, m.offset + static_cast<long>(m.seqlet.length()));
    }
    for (auto& m : motif.members) m.offset -= lo;
    const auto len = static_cast<std::size_t>(hi - lo);
    const std::size_t n_tasks = motif.members.front().seqlet.contrib.size();
    motif.length = len;
    motif.onehot = Matrix(len, kAlphabetSize);
    motif.contrib.assign(n_tasks, Matrix(len, kAlphabetSize));
    motif.hyp.assign(n_tasks, Matrix(len, kAlphabetSize));
    motif.coverage.assign(len, 0);
    for (const auto& m : motif.members) {
        add_rows(motif.onehot, m.seqlet.onehot, m.offset);
        for (std::size_t t = 0; t < n_tasks; ++t) {
            add_rows(motif.contrib[t], m.seqlet.contrib[t], m.offset);
            add_rows(motif.hyp[t], m.seqlet.hyp[t], m.offset);
        }
        for (std::size_t r = 0; r < m.seqlet.length(); ++r) ++motif.coverage[static_cast<std::size_t>(m.offset) + r];
    }
    for (std::size_t r = 0; r < len; ++r) {
        if (motif.coverage[r] == 0) continue;
        const double inv = 1.0 / static_cast<double>(motif.coverage[r]);
        for (double& v : motif.onehot.row(r)) v *= inv;
        for (std::size_t t = 0; t < n_tasks; ++t) {
            for (double& v : motif.contrib[t].row(r)) v *= inv;
            for (double& v : motif.hyp[t].row(r)) v *= inv;
        }
    }
}

Motif make_motif(std::vector<MotifMember> members) {
    Motif m;
    m.members = std::move(members);
    recompute(m);
    return m;
}

Matrix motif_features(const Motif& motif, const std::vector<std::size_t>& relevant_tasks) {
    return build_feature_matrix(motif.hyp, motif.contrib, relevant_tasks);
}

std::optional<MotifMember> reslice_member(const MotifMember& m, const Dataset& dataset, long a, long b) {
    const SeqletCoord& c = m.seqlet.coord;
    SeqletCoord nc = c;
    if (!c.revcomp) {
        nc.start = c.start + a - m.offset;
        nc.end = c.start + b - m.offset;
    } else {
        nc.start = c.end - (b - m.offset);
        nc.end = c.end - (a - m.offset);
    }
    auto s = slice_seqlet(dataset, nc);
    if (!s) return std::nullopt;
    s->task = m.seqlet.task;
    s->score = m.seqlet.score;
    s->transformed_score = m.seqlet.transformed_score;
    return MotifMember{std::move(*s), a};
}

MotifMember flip_member(const MotifMember& m, std::size_t motif_len) {
    const long len = static_cast<long>(m.seqlet.length());
    return {reverse_complement(m.seqlet), static_cast<long>(motif_len) - m.offset - len};
}

double seqlet_magnitude(const Seqlet& s, const std::vector<std::size_t>& relevant_tasks, std::size_t window) {
    double total = 0.0;
    for (std::size_t t : relevant_tasks)
        total += std::fabs(central_contribution(s, t, std::min(window, s.length())));
    return total;
}

Motif aggregate_cluster(const std::vector<Seqlet>& seqlets, const std::vector<std::size_t>& relevant_tasks,
                        double min_overlap, bool revcomp, std::size_t central_window) {
    if (seqlets.empty()) throw std::invalid_argument("aggregate_cluster: empty cluster");
    std::vector<double> mag(seqlets.size());
    for (std::size_t i = 0; i < seqlets.size(); ++i)
        mag[i] = seqlet_magnitude(seqlets[i], relevant_tasks, central_window);
    std::vector<std::size_t> order(seqlets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });

    Accumulator acc;
    acc.add({seqlets[order[0]], 0});
    for (std::size_t k = 1; k < order.size(); ++k) {
        const Seqlet& s = seqlets[order[k]];
        const auto aln =
            best_alignment_cj(acc.features(relevant_tasks), build_feature_matrix(s, relevant_tasks), min_overlap, revcomp);
        acc.add({aln.revcomp ? reverse_complement(s) : s, aln.offset});
    }
    return make_motif(std::move(acc.members));
}

std::vector<std::size_t> center_histogram(const Motif& motif) {
    std::vector<std::size_t> hist(motif.length, 0);
    for (const auto& m : motif.members) {
        const long c = m.offset + static_cast<long>(m.seqlet.length() / 2);
        ++hist[static_cast<std::size_t>(std::clamp(c, 0L, static_cast<long>(motif.length) - 1))];
    }
    return hist;
}

Motif trim_to_support(const Motif& motif, double frac, std::size_t min_num) {
    if (motif.members.empty()) throw std::invalid_argument("trim_to_support: empty motif");
    const auto hist = center_histogram(motif);
    const std::size_t mx = *std::max_element(hist.begin(), hist.end());
    const double thr = std::max(frac * static_cast<double>(mx), static_cast<double>(min_num));
    long left = -1, right = -1;
    for (std::size_t p = 0; p < hist.size(); ++p)
        if (static_cast<double>(hist[p]) >= thr) {
            if (left < 0) left = static_cast<long>(p);
            right = static_cast<long>(p);
        }
    bool flagged = motif.flagged;
    if (left < 0) {
        left = right = static_cast<long>(std::max_element(hist.begin(), hist.end()) - hist.begin());
        flagged = true;
    }
    std::vector<MotifMember> kept;
    for (const auto& m : motif.members) {
        const long c = std::clamp(m.offset + static_cast<long>(m.seqlet.length() / 2), 0L,
                                  static_cast<long>(motif.length) - 1);
        if (c >= left && c <= right) kept.push_back(m);
    }
    Motif out = make_motif(std::move(kept));
    out.flagged = flagged;
    return out;
}

Motif expand_to_fill(const Motif& motif, const Dataset& dataset) {
    std::vector<MotifMember> kept;
    const long len = static_cast<long>(motif.length);
    for (const auto& m : motif.members) {
        if (m.offset == 0 && static_cast<long>(m.seqlet.length()) == len) {
            kept.push_back(m);
            continue;
        }
        if (auto r = reslice_member(m, dataset, 0, len)) kept.push_back(std::move(*r));
    }
    Motif out = make_motif(std::move(kept));
    out.flagged = motif.flagged;
    return out;
}

std::size_t best_window_start(const Motif& motif, const std::vector<std::size_t>& relevant_tasks,
                              std::size_t window) {
    if (motif.length < window) throw std::invalid_argument("motif span shorter than the standard window");
    std::vector<double> per_pos(motif.length, 0.0);
    for (std::size_t t : relevant_tasks)
        for (std::size_t r = 0; r < motif.length; ++r) {
            for (double v : motif.contrib[t].row(r)) per_pos[r] += std::fabs(v);
            for (double v : motif.hyp[t].row(r)) per_pos[r] += std::fabs(v);
        }
    const auto sums = window_sums(std::span<const double>(per_pos), window);
    return static_cast<std::size_t>(std::max_element(sums.begin(), sums.end()) - sums.begin());
}

Motif center_and_standardize(const Motif& motif, const Dataset& dataset,
                             const std::vector<std::size_t>& relevant_tasks, std::size_t window,
                             std::size_t flank) {
    const auto start = static_cast<long>(best_window_start(motif, relevant_tasks, window));
    const long a = start - static_cast<long>(flank);
    const long b = start + static_cast<long>(window + flank);
    std::vector<MotifMember> kept;
    for (const auto& m : motif.members)
        if (auto r = reslice_member(m, dataset, a, b)) kept.push_back(std::move(*r));
    Motif out = make_motif(std::move(kept));
    out.flagged = motif.flagged;
    return out;
}

bool sign_consistent(const Motif& motif, const ActivityPattern& pattern) {
    if (motif.members.empty()) return false;
    for (std::size_t t = 0; t < pattern.size(); ++t) {
        if (pattern[t] == 0) continue;
        const double s = total_sum(motif.contrib.at(t));
        const int sign = (s > 0) - (s < 0);
        if (sign != pattern[t]) return false;
    }
    return true;
}

std::vector<Motif> sign_consistency_filter(std::vector<Motif> motifs, const ActivityPattern& pattern) {
    std::vector<Motif> out;
    for (auto& m : motifs)
        if (sign_consistent(m, pattern)) out.push_back(std::move(m));
    return out;
}

std::vector<Motif> recluster_rounds(std::vector<Motif> motifs, std::size_t rounds,
                                    const std::function<std::vector<Motif>(const std::vector<Seqlet>&)>& cluster) {
    for (std::size_t r = 0; r < rounds; ++r) {
        std::vector<Seqlet> pooled;
        for (const auto& m : motifs)
            for (const auto& mem : m.members) pooled.push_back(mem.seqlet);
        if (pooled.empty()) break;
        motifs = cluster(pooled);
    }
    return motifs;
}

}  // namespace modisco
