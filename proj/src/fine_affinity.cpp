#include "modisco/fine_affinity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "modisco/common.hpp"

namespace modisco {

namespace {

int sign_of(double x) { return (x > 0) - (x < 0); }

}  // namespace

std::pair<double, double> intersect_union(double x, double y) {
    const double ax = std::fabs(x), ay = std::fabs(y);
    return {std::min(ax, ay) * sign_of(x) * sign_of(y), std::max(ax, ay)};
}

double continuous_jaccard(std::span<const double> v1, std::span<const double> v2) {
    if (v1.size() != v2.size()) throw std::invalid_argument("continuous_jaccard: length mismatch");
    double inter = 0.0, uni = 0.0;
    for (std::size_t i = 0; i < v1.size(); ++i) {
        const auto [a, b] = intersect_union(v1[i], v2[i]);
        inter += a;
        uni += b;
    }
    return uni == 0.0 ? 0.0 : inter / uni;
}

Matrix l1_normalized(const Matrix& m) {
    Matrix out = m;
    const double s = abs_sum(m);
    if (s > 0.0) out *= 1.0 / s;
    return out;
}

Matrix build_feature_matrix(const std::vector<Matrix>& hyp, const std::vector<Matrix>& contrib,
                            const std::vector<std::size_t>& relevant_tasks) {
    if (relevant_tasks.empty()) throw std::invalid_argument("build_feature_matrix: no relevant tasks");
    const std::size_t L = hyp.at(relevant_tasks.front()).rows();
    Matrix out(L, 2 * kAlphabetSize * relevant_tasks.size());
    std::size_t col = 0;
    for (std::size_t t : relevant_tasks) {
        set_column_block(out, col, l1_normalized(hyp.at(t)));
        set_column_block(out, col + kAlphabetSize, l1_normalized(contrib.at(t)));
        col += 2 * kAlphabetSize;
    }
    return out;
}

Matrix build_feature_matrix(const Seqlet& s, const std::vector<std::size_t>& relevant_tasks) {
    return build_feature_matrix(s.hyp, s.contrib, relevant_tasks);
}

std::size_t required_overlap(std::size_t l1, std::size_t l2, double min_overlap) {
    const double need = min_overlap * static_cast<double>(std::min(l1, l2));
    return static_cast<std::size_t>(std::max(1.0, std::ceil(need - 1e-9)));
}

double cj_at_offset(const Matrix& s1, const Matrix& s2, long offset) {
    if (s1.cols() != s2.cols()) throw std::invalid_argument("cj_at_offset: column mismatch");
    const long l1 = static_cast<long>(s1.rows()), l2 = static_cast<long>(s2.rows());
    const long lo = std::max(0L, offset), hi = std::min(l1, l2 + offset);
    const std::size_t c = s1.cols();
    double inter = 0.0, overlap_min = 0.0;
    for (long i = lo; i < hi; ++i) {
        const double* a = s1.row(static_cast<std::size_t>(i)).data();
        const double* b = s2.row(static_cast<std::size_t>(i - offset)).data();
        for (std::size_t k = 0; k < c; ++k) {
            const double m = std::min(std::fabs(a[k]), std::fabs(b[k]));
            overlap_min += m;
            inter += m * sign_of(a[k]) * sign_of(b[k]);
        }
    }
    // Union over the padded span: every |value| once, the larger one where both overlap.
    const double uni = abs_sum(s1) + abs_sum(s2) - overlap_min;
    return uni <= 0.0 ? 0.0 : inter / uni;
}

AlignmentResult best_alignment_cj(const Matrix& s1, const Matrix& s2, double min_overlap, bool revcomp) {
    if (!(min_overlap > 0.0 && min_overlap <= 1.0)) throw std::invalid_argument("min_overlap must be in (0, 1]");
    const long l1 = static_cast<long>(s1.rows()), l2 = static_cast<long>(s2.rows());
    const long need = static_cast<long>(required_overlap(s1.rows(), s2.rows(), min_overlap));
    if (need > std::min(l1, l2) || l1 == 0 || l2 == 0)
        throw std::invalid_argument("best_alignment_cj: no admissible offset");

    AlignmentResult best;
    bool have = false;
    auto consider = [&](double sim, long off, bool rc) {
        if (!have) {
            best = {sim, off, rc};
            have = true;
            return;
        }
        if (sim > best.similarity) {
            best = {sim, off, rc};
        } else if (sim == best.similarity) {
            const long a = std::labs(off), b = std::labs(best.offset);
            if (a < b || (a == b && !rc && best.revcomp) || (a == b && rc == best.revcomp && off < best.offset))
                best = {sim, off, rc};
        }
    };
    auto scan = [&](const Matrix& other, bool rc) {
        for (long o = -(l2 - 1); o <= l1 - 1; ++o) {
            const long ov = std::min(l1, l2 + o) - std::max(0L, o);
            if (ov < need) continue;
            consider(cj_at_offset(s1, other, o), o, rc);
        }
    };
    scan(s2, false);
    if (revcomp) scan(reverse_complement(s2), true);
    return best;
}

SparseRows fine_affmat(const std::vector<Matrix>& features, const std::vector<std::vector<std::size_t>>& neighbors,
                       double min_overlap, bool revcomp, std::size_t workers) {
    const std::size_t n = features.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < neighbors.size(); ++i)
        for (std::size_t j : neighbors[i]) {
            if (j == i || j >= n) continue;
            pairs.emplace_back(std::min(i, j), std::max(i, j));
        }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    std::vector<double> values(pairs.size());
    parallel_for(pairs.size(), workers, [&](std::size_t p) {
        values[p] = best_alignment_cj(features[pairs[p].first], features[pairs[p].second], min_overlap, revcomp)
                        .similarity;
    });
    SparseRows out(n);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        out.rows[pairs[p].first].emplace_back(pairs[p].second, values[p]);
        out.rows[pairs[p].second].emplace_back(pairs[p].first, values[p]);
    }
    for (auto& r : out.rows) std::sort(r.begin(), r.end());
    return out;
}

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman_rho: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("spearman_rho: need at least two values");
    const auto rx = average_ranks(x), ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

std::vector<std::size_t> noise_filter(const std::vector<std::vector<double>>& coarse_rows,
                                      const std::vector<std::vector<double>>& fine_rows, double threshold) {
    if (coarse_rows.size() != fine_rows.size()) throw std::invalid_argument("noise_filter: row count mismatch");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < coarse_rows.size(); ++i) {
        if (coarse_rows[i].size() < 2 || spearman_rho(coarse_rows[i], fine_rows[i]) >= threshold) keep.push_back(i);
    }
    return keep;
}

}  // namespace modisco
