#pragma once
// Continuous Jaccard similarity over alignments of feature matrices, the
// sparse fine affinity matrix and the coarse/fine rank-correlation filter.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "modisco/matrix.hpp"
#include "modisco/metacluster.hpp"
#include "modisco/seqlets.hpp"
#include "modisco/sparse.hpp"

namespace modisco {

// (min(|x|,|y|) * sign(x) * sign(y), max(|x|,|y|))
std::pair<double, double> intersect_union(double x, double y);

// Sum of intersections over sum of unions; 0 when the union sum is 0.
double continuous_jaccard(std::span<const double> v1, std::span<const double> v2);

// Divide by the absolute sum; all-zero blocks stay zero.
Matrix l1_normalized(const Matrix& m);

// Per relevant task (in order): L1-normalised hyp block then contrib block,
// concatenated along columns. Result is L x (8 * tasks).
Matrix build_feature_matrix(const Seqlet& s, const std::vector<std::size_t>& relevant_tasks);
Matrix build_feature_matrix(const std::vector<Matrix>& hyp, const std::vector<Matrix>& contrib,
                            const std::vector<std::size_t>& relevant_tasks);

struct AlignmentResult {
    double similarity = 0.0;
    long offset = 0;  // row j of the second matrix sits on row j + offset of the first
    bool revcomp = false;
};

// Minimum number of overlapping rows for two lengths.
std::size_t required_overlap(std::size_t l1, std::size_t l2, double min_overlap);

// Continuous Jaccard of S1 and S2 zero-padded to their union at `offset`.
double cj_at_offset(const Matrix& s1, const Matrix& s2, long offset);

// Best over every admissible offset (and over S2's reverse complement when
// revcomp). Ties: smaller |offset|, then forward, then the lower offset.
// Throws std::invalid_argument when no offset is admissible.
AlignmentResult best_alignment_cj(const Matrix& s1, const Matrix& s2, double min_overlap, bool revcomp);

// Entry (i, j) for every j in neighbors[i], symmetrised over the union of
// supports. Each unordered pair is aligned once.
SparseRows fine_affmat(const std::vector<Matrix>& features, const std::vector<std::vector<std::size_t>>& neighbors,
                       double min_overlap, bool revcomp, std::size_t workers = 1);

// Average ranks, ties share the mean rank (1-based).
std::vector<double> average_ranks(std::span<const double> x);

// Pearson correlation of average ranks; 0 if either has zero rank variance.
double spearman_rho(std::span<const double> x, std::span<const double> y);

// Keep i iff spearman_rho(coarse_rows[i], fine_rows[i]) >= threshold. Rows
// with fewer than two entries are kept.
std::vector<std::size_t> noise_filter(const std::vector<std::vector<double>>& coarse_rows,
                                      const std::vector<std::vector<double>>& fine_rows, double threshold);

}  // namespace modisco
