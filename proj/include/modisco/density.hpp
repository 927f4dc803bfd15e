#pragma once
// Affinity -> distance mapping, perplexity-calibrated conditional
// probabilities and their symmetrised joint graph.

#include <cstddef>
#include <span>
#include <vector>

#include "modisco/sparse.hpp"

namespace modisco {

// log(1 / (0.5 * max(x, 0)) - 1), with x clamped to at most 1; +inf for x <= 0.
double affinity_to_distance(double x);

struct BetaResult {
    double beta = 1.0;
    double perplexity = 0.0;  // achieved, 2^H with H in bits
    bool boundary = false;    // target not reachable on this row
};

// Perplexity of p_j proportional to exp(-beta * d_j); infinite distances get 0.
double perplexity_at(std::span<const double> dists, double beta);

// Solve perplexity(beta) = target within 1e-4 in log2 units (at most 200
// iterations). When the target exceeds the number of finite distances the
// result is beta = 0 (uniform over them) flagged as boundary; when it is below
// the number of tied nearest distances beta is pushed to the upper cap.
// Throws std::invalid_argument without any finite distance.
BetaResult beta_for_perplexity(std::span<const double> dists, double target_perplexity);

struct ConditionalProbs {
    SparseRows probs;              // row i: p_{j|i}, zero entries dropped
    std::vector<BetaResult> betas;
};

// Row-wise calibration of a distance matrix (diagonal entries ignored).
// Throws std::invalid_argument when a row has no finite distance.
ConditionalProbs conditional_probs(const SparseRows& dist, double perplexity, std::size_t workers = 1);

// p_ij = (p_{j|i} + p_{i|j}) / (2N), both directions stored.
SparseRows symmetrize(const SparseRows& cond);

// Apply affinity_to_distance to every stored entry.
SparseRows affinities_to_distances(const SparseRows& affinity);

}  // namespace modisco
