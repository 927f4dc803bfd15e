#pragma once
// Seqlet identification: sliding-window scoring, null modelling, isotonic
// FDR thresholds, greedy per-sequence extraction and cross-task union.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "modisco/dataset.hpp"
#include "modisco/matrix.hpp"

namespace modisco {

struct SeqletCoord {
    std::size_t sequence_index = 0;
    long start = 0;  // inclusive
    long end = 0;    // exclusive
    bool revcomp = false;

    long length() const { return end - start; }
    bool operator==(const SeqletCoord&) const = default;
};

// A located window with snapshots of every dataset track, oriented as
// coord.revcomp says (reverse-complemented tracks when true).
struct Seqlet {
    SeqletCoord coord;
    Matrix onehot;                 // L x 4
    std::vector<Matrix> contrib;   // per dataset task, L x 4
    std::vector<Matrix> hyp;       // per dataset task, L x 4
    std::size_t task = 0;          // task whose windows produced it
    double score = 0.0;            // raw window sum for `task`
    double transformed_score = 0.0;

    std::size_t length() const { return onehot.rows(); }
};

// Slices every track of `dataset` at `coord`; nullopt if out of bounds.
std::optional<Seqlet> slice_seqlet(const Dataset& dataset, const SeqletCoord& coord);

// Same seqlet read from the opposite strand.
Seqlet reverse_complement(const Seqlet& s);

// Entry i = sum of rows [i, i + w). Throws std::invalid_argument if w > L or w == 0.
std::vector<double> window_sums(std::span<const double> per_position, std::size_t w);
std::vector<double> window_sums(const Matrix& contrib, std::size_t w);

struct EmpiricalNull {
    std::vector<double> window_scores;
};

struct LaplaceNull {
    double mode = 0.0;
    double lambda_pos = 1.0;
    double lambda_neg = 1.0;
    double pos_fraction = 0.5;  // share of observed scores above the mode
};

using NullModel = std::variant<EmpiricalNull, LaplaceNull>;

// Mode from the histogram peak (bin width (p99 - p1)/100), then one-tailed
// exponential rates fit at the 5th..95th percentiles of each side; the
// steepest rate is kept. Throws std::invalid_argument when a side is empty.
LaplaceNull fit_laplace_null(std::span<const double> window_scores);

// Linear-interpolated percentile (q in [0, 100]) of unsorted values.
double percentile(std::vector<double> values, double q);

std::vector<double> sample_null(const NullModel& model, std::size_t n, std::uint64_t seed);

// Weighted pool-adjacent-violators fit; x must be nondecreasing. Entries
// with equal x receive equal fitted values.
std::vector<double> isotonic_regression(std::span<const double> x, std::span<const double> y,
                                        std::span<const double> weights);

struct ThresholdPair {
    double pos_threshold = 0.0;  // windows with score >= pos_threshold pass
    double neg_threshold = 0.0;  // windows with score <= neg_threshold pass
    double pos_cdf_cutoff = 0.0;
    double neg_cdf_cutoff = 0.0;
    bool pos_unreachable = false;  // no positive score met the target
    bool neg_unreachable = false;

    bool passes(double score) const {
        return (score > 0.0 && score >= pos_threshold) || (score < 0.0 && score <= neg_threshold);
    }
};

double passing_fraction(std::span<const double> windows, const ThresholdPair& t);

ThresholdPair fdr_thresholds(std::span<const double> orig_windows, std::span<const double> null_windows,
                             double target_fdr);

ThresholdPair adjust_thresholds_by_frac(std::span<const double> windows, ThresholdPair t, double min_frac,
                                        double max_frac, bool separate_pos_neg);

// Percentile of |score| among the window scores (or among same-signed
// scores when separate_pos_neg), as used for the metacluster transform.
class WindowPercentile {
public:
    WindowPercentile(std::span<const double> windows, bool separate_pos_neg);
    // sign(v) * fraction of reference values with magnitude <= |v|.
    double operator()(double v) const;
    // Fraction strictly below |v|: the transformed value of a threshold.
    double below(double v) const;

private:
    bool separate_;
    std::vector<double> abs_all_, pos_, neg_abs_;
};

void set_cdf_cutoffs(ThresholdPair& t, const WindowPercentile& pct);

// Greedy extraction for one task: repeatedly take the passing window with the
// largest |sum|, emit it with `flank` added per side, suppress every window
// whose expanded span overlaps it by more than half. Windows whose expansion
// leaves the sequence still suppress neighbours but are not emitted.
std::vector<Seqlet> extract_seqlets_one_task(const Dataset& dataset, std::size_t task,
                                             const ThresholdPair& thresholds, std::size_t window,
                                             std::size_t flank);

// Index-level core of the greedy extraction for one sequence; returns the
// window start indices that become seqlets, in selection order.
std::vector<std::size_t> greedy_window_selection(std::span<const double> sums, const ThresholdPair& thresholds,
                                                 std::size_t window, std::size_t flank, std::size_t seq_len);

// Overlap length of two coords on the same sequence (0 otherwise).
long overlap_length(const SeqletCoord& a, const SeqletCoord& b);

// Union across tasks: pairs overlapping by more than overlap_portion of the
// shorter span keep only the larger |transformed score|. Output is sorted by
// (sequence_index, start).
std::vector<Seqlet> union_seqlets(const std::vector<std::vector<Seqlet>>& per_task, double overlap_portion);

}  // namespace modisco
