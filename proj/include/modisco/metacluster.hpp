#pragma once
// Activity-pattern metaclustering of seqlets across tasks.

#include <cstddef>
#include <span>
#include <vector>

#include "modisco/seqlets.hpp"

namespace modisco {

// One entry per task, each in {-1, 0, +1}.
using ActivityPattern = std::vector<int>;

struct Metacluster {
    ActivityPattern pattern;
    std::vector<std::size_t> members;  // indices into the scored seqlet list

    std::vector<std::size_t> relevant_tasks() const;
};

// Sum of contrib[task] over the centered `window` rows of the seqlet.
double central_contribution(const Seqlet& s, std::size_t task, std::size_t window);

// raw[i][t] -> sign(raw) * ECDF(|raw|) within column t, ECDF(v) = #(<= v) / n.
// With separate_pos_neg the ECDF is taken among same-signed entries only.
std::vector<std::vector<double>> percentile_transform(const std::vector<std::vector<double>>& raw,
                                                      bool separate_pos_neg);

// True iff every constrained task has v_i * p_i > threshold.
bool compatible(std::span<const double> v, const ActivityPattern& p, double threshold);

// All 3^n patterns; entry order follows the base-3 code with digit 1 -> +1, 2 -> -1.
std::vector<ActivityPattern> enumerate_patterns(std::size_t n_tasks);

struct MetaclusterOptions {
    double strong_threshold = 0.0;
    double weak_threshold = 0.8;   // clamped to strong_threshold when higher
    std::size_t min_size = 100;
    double min_size_frac = 0.01;
    std::size_t max_per_metacluster = 20000;
    std::size_t max_tasks = 10;
};

// Surviving patterns need at least min(min_size, min_size_frac * N) strongly
// compatible seqlets. Each seqlet goes to the surviving weakly compatible
// pattern with the fewest zeros; ties go to the larger minimum |v_i| over
// constrained tasks, then to the lower pattern code. Empty metaclusters are
// dropped, the rest are ordered by size (largest first). Members are sorted
// ascending after capping. Throws ConfigError above max_tasks.
std::vector<Metacluster> metacluster_assign(const std::vector<std::vector<double>>& scores,
                                            const MetaclusterOptions& opt);

}  // namespace modisco
