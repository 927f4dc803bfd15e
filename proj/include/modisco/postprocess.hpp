#pragma once
// Motif post-processing: spurious-merge splitting, redundant-motif merging,
// reassignment of seqlets from small motifs and final flank expansion.

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "modisco/aggregation.hpp"
#include "modisco/dataset.hpp"
#include "modisco/density.hpp"
#include "modisco/matrix.hpp"

namespace modisco {

struct MotifSimilarity {
    double c = 0.0;  // best-alignment Pearson of the averaged features
    double p = 0.0;  // density-sensitive similarity
};

struct MergeDisjunct {
    double p = 0.0;
    double c = 0.0;
};

// similar: some (p > p_min and c > c_min); dissimilar: some (p < p_max and c < c_max).
struct MergeCriteria {
    std::vector<MergeDisjunct> similar;
    std::vector<MergeDisjunct> dissimilar;

    static MergeCriteria defaults();
    bool is_similar(const MotifSimilarity& s) const;
    bool is_dissimilar(const MotifSimilarity& s) const;
};

// Continuous Jaccard between member feature matrices at their stored offsets.
Matrix within_motif_affmat(const Motif& motif, const std::vector<std::size_t>& relevant_tasks);

// Pearson correlation of the flattened overlapping rows (row j of b on row
// j + offset of a); 0 when either side has zero variance.
double pearson_at_offset(const Matrix& a, const Matrix& b, long offset);

// Same search space and tie rules as best_alignment_cj, scored by Pearson.
AlignmentResult best_alignment_pearson(const Matrix& a, const Matrix& b, double min_overlap, bool revcomp);

double crosscorr_similarity(const Motif& m1, const Motif& m2, const std::vector<std::size_t>& relevant_tasks,
                            double min_overlap, bool revcomp);

struct SpuriousMergeOptions {
    std::size_t min_size = 30;
    double corr_threshold = 0.8;
    double perplexity = 10.0;
    std::size_t patience = 20;
    double min_overlap = 0.7;
    bool revcomp = true;
};

// Split recursively while the two dicluster halves correlate below the threshold.
std::vector<Motif> detect_spurious_merge(const Motif& motif, const std::vector<std::size_t>& relevant_tasks,
                                         const SpuriousMergeOptions& opt, std::uint64_t seed);

// Beta calibrated so the perplexity over `distances` equals member_count.
BetaResult motif_beta_from_distances(std::span<const double> distances, std::size_t member_count);

// Distances from the motif to every pooled seqlet feature matrix via the best
// Continuous Jaccard alignment, then calibrated as above.
BetaResult motif_beta(const Motif& motif, const std::vector<Matrix>& pooled_features,
                      const std::vector<std::size_t>& relevant_tasks, double min_overlap, bool revcomp);

// exp(-max(beta_i, beta_j) * d_ij)
double density_sensitive_sim(double beta_i, double beta_j, double d_ij);

// One merge sweep over pairs in descending c. Returns the groups of indices
// (each ascending, groups ordered by their first index).
std::vector<std::vector<std::size_t>> merge_sweep(const std::vector<std::vector<MotifSimilarity>>& sims,
                                                  const MergeCriteria& criteria);

// Repeat sweeps until nothing merges. SimFn: items -> n x n similarities;
// MergeFn: (items, group) -> merged item.
template <class Item, class SimFn, class MergeFn>
std::vector<Item> iterative_merge(std::vector<Item> items, const MergeCriteria& criteria, SimFn sim_fn,
                                  MergeFn merge_fn) {
    for (;;) {
        if (items.size() < 2) return items;
        const auto groups = merge_sweep(sim_fn(items), criteria);
        if (groups.size() == items.size()) return items;
        std::vector<Item> next;
        for (const auto& g : groups) next.push_back(g.size() == 1 ? items[g.front()] : merge_fn(items, g));
        items = std::move(next);
    }
}

struct MotifMergeContext {
    const Dataset* dataset = nullptr;
    std::vector<std::size_t> relevant_tasks;
    double min_overlap = 0.7;
    bool revcomp = true;
    std::size_t window = 30;  // standardisation window
    std::size_t flank = 10;
};

std::vector<std::vector<MotifSimilarity>> motif_similarities(const std::vector<Motif>& motifs,
                                                             const MotifMergeContext& ctx);

// Align every motif of the group onto the largest one, pool members and re-standardise.
Motif merge_motifs(const std::vector<Motif>& motifs, const std::vector<std::size_t>& group,
                   const MotifMergeContext& ctx);

std::vector<Motif> iterative_merge_motifs(std::vector<Motif> motifs, const MergeCriteria& criteria,
                                          const MotifMergeContext& ctx);

struct ReassignResult {
    std::vector<Motif> motifs;
    std::size_t reassigned = 0;
    std::size_t dropped = 0;
    bool flagged = false;  // every motif was small, so every orphan was dropped
};

ReassignResult reassign_small_clusters(const std::vector<Motif>& motifs, std::size_t final_min_size,
                                       double min_similarity, const MotifMergeContext& ctx);

std::vector<Motif> final_flank_expand(const std::vector<Motif>& motifs, std::size_t flank, const Dataset& dataset);

}  // namespace modisco
