#pragma once
// Motifs: aligned seqlets with positionwise averaged tracks, built greedily
// from a cluster and then trimmed, expanded, centred and sign-checked.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "modisco/dataset.hpp"
#include "modisco/fine_affinity.hpp"
#include "modisco/matrix.hpp"
#include "modisco/metacluster.hpp"
#include "modisco/seqlets.hpp"

namespace modisco {

// A seqlet in motif orientation whose row 0 sits at motif position `offset`.
struct MotifMember {
    Seqlet seqlet;
    long offset = 0;
};

struct Motif {
    std::vector<MotifMember> members;
    std::size_t length = 0;
    Matrix onehot;                // positionwise mean of the sequence, length x 4
    std::vector<Matrix> contrib;  // per dataset task
    std::vector<Matrix> hyp;      // per dataset task
    std::vector<std::size_t> coverage;
    bool flagged = false;         // a degenerate case was hit while editing
};

// Shift offsets so the leftmost member starts at 0 and recompute the span and
// the averages over covering members.
void recompute(Motif& motif);
Motif make_motif(std::vector<MotifMember> members);

// Feature matrix of the motif's averaged tracks.
Matrix motif_features(const Motif& motif, const std::vector<std::size_t>& relevant_tasks);

// Re-slice a member from its source sequence so it covers motif positions
// [a, b). nullopt when the source cannot supply those rows.
std::optional<MotifMember> reslice_member(const MotifMember& m, const Dataset& dataset, long a, long b);

// Same member seen in a reverse-complemented motif of length motif_len.
MotifMember flip_member(const MotifMember& m, std::size_t motif_len);

// Sum over relevant tasks of |central contribution|.
double seqlet_magnitude(const Seqlet& s, const std::vector<std::size_t>& relevant_tasks, std::size_t window);

// Greedy merge in descending magnitude, each seqlet aligned to the running
// averaged motif at its best Continuous Jaccard offset and orientation.
Motif aggregate_cluster(const std::vector<Seqlet>& seqlets, const std::vector<std::size_t>& relevant_tasks,
                        double min_overlap, bool revcomp, std::size_t central_window);

// Histogram of member centres (offset + length / 2).
std::vector<std::size_t> center_histogram(const Motif& motif);

Motif trim_to_support(const Motif& motif, double frac, std::size_t min_num);
Motif expand_to_fill(const Motif& motif, const Dataset& dataset);

// Index of the leftmost `window`-row stretch with the largest summed
// |contrib| + |hyp| over relevant tasks.
std::size_t best_window_start(const Motif& motif, const std::vector<std::size_t>& relevant_tasks,
                              std::size_t window);
Motif center_and_standardize(const Motif& motif, const Dataset& dataset,
                             const std::vector<std::size_t>& relevant_tasks, std::size_t window,
                             std::size_t flank);

bool sign_consistent(const Motif& motif, const ActivityPattern& pattern);
std::vector<Motif> sign_consistency_filter(std::vector<Motif> motifs, const ActivityPattern& pattern);

// Runs `cluster` on the pooled members of the current motifs `rounds` times.
std::vector<Motif> recluster_rounds(std::vector<Motif> motifs, std::size_t rounds,
                                    const std::function<std::vector<Motif>(const std::vector<Seqlet>&)>& cluster);

}  // namespace modisco
