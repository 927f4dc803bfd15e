#pragma once
// Modularity-based community detection on symmetric weighted graphs stored
// as SparseRows (both directions present, self loops as (i, i) entries).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "modisco/sparse.hpp"

namespace modisco {

struct ClusterLabels {
    std::vector<std::size_t> labels;  // contiguous from 0
    double modularity = 0.0;
};

// Q = sum_c [in_c / 2m - (tot_c / 2m)^2] where sums run over ordered pairs,
// so a self loop counts once and 2m is the sum of all stored weights.
double modularity(const SparseRows& graph, const std::vector<std::size_t>& labels);

// Relabel to 0..k-1 in order of first appearance.
std::vector<std::size_t> renumber(const std::vector<std::size_t>& labels);

// Collapse communities into nodes; within-community weight becomes a self loop.
SparseRows aggregate_graph(const SparseRows& graph, const std::vector<std::size_t>& labels, std::size_t n_comm);

struct LouvainOptions {
    std::optional<std::vector<std::size_t>> init;
    bool allow_new_communities = true;  // false keeps at most the initial community count
};

// Levels from finest (index 0) to top. Each level labels the original nodes.
std::vector<ClusterLabels> louvain(const SparseRows& graph, std::uint64_t seed, const LouvainOptions& opt = {});

// Co-membership fraction of the top-level Louvain communities over n_runs
// seeds, stored on the support of `graph`.
SparseRows consensus_affinity(const SparseRows& graph, std::size_t n_runs, std::uint64_t seed);

// Louvain on the consensus graph until `patience` consecutive seeds give no
// modularity gain; returns the best finest-level labels.
ClusterLabels louvain_consensus_cluster(const SparseRows& graph, std::size_t n_runs, std::size_t patience,
                                        std::uint64_t seed);

struct LeidenOptions {
    double theta = 0.01;  // refinement randomness, in modularity units
    std::optional<std::vector<std::size_t>> init;
};

ClusterLabels leiden(const SparseRows& graph, std::uint64_t seed, const LeidenOptions& opt = {});

// Best of n_seeds Leiden runs; ties go to the earlier seed.
ClusterLabels leiden_multi_seed(const SparseRows& graph, std::size_t n_seeds, std::uint64_t seed,
                                const LeidenOptions& opt = {}, std::size_t workers = 1);

// At most two communities: Louvain from random binary starts until `patience`
// consecutive seeds bring no gain.
ClusterLabels dicluster(const SparseRows& graph, std::size_t patience, std::uint64_t seed);

// Seed of run i within a seed schedule.
std::uint64_t run_seed(std::uint64_t base, std::size_t i);

}  // namespace modisco
