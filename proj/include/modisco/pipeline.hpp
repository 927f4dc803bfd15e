#pragma once
// End-to-end orchestration: seqlets -> metaclusters -> per-metacluster
// clustering and aggregation -> post-processing -> ResultsBundle.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "modisco/aggregation.hpp"
#include "modisco/config.hpp"
#include "modisco/dataset.hpp"
#include "modisco/metacluster.hpp"
#include "modisco/results.hpp"
#include "modisco/seqlets.hpp"

namespace modisco {

struct StageLogEntry {
    std::string stage;
    std::string scope;  // "" or e.g. "metacluster 0"
    std::vector<std::pair<std::string, double>> values;
};

struct RunLog {
    std::vector<StageLogEntry> entries;
    void add(std::string stage, std::string scope, std::vector<std::pair<std::string, double>> values);
    // Value of `key` in the first entry for `stage` (and scope, when given).
    std::optional<double> find(const std::string& stage, const std::string& key, const std::string& scope = "") const;
    std::string to_json() const;
};

struct SeqletPhaseResult {
    std::vector<Seqlet> seqlets;            // cross-task union, sorted by location
    std::vector<ThresholdPair> thresholds;  // per task
    std::vector<std::vector<double>> transformed;  // per seqlet, per task
    double strong_threshold = 0.0;
};

// Per-task thresholds, extraction and union, plus the percentile transform of
// every union seqlet's central contribution.
SeqletPhaseResult find_seqlets(const Dataset& dataset, const PipelineConfig& cfg, RunLog* log = nullptr);

struct ClusterContext {
    const Dataset* dataset = nullptr;
    const PipelineConfig* cfg = nullptr;
    ActivityPattern pattern;
    std::vector<std::size_t> relevant_tasks;
    std::size_t workers = 1;
    std::string scope;
    RunLog* log = nullptr;
};

inline constexpr std::size_t kNoLabel = static_cast<std::size_t>(-1);

// One clustering round: coarse and fine affinities, noise filter, density
// transform, community detection, aggregation, boundary editing, sign filter.
// init_labels (optional, parallel to seqlets, kNoLabel for none) seed Leiden.
std::vector<Motif> cluster_and_aggregate(const std::vector<Seqlet>& seqlets, const ClusterContext& ctx,
                                         std::uint64_t seed, const std::vector<std::size_t>* init_labels = nullptr);

// Spurious-merge split, iterative merge, reassignment and final flank expansion.
std::vector<Motif> postprocess_motifs(std::vector<Motif> motifs, const ClusterContext& ctx, std::uint64_t seed);

struct PipelineOutput {
    ResultsBundle results;
    RunLog log;
    std::vector<std::vector<Motif>> motifs;  // per metacluster in results order
};

struct PipelineHooks {
    // Union seqlet index -> initial cluster label for Leiden.
    std::optional<std::map<std::size_t, std::size_t>> init_labels;
};

PipelineOutput run_pipeline(const Dataset& dataset, const PipelineConfig& cfg, const PipelineHooks& hooks = {});

// Two-column TSV (seqlet_index, label); '#' lines and a non-numeric header are skipped.
std::map<std::size_t, std::size_t> load_init_labels(const std::filesystem::path& path);

}  // namespace modisco
