#pragma once
// Pipeline parameters, TOML loading, key=value overrides and printing.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "modisco/postprocess.hpp"

namespace modisco {

struct PipelineConfig {
    // seqlet extraction
    std::size_t sliding_window_size = 21;
    std::size_t flank_size = 10;
    double target_fdr = 0.01;
    double min_passing_windows_frac = 0.03;
    double max_passing_windows_frac = 0.2;
    bool separate_pos_neg_thresholds = false;
    double overlap_portion = 0.5;
    std::string null_model = "auto";  // auto | laplace | empirical

    // metaclustering
    std::size_t min_metacluster_size = 100;
    double min_metacluster_size_frac = 0.01;
    double weak_threshold = 0.8;
    std::size_t max_seqlets_per_metacluster = 20000;
    std::size_t max_tasks = 10;

    // affinities
    std::size_t nearest_neighbors_to_compute = 500;
    bool revcomp = true;
    std::size_t kmer_len = 8;
    std::size_t max_gapped_positions = 3;
    std::size_t max_mismatches = 2;
    double min_overlap_while_sliding = 0.7;
    double affmat_correlation_threshold = 0.15;

    // clustering
    double perplexity = 10.0;
    bool use_louvain = false;
    std::size_t louvain_membership_average_n_runs = 200;
    std::size_t louvain_patience = 50;
    std::size_t leiden_n_seeds = 50;
    double leiden_theta = 0.01;

    // aggregation
    double frac_support_to_trim_to = 0.2;
    std::size_t min_num_to_trim_to = 30;
    std::size_t trim_to_window_size = 30;
    std::size_t initial_flank_to_add = 10;
    std::size_t extra_cluster_rounds = 1;

    // postprocessing
    std::size_t min_size_for_spurious_merge_detection = 30;
    double threshold_for_spurious_merge_detection = 0.8;
    std::size_t dicluster_patience = 20;
    double spurious_merge_min_overlap = 0.7;
    MergeCriteria merge_criteria = MergeCriteria::defaults();
    std::size_t final_min_cluster_size = 30;
    double min_similarity_for_seqlet_assignment = 0.2;
    std::size_t final_flank_to_add = 10;

    std::uint64_t master_seed = 0;
    std::size_t workers = 0;  // 0: MODISCO_WORKERS or 1
};

// Throws ConfigError naming the offending field.
void validate_config(const PipelineConfig& cfg);

// Unknown keys are rejected.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& toml_text);

// `key=value` with a TOML value, e.g. "target_fdr=0.05" or "revcomp=false".
void apply_override(PipelineConfig& cfg, const std::string& assignment);

// Every field as TOML; parse_config(config_to_toml(c)) reproduces c.
std::string config_to_toml(const PipelineConfig& cfg);

}  // namespace modisco
