#pragma once
// Planted-motif dataset generator used by tests and the `synth` subcommand.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "modisco/dataset.hpp"
#include "modisco/matrix.hpp"

namespace modisco {

struct PlantedMotif {
    std::string name;
    Matrix pwm;                        // length x 4, rows are probabilities
    std::vector<double> task_weights;  // per task multiplier; 0 means inactive
    double embed_probability = 0.5;    // chance of one instance per sequence
};

struct SynthConfig {
    std::size_t num_sequences = 500;
    std::size_t sequence_length = 200;
    std::vector<std::string> tasks{"task0"};
    std::vector<PlantedMotif> motifs;
    double signal_scale = 1.0;
    double noise_sigma = 0.1;  // in units of signal_scale
    bool allow_revcomp = true;
    std::size_t null_tracks_per_task = 0;
};

struct PlantedInstance {
    std::size_t sequence_index = 0;
    std::size_t motif_index = 0;
    std::size_t start = 0;
    bool revcomp = false;
};

struct SyntheticDataset {
    Dataset dataset;
    std::vector<PlantedInstance> plants;
};

// log2(p / 0.25) per entry; probabilities are floored at 1e-6.
Matrix log_odds(const Matrix& pwm);

// Expected contribution of a planted PWM: pwm(i,b) * log_odds(i,b).
Matrix expected_contribution(const Matrix& pwm);

// PWM with `consensus_prob` on the consensus base and the rest spread evenly.
Matrix pwm_from_consensus(const std::string& consensus, double consensus_prob);

// 500 x 200 bp, one task, two distinct 12-bp PWMs, noise 0.1.
SynthConfig two_motif_config();

// Deterministic in (cfg, seed). Throws ConfigError if a motif does not fit.
SyntheticDataset generate_synthetic(const SynthConfig& cfg, std::uint64_t seed);

SynthConfig load_synth_config(const std::filesystem::path& path);
void save_ground_truth(const SyntheticDataset& synth, const SynthConfig& cfg, const std::filesystem::path& path);

}  // namespace modisco
