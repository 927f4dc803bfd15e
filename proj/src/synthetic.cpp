#include "modisco/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"
#include "modisco/common.hpp"

namespace modisco {

Matrix log_odds(const Matrix& pwm) {
    Matrix out(pwm.rows(), pwm.cols());
    for (std::size_t i = 0; i < pwm.rows(); ++i)
        for (std::size_t b = 0; b < pwm.cols(); ++b) out(i, b) = std::log2(std::max(pwm(i, b), 1e-6) / 0.25);
    return out;
}

Matrix expected_contribution(const Matrix& pwm) {
    Matrix lo = log_odds(pwm);
    for (std::size_t i = 0; i < pwm.rows(); ++i)
        for (std::size_t b = 0; b < pwm.cols(); ++b) lo(i, b) *= pwm(i, b);
    return lo;
}

Matrix pwm_from_consensus(const std::string& consensus, double consensus_prob) {
    Matrix pwm(consensus.size(), kAlphabetSize, (1.0 - consensus_prob) / 3.0);
    for (std::size_t i = 0; i < consensus.size(); ++i) {
        std::size_t b;
        switch (consensus[i]) {
            case 'A': b = 0; break;
            case 'C': b = 1; break;
            case 'G': b = 2; break;
            case 'T': b = 3; break;
            default: throw ConfigError("consensus must be over ACGT: " + consensus);
        }
        pwm(i, b) = consensus_prob;
    }
    return pwm;
}

SynthConfig two_motif_config() {
    SynthConfig cfg;
    cfg.num_sequences = 500;
    cfg.sequence_length = 200;
    cfg.tasks = {"task0"};
    cfg.noise_sigma = 0.1;
    cfg.motifs.push_back({"plant_a", pwm_from_consensus("GATTACAGCGTC", 0.85), {1.0}, 0.5});
    cfg.motifs.push_back({"plant_b", pwm_from_consensus("TGGCCTAAGTCC", 0.85), {1.0}, 0.5});
    return cfg;
}

namespace {

std::size_t sample_base(std::mt19937_64& rng, std::span<const double> probs) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double x = u(rng);
    for (std::size_t b = 0; b + 1 < probs.size(); ++b) {
        if (x < probs[b]) return b;
        x -= probs[b];
    }
    return probs.size() - 1;
}

}  // namespace

SyntheticDataset generate_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
    const std::size_t n_tasks = cfg.tasks.size();
    const std::size_t L = cfg.sequence_length;
    for (const auto& m : cfg.motifs) {
        if (m.pwm.rows() > L)
            throw ConfigError("motif " + m.name + " is longer than the sequence length");
        if (m.pwm.cols() != kAlphabetSize) throw ConfigError("motif " + m.name + " PWM must have 4 columns");
        if (m.task_weights.size() != n_tasks)
            throw ConfigError("motif " + m.name + " needs one task weight per task");
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma * cfg.signal_scale);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> base_dist(0, 3);

    SyntheticDataset out;
    Dataset& ds = out.dataset;
    ds.tasks = cfg.tasks;
    ds.sequences.resize(cfg.num_sequences);

    std::vector<Matrix> lo;
    for (const auto& m : cfg.motifs) lo.push_back(log_odds(m.pwm));

    for (std::size_t s = 0; s < cfg.num_sequences; ++s) {
        SequenceRecord& rec = ds.sequences[s];
        rec.length = L;
        std::vector<std::size_t> bases(L);
        for (auto& b : bases) b = static_cast<std::size_t>(base_dist(rng));

        // hyp per task as doubles; signal positions get overwritten below.
        std::vector<std::vector<double>> hyp(n_tasks, std::vector<double>(L * kAlphabetSize));
        for (auto& h : hyp)
            for (auto& v : h) v = noise(rng);

        std::vector<char> occupied(L, 0);
        for (std::size_t m = 0; m < cfg.motifs.size(); ++m) {
            const auto& motif = cfg.motifs[m];
            if (unit(rng) >= motif.embed_probability) continue;
            const std::size_t len = motif.pwm.rows();
            std::uniform_int_distribution<std::size_t> pos_dist(0, L - len);
            bool placed = false;
            std::size_t start = 0;
            for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
                start = pos_dist(rng);
                placed = std::none_of(occupied.begin() + static_cast<std::ptrdiff_t>(start),
                                      occupied.begin() + static_cast<std::ptrdiff_t>(start + len),
                                      [](char c) { return c != 0; });
            }
            if (!placed) continue;
            const bool rc = cfg.allow_revcomp && unit(rng) < 0.5;

            // Instance in motif orientation, then written forward or reverse-complemented.
            std::vector<std::size_t> instance(len);
            for (std::size_t j = 0; j < len; ++j) instance[j] = sample_base(rng, motif.pwm.row(j));
            for (std::size_t j = 0; j < len; ++j) {
                const std::size_t pos = rc ? start + len - 1 - j : start + j;
                bases[pos] = rc ? 3 - instance[j] : instance[j];
                occupied[pos] = 1;
                for (std::size_t t = 0; t < n_tasks; ++t) {
                    const double w = motif.task_weights[t] * cfg.signal_scale;
                    if (w == 0.0) continue;
                    for (std::size_t b = 0; b < kAlphabetSize; ++b) {
                        const std::size_t gb = rc ? 3 - b : b;
                        hyp[t][pos * kAlphabetSize + gb] = w * lo[m](j, b);
                    }
                }
            }
            out.plants.push_back({s, m, start, rc});
        }

        rec.onehot.assign(L * kAlphabetSize, 0.0f);
        for (std::size_t i = 0; i < L; ++i) rec.onehot[i * kAlphabetSize + bases[i]] = 1.0f;
        rec.tasks.resize(n_tasks);
        for (std::size_t t = 0; t < n_tasks; ++t) {
            auto& tt = rec.tasks[t];
            tt.hyp.resize(L * kAlphabetSize);
            tt.contrib.assign(L * kAlphabetSize, 0.0f);
            for (std::size_t k = 0; k < L * kAlphabetSize; ++k) tt.hyp[k] = static_cast<float>(hyp[t][k]);
            for (std::size_t i = 0; i < L; ++i)
                tt.contrib[i * kAlphabetSize + bases[i]] = tt.hyp[i * kAlphabetSize + bases[i]];
        }
    }

    // Null tracks: background-only per-position scores (noise on the present base).
    for (std::size_t t = 0; t < n_tasks && cfg.null_tracks_per_task > 0; ++t) {
        auto& tracks = ds.nulls[cfg.tasks[t]];
        for (std::size_t k = 0; k < cfg.null_tracks_per_task; ++k) {
            std::vector<float> tr(L);
            for (auto& v : tr) v = static_cast<float>(noise(rng));
            tracks.push_back(std::move(tr));
        }
    }
    return out;
}

void save_ground_truth(const SyntheticDataset& synth, const SynthConfig& cfg, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["motifs"] = nlohmann::ordered_json::array();
    for (const auto& m : cfg.motifs) {
        nlohmann::ordered_json mj;
        mj["name"] = m.name;
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < m.pwm.rows(); ++i) rows.emplace_back(m.pwm.row(i).begin(), m.pwm.row(i).end());
        mj["pwm"] = rows;
        mj["task_weights"] = m.task_weights;
        j["motifs"].push_back(mj);
    }
    j["plants"] = nlohmann::ordered_json::array();
    for (const auto& p : synth.plants)
        j["plants"].push_back({{"sequence_index", p.sequence_index},
                               {"motif_index", p.motif_index},
                               {"start", p.start},
                               {"revcomp", p.revcomp}});
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace modisco
