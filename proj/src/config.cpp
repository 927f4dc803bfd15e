#include "modisco/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <type_traits>

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

#include "modisco/common.hpp"
#include "modisco/synthetic.hpp"

namespace modisco {

namespace {

// Visits every serialisable field in declaration order.
template <class Cfg, class F>
void for_each_field(Cfg& c, F&& f) {
    f("sliding_window_size", c.sliding_window_size);
    f("flank_size", c.flank_size);
    f("target_fdr", c.target_fdr);
    f("min_passing_windows_frac", c.min_passing_windows_frac);
    f("max_passing_windows_frac", c.max_passing_windows_frac);
    f("separate_pos_neg_thresholds", c.separate_pos_neg_thresholds);
    f("overlap_portion", c.overlap_portion);
    f("null_model", c.null_model);
    f("min_metacluster_size", c.min_metacluster_size);
    f("min_metacluster_size_frac", c.min_metacluster_size_frac);
    f("weak_threshold", c.weak_threshold);
    f("max_seqlets_per_metacluster", c.max_seqlets_per_metacluster);
    f("max_tasks", c.max_tasks);
    f("nearest_neighbors_to_compute", c.nearest_neighbors_to_compute);
    f("revcomp", c.revcomp);
    f("kmer_len", c.kmer_len);
    f("max_gapped_positions", c.max_gapped_positions);
    f("max_mismatches", c.max_mismatches);
    f("min_overlap_while_sliding", c.min_overlap_while_sliding);
    f("affmat_correlation_threshold", c.affmat_correlation_threshold);
    f("perplexity", c.perplexity);
    f("use_louvain", c.use_louvain);
    f("louvain_membership_average_n_runs", c.louvain_membership_average_n_runs);
    f("louvain_patience", c.louvain_patience);
    f("leiden_n_seeds", c.leiden_n_seeds);
    f("leiden_theta", c.leiden_theta);
    f("frac_support_to_trim_to", c.frac_support_to_trim_to);
    f("min_num_to_trim_to", c.min_num_to_trim_to);
    f("trim_to_window_size", c.trim_to_window_size);
    f("initial_flank_to_add", c.initial_flank_to_add);
    f("extra_cluster_rounds", c.extra_cluster_rounds);
    f("min_size_for_spurious_merge_detection", c.min_size_for_spurious_merge_detection);
    f("threshold_for_spurious_merge_detection", c.threshold_for_spurious_merge_detection);
    f("dicluster_patience", c.dicluster_patience);
    f("spurious_merge_min_overlap", c.spurious_merge_min_overlap);
    f("merge_similar", c.merge_criteria.similar);
    f("merge_dissimilar", c.merge_criteria.dissimilar);
    f("final_min_cluster_size", c.final_min_cluster_size);
    f("min_similarity_for_seqlet_assignment", c.min_similarity_for_seqlet_assignment);
    f("final_flank_to_add", c.final_flank_to_add);
    f("master_seed", c.master_seed);
    f("workers", c.workers);
}

double as_number(const toml::node& n, const std::string& key) {
    if (auto v = n.value<double>(); v && (n.is_floating_point() || n.is_integer())) return *v;
    throw ConfigError(key + ": expected a number");
}

template <class T>
void assign(T& field, const toml::node& n, const std::string& key) {
    if constexpr (std::is_same_v<T, bool>) {
        if (!n.is_boolean()) throw ConfigError(key + ": expected true or false");
        field = *n.value<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!n.is_string()) throw ConfigError(key + ": expected a string");
        field = *n.value<std::string>();
    } else if constexpr (std::is_same_v<T, double>) {
        field = as_number(n, key);
    } else if constexpr (std::is_integral_v<T>) {
        if (!n.is_integer()) throw ConfigError(key + ": expected an integer");
        const auto v = *n.value<std::int64_t>();
        if (v < 0) throw ConfigError(key + ": must not be negative");
        field = static_cast<T>(v);
    } else {  // merge criteria: array of [p, c] pairs
        const auto* arr = n.as_array();
        if (!arr) throw ConfigError(key + ": expected an array of [p, c] pairs");
        T out;
        for (const auto& item : *arr) {
            const auto* pair = item.as_array();
            if (!pair || pair->size() != 2) throw ConfigError(key + ": expected an array of [p, c] pairs");
            out.push_back({as_number(*pair->get(0), key), as_number(*pair->get(1), key)});
        }
        field = std::move(out);
    }
}

std::string toml_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void apply_table(PipelineConfig& cfg, const toml::table& tbl) {
    for (const auto& [k, node] : tbl) {
        const std::string key(k.str());
        bool found = false;
        for_each_field(cfg, [&](const char* name, auto& field) {
            if (key != name) return;
            found = true;
            assign(field, node, key);
        });
        if (!found) throw ConfigError("unknown config key: " + key);
    }
}

toml::table parse_toml(const std::string& text, const std::string& where) {
    try {
        return toml::parse(text, where);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << where << ": " << e.description() << " (line " << e.source().begin.line << ")";
        throw ConfigError(msg.str());
    }
}

void check_fraction(double v, const char* name, bool allow_one = false) {
    if (!(v > 0.0 && (v < 1.0 || (allow_one && v == 1.0))))
        throw ConfigError(std::string(name) + " must be in (0, 1" + (allow_one ? "]" : ")"));
}

void check_positive(std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
}

}  // namespace

void validate_config(const PipelineConfig& c) {
    check_positive(c.sliding_window_size, "sliding_window_size");
    check_fraction(c.target_fdr, "target_fdr", true);
    check_fraction(c.min_passing_windows_frac, "min_passing_windows_frac");
    check_fraction(c.max_passing_windows_frac, "max_passing_windows_frac");
    if (c.min_passing_windows_frac > c.max_passing_windows_frac)
        throw ConfigError("min_passing_windows_frac must not exceed max_passing_windows_frac");
    check_fraction(c.overlap_portion, "overlap_portion", true);
    if (c.null_model != "auto" && c.null_model != "laplace" && c.null_model != "empirical")
        throw ConfigError("null_model must be auto, laplace or empirical");
    check_positive(c.min_metacluster_size, "min_metacluster_size");
    check_fraction(c.min_metacluster_size_frac, "min_metacluster_size_frac");
    check_fraction(c.weak_threshold, "weak_threshold", true);
    check_positive(c.max_seqlets_per_metacluster, "max_seqlets_per_metacluster");
    check_positive(c.max_tasks, "max_tasks");
    check_positive(c.nearest_neighbors_to_compute, "nearest_neighbors_to_compute");
    check_positive(c.kmer_len, "kmer_len");
    if (c.max_gapped_positions + c.max_mismatches >= c.kmer_len)
        throw ConfigError("max_gapped_positions + max_mismatches must be below kmer_len");
    if (c.max_gapped_positions > 0 && c.max_gapped_positions + 2 > c.kmer_len)
        throw ConfigError("max_gapped_positions leaves no fixed k-mer ends");
    check_fraction(c.min_overlap_while_sliding, "min_overlap_while_sliding", true);
    if (!(c.affmat_correlation_threshold >= -1.0 && c.affmat_correlation_threshold <= 1.0))
        throw ConfigError("affmat_correlation_threshold must be in [-1, 1]");
    if (!(c.perplexity >= 1.0)) throw ConfigError("perplexity must be at least 1");
    check_positive(c.louvain_membership_average_n_runs, "louvain_membership_average_n_runs");
    check_positive(c.louvain_patience, "louvain_patience");
    check_positive(c.leiden_n_seeds, "leiden_n_seeds");
    if (!(c.leiden_theta > 0.0)) throw ConfigError("leiden_theta must be positive");
    check_fraction(c.frac_support_to_trim_to, "frac_support_to_trim_to", true);
    check_positive(c.trim_to_window_size, "trim_to_window_size");
    check_positive(c.dicluster_patience, "dicluster_patience");
    check_fraction(c.threshold_for_spurious_merge_detection, "threshold_for_spurious_merge_detection", true);
    check_fraction(c.spurious_merge_min_overlap, "spurious_merge_min_overlap", true);
    if (c.merge_criteria.similar.empty() || c.merge_criteria.dissimilar.empty())
        throw ConfigError("merge criteria lists must not be empty");
    if (!(c.min_similarity_for_seqlet_assignment >= -1.0 && c.min_similarity_for_seqlet_assignment <= 1.0))
        throw ConfigError("min_similarity_for_seqlet_assignment must be in [-1, 1]");
    if (c.trim_to_window_size > c.sliding_window_size + 2 * c.flank_size)
        throw ConfigError("trim_to_window_size exceeds the seqlet length");
}

PipelineConfig parse_config(const std::string& toml_text) {
    PipelineConfig cfg;
    apply_table(cfg, parse_toml(toml_text, "config"));
    validate_config(cfg);
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    PipelineConfig cfg;
    apply_table(cfg, parse_toml(ss.str(), path.string()));
    validate_config(cfg);
    return cfg;
}

void apply_override(PipelineConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
    std::string key = assignment.substr(0, eq);
    std::string value = assignment.substr(eq + 1);
    toml::table tbl;
    try {
        tbl = parse_toml(key + " = " + value, "--set " + key);
    } catch (const ConfigError&) {
        // bare words such as `null_model=laplace` are read as strings
        tbl = parse_toml(key + " = \"" + value + "\"", "--set " + key);
    }
    apply_table(cfg, tbl);
    validate_config(cfg);
}

std::string config_to_toml(const PipelineConfig& cfg) {
    std::ostringstream out;
    for_each_field(cfg, [&](const char* name, const auto& field) {
        using T = std::decay_t<decltype(field)>;
        out << name << " = ";
        if constexpr (std::is_same_v<T, bool>) {
            out << (field ? "true" : "false");
        } else if constexpr (std::is_same_v<T, std::string>) {
            out << '"' << field << '"';
        } else if constexpr (std::is_same_v<T, double>) {
            out << toml_double(field);
        } else if constexpr (std::is_integral_v<T>) {
            out << field;
        } else {
            out << '[';
            for (std::size_t i = 0; i < field.size(); ++i)
                out << (i ? ", " : "") << '[' << toml_double(field[i].p) << ", " << toml_double(field[i].c) << ']';
            out << ']';
        }
        out << '\n';
    });
    return out.str();
}

// Synthetic generator config:
//   num_sequences, sequence_length, tasks, signal_scale, noise_sigma,
//   allow_revcomp, null_tracks_per_task, and [[motifs]] tables with
//   name, consensus (or pwm rows), consensus_prob, task_weights, embed_probability.
SynthConfig load_synth_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read synth config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto tbl = parse_toml(ss.str(), path.string());
    SynthConfig cfg;
    for (const auto& [k, node] : tbl) {
        const std::string key(k.str());
        if (key == "num_sequences") assign(cfg.num_sequences, node, key);
        else if (key == "sequence_length") assign(cfg.sequence_length, node, key);
        else if (key == "signal_scale") assign(cfg.signal_scale, node, key);
        else if (key == "noise_sigma") assign(cfg.noise_sigma, node, key);
        else if (key == "allow_revcomp") assign(cfg.allow_revcomp, node, key);
        else if (key == "null_tracks_per_task") assign(cfg.null_tracks_per_task, node, key);
        else if (key == "tasks") {
            const auto* arr = node.as_array();
            if (!arr) throw ConfigError("tasks: expected an array of names");
            cfg.tasks.clear();
            for (const auto& t : *arr) {
                if (!t.is_string()) throw ConfigError("tasks: expected an array of names");
                cfg.tasks.push_back(*t.value<std::string>());
            }
        } else if (key == "motifs") {
            const auto* arr = node.as_array();
            if (!arr) throw ConfigError("motifs: expected [[motifs]] tables");
            for (const auto& item : *arr) {
                const auto* mt = item.as_table();
                if (!mt) throw ConfigError("motifs: expected [[motifs]] tables");
                PlantedMotif m;
                double prob = 0.85;
                std::string consensus;
                for (const auto& [mk, mn] : *mt) {
                    const std::string mkey(mk.str());
                    if (mkey == "name") assign(m.name, mn, mkey);
                    else if (mkey == "consensus") assign(consensus, mn, mkey);
                    else if (mkey == "consensus_prob") assign(prob, mn, mkey);
                    else if (mkey == "embed_probability") assign(m.embed_probability, mn, mkey);
                    else if (mkey == "task_weights") {
                        const auto* w = mn.as_array();
                        if (!w) throw ConfigError("task_weights: expected an array");
                        for (const auto& x : *w) m.task_weights.push_back(as_number(x, mkey));
                    } else if (mkey == "pwm") {
                        const auto* rows = mn.as_array();
                        if (!rows) throw ConfigError("pwm: expected an array of rows");
                        m.pwm = Matrix(rows->size(), kAlphabetSize);
                        for (std::size_t r = 0; r < rows->size(); ++r) {
                            const auto* row = rows->get(r)->as_array();
                            if (!row || row->size() != kAlphabetSize) throw ConfigError("pwm rows need 4 entries");
                            for (std::size_t b = 0; b < kAlphabetSize; ++b) m.pwm(r, b) = as_number(*row->get(b), mkey);
                        }
                    } else {
                        throw ConfigError("unknown motif key: " + mkey);
                    }
                }
                if (!consensus.empty()) m.pwm = pwm_from_consensus(consensus, prob);
                if (m.pwm.empty()) throw ConfigError("motif " + m.name + " needs consensus or pwm");
                cfg.motifs.push_back(std::move(m));
            }
        } else {
            throw ConfigError("unknown synth config key: " + key);
        }
    }
    for (auto& m : cfg.motifs)
        if (m.task_weights.empty()) m.task_weights.assign(cfg.tasks.size(), 1.0);
    return cfg;
}

}  // namespace modisco
