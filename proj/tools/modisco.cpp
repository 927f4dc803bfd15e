// modisco command line: discover, synth, validate.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "modisco/common.hpp"
#include "modisco/config.hpp"
#include "modisco/dataset.hpp"
#include "modisco/pipeline.hpp"
#include "modisco/results.hpp"
#include "modisco/synthetic.hpp"

namespace fs = std::filesystem;
using namespace modisco;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;

int run_discover(const std::string& input, const std::string& output, const std::string& config_path,
                 std::optional<std::uint64_t> seed, const std::vector<std::string>& sets, std::size_t workers,
                 const std::string& init_labels, bool print_config) {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    for (const auto& s : sets) apply_override(cfg, s);
    if (seed) cfg.master_seed = *seed;
    if (workers > 0) cfg.workers = workers;
    validate_config(cfg);
    if (print_config) {
        std::cout << config_to_toml(cfg);
        return 0;
    }
    if (input.empty() || output.empty()) {
        std::cerr << "discover: --input and --output are required\n";
        return kUsage;
    }
    const Dataset ds = load_dataset(input);
    PipelineHooks hooks;
    if (!init_labels.empty()) hooks.init_labels = load_init_labels(init_labels);
    const auto out = run_pipeline(ds, cfg, hooks);
    save_results(out.results, output);
    {
        std::ofstream log(fs::path(output) / "run_log.json", std::ios::trunc);
        log << out.log.to_json();
    }
    {
        std::ofstream c(fs::path(output) / "config.toml", std::ios::trunc);
        c << config_to_toml(cfg);
    }
    std::size_t n_motifs = 0;
    for (const auto& mc : out.results.metaclusters) n_motifs += mc.motifs.size();
    std::cerr << "discover: " << out.results.metaclusters.size() << " metaclusters, " << n_motifs << " motifs -> "
              << output << "\n";
    return 0;
}

int run_synth(const std::string& output, const std::string& config_path, std::uint64_t seed) {
    const SynthConfig cfg = load_synth_config(config_path);
    const auto synth = generate_synthetic(cfg, seed);
    save_dataset(synth.dataset, output);
    save_ground_truth(synth, cfg, fs::path(output) / "ground_truth.json");
    return 0;
}

int run_validate(const std::string& input) {
    const Dataset ds = load_dataset(input);
    std::cout << "ok: " << ds.sequences.size() << " sequences, " << ds.tasks.size() << " tasks\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Motif discovery from per-base importance scores"};
    app.require_subcommand(1);

    std::string input, output, config_path, init_labels;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    bool print_config = false;

    auto* discover = app.add_subcommand("discover", "Run the motif discovery pipeline");
    discover->add_option("--input", input, "Dataset directory");
    discover->add_option("--output", output, "Results directory");
    discover->add_option("--config", config_path, "TOML config file")->check(CLI::ExistingFile);
    auto* seed_opt = discover->add_option("--seed", seed, "Master seed");
    discover->add_option("--set", sets, "key=value config override (repeatable)");
    discover->add_option("--workers", workers, "Worker threads (default MODISCO_WORKERS or 1)");
    discover->add_option("--init-labels", init_labels, "TSV of seqlet index -> initial cluster label")
        ->check(CLI::ExistingFile);
    discover->add_flag("--print-config", print_config, "Print the effective config and exit");

    std::string synth_out, synth_cfg;
    std::uint64_t synth_seed = 0;
    auto* synth = app.add_subcommand("synth", "Generate a planted-motif dataset");
    synth->add_option("--output", synth_out, "Output dataset directory")->required();
    synth->add_option("--config", synth_cfg, "Synthetic TOML config")->required()->check(CLI::ExistingFile);
    synth->add_option("--seed", synth_seed, "Generator seed")->required();

    std::string validate_in;
    auto* val = app.add_subcommand("validate", "Check a dataset directory");
    val->add_option("--input", validate_in, "Dataset directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return kUsage;
    }
    if (discover->parsed() && !print_config && (input.empty() || output.empty())) {
        std::cerr << "discover: --input and --output are required\n\n" << discover->help();
        return kUsage;
    }

    try {
        if (discover->parsed())
            return run_discover(input, output, config_path,
                                seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt, sets, workers,
                                init_labels, print_config);
        if (synth->parsed()) return run_synth(synth_out, synth_cfg, synth_seed);
        return run_validate(validate_in);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const StageError& e) {
        std::cerr << "stage " << e.stage() << " failed: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
}
