#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "modisco/common.hpp"
#include "modisco/config.hpp"
#include "modisco/pipeline.hpp"
#include "modisco/synthetic.hpp"

using namespace modisco;
namespace fs = std::filesystem;

namespace {

SynthConfig small_synth() {
    SynthConfig cfg;
    cfg.num_sequences = 80;
    cfg.sequence_length = 120;
    cfg.noise_sigma = 0.1;
    cfg.motifs.push_back({"a", pwm_from_consensus("GATTACAGCGTC", 0.85), {1.0}, 0.6});
    return cfg;
}

PipelineConfig small_pipeline() {
    PipelineConfig c;
    c.leiden_n_seeds = 5;
    c.min_num_to_trim_to = 0;
    c.final_min_cluster_size = 5;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config text round trip and overrides") {
    PipelineConfig c;
    c.perplexity = 12.5;
    c.use_louvain = true;
    c.null_model = "empirical";
    const auto back = parse_config(config_to_toml(c));
    CHECK(config_to_toml(back) == config_to_toml(c));
    CHECK(back.perplexity == 12.5);

    apply_override(c, "leiden_n_seeds=7");
    CHECK(c.leiden_n_seeds == 7);
    apply_override(c, "null_model=laplace");
    CHECK(c.null_model == "laplace");
    CHECK_THROWS_AS(apply_override(c, "no_such_key=1"), ConfigError);
    CHECK_THROWS_AS(parse_config("perplexity = \"ten\""), ConfigError);
    CHECK_THROWS_AS(parse_config("bogus = 1"), ConfigError);
    c.target_fdr = 2.0;
    CHECK_THROWS_AS(validate_config(c), ConfigError);

    const auto crit = parse_config("merge_similar = [[0.01, 0.5]]\n").merge_criteria;
    REQUIRE(crit.similar.size() == 1);
    CHECK(crit.similar[0].c == 0.5);
}

TEST_CASE("no significant windows gives an empty bundle") {
    SynthConfig cfg = small_synth();
    cfg.motifs.clear();
    cfg.noise_sigma = 0.0;
    const auto syn = generate_synthetic(cfg, 1);
    const auto out = run_pipeline(syn.dataset, small_pipeline());
    CHECK(out.results.metaclusters.empty());
    CHECK(out.log.find("thresholds", "degenerate_null").value_or(0) == 1.0);
}

TEST_CASE("pipeline on a small planted dataset") {
    const auto syn = generate_synthetic(small_synth(), 2);
    const auto cfg = small_pipeline();
    const auto a = run_pipeline(syn.dataset, cfg);
    const auto b = run_pipeline(syn.dataset, cfg);
    CHECK(a.results == b.results);
    CHECK(a.log.to_json() == b.log.to_json());

    std::size_t motifs = 0;
    for (const auto& mc : a.results.metaclusters) motifs += mc.motifs.size();
    CHECK(motifs >= 1);

    const auto d1 = fs::temp_directory_path() / "modisco_pipe_a";
    const auto d2 = fs::temp_directory_path() / "modisco_pipe_b";
    fs::remove_all(d1);
    fs::remove_all(d2);
    save_results(a.results, d1);
    save_results(b.results, d2);
    CHECK(slurp(d1 / "results.json") == slurp(d2 / "results.json"));
    CHECK(load_results(d1) == a.results);

    // counts never grow along union -> metacluster -> noise filter
    const double n_union = *a.log.find("union", "num_seqlets");
    double in_mcs = 0;
    for (const auto& e : a.log.entries) {
        if (e.stage == "metaclustering" && e.scope.rfind("metacluster ", 0) == 0) {
            const double n = *a.log.find("metaclustering", "num_seqlets", e.scope);
            in_mcs += n;
            const auto kept = a.log.find("noise_filter", "retained", e.scope);
            if (kept) CHECK(*kept <= n);
        }
    }
    CHECK(in_mcs <= n_union);

    // final motifs have the standard width
    for (const auto& mc : a.results.metaclusters)
        for (const auto& m : mc.motifs)
            CHECK(m.length == cfg.trim_to_window_size + 2 * (cfg.initial_flank_to_add + cfg.final_flank_to_add));
}

TEST_CASE("initial labels file") {
    const auto p = fs::temp_directory_path() / "modisco_init_labels.tsv";
    {
        std::ofstream out(p);
        out << "seqlet_index\tlabel\n# comment\n0\t1\n5\t0\n";
    }
    const auto m = load_init_labels(p);
    CHECK(m.size() == 2);
    CHECK(m.at(0) == 1);
    {
        std::ofstream out(p);
        out << "0\t1\nx\ty\n";
    }
    CHECK_THROWS_AS(load_init_labels(p), DataError);

    // the hook runs end to end
    const auto syn = generate_synthetic(small_synth(), 3);
    PipelineHooks hooks;
    hooks.init_labels = std::map<std::size_t, std::size_t>{{0, 0}, {1, 0}, {2, 1}};
    CHECK_NOTHROW(run_pipeline(syn.dataset, small_pipeline(), hooks));
}
