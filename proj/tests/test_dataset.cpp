#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "modisco/common.hpp"
#include "modisco/dataset.hpp"
#include "modisco/results.hpp"
#include "modisco/synthetic.hpp"

using namespace modisco;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("modisco_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("dataset round trip through the directory format") {
    std::mt19937_64 rng(3);
    Dataset ds = testutil::random_dataset(rng, 2, 17);
    ds.nulls["t0"] = {{0.5f, -1.0f, 2.0f}, {1.0f}};
    const auto dir = scratch("roundtrip");
    save_dataset(ds, dir);
    const Dataset back = load_dataset(dir);
    CHECK(back.sequences.size() == 2);
    CHECK(back == ds);
}

TEST_CASE("missing contribution file is reported") {
    std::mt19937_64 rng(4);
    const auto dir = scratch("missing");
    save_dataset(testutil::random_dataset(rng, 2, 8), dir);
    fs::remove(dir / "contrib_t0.bin");
    CHECK_THROWS_AS(load_dataset(dir), DataError);
}

TEST_CASE("bad one-hot row names the sequence") {
    std::mt19937_64 rng(5);
    Dataset ds = testutil::random_dataset(rng, 3, 8);
    ds.sequences[1].onehot[0] = 1.0f;
    ds.sequences[1].onehot[1] = 1.0f;
    try {
        validate(ds);
        FAIL("expected a data error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("sequence 1") != std::string::npos);
    }
}

TEST_CASE("contribution off the present base is rejected") {
    std::mt19937_64 rng(6);
    Dataset ds = testutil::random_dataset(rng, 1, 8);
    for (std::size_t b = 0; b < 4; ++b)
        if (ds.sequences[0].onehot[b] == 0.0f) {
            ds.sequences[0].tasks[0].contrib[b] = 0.3f;
            break;
        }
    CHECK_THROWS_AS(validate(ds), DataError);
}

TEST_CASE("truncated binary file is a length mismatch") {
    std::mt19937_64 rng(7);
    const auto dir = scratch("truncated");
    save_dataset(testutil::random_dataset(rng, 2, 8), dir);
    fs::resize_file(dir / "hyp_t0.bin", 12);
    CHECK_THROWS_AS(load_dataset(dir), DataError);
}

TEST_CASE("invalid task names are refused") {
    CHECK(is_valid_task_name("task_0.a-b"));
    CHECK_FALSE(is_valid_task_name("a/b"));
    CHECK_FALSE(is_valid_task_name(""));
}

TEST_CASE("empty results bundle") {
    const auto dir = scratch("empty_results");
    ResultsBundle b;
    b.tasks = {"t0"};
    save_results(b, dir);
    CHECK(load_results(dir) == b);
    CHECK(slurp(dir / "results.json").find("\"metaclusters\": []") != std::string::npos);
}

TEST_CASE("motif tsv shape and byte-stable saves") {
    std::mt19937_64 rng(8);
    ResultsBundle b;
    b.tasks = {"t0"};
    MetaclusterResult mc;
    mc.pattern = {1};
    mc.num_seqlets = 3;
    MotifResult m;
    m.name = "metacluster_0/motif_0";
    m.length = 10;
    m.seqlets = {{{0, 5, 15, false}, 0}, {{1, 2, 12, true}, 0}};
    m.sequence = testutil::random_matrix(rng, 10, 4, 0, 1);
    m.contrib = {testutil::random_matrix(rng, 10, 4)};
    m.hyp = {testutil::random_matrix(rng, 10, 4)};
    mc.motifs.push_back(m);
    b.metaclusters.push_back(mc);

    const std::string tsv = motif_tsv(m, {"t0"});
    std::istringstream in(tsv);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        const auto cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), '\t')) + 1;
        CHECK(cols == 1 + 4 * 3);
        ++rows;
    }
    CHECK(rows == 1 + 10);

    const auto d1 = scratch("bytes1"), d2 = scratch("bytes2");
    save_results(b, d1);
    save_results(b, d2);
    for (const char* f : {"results.json", "metaclusters.tsv", "metacluster_0_motif_0.tsv"})
        CHECK(slurp(d1 / f) == slurp(d2 / f));
    CHECK(load_results(d1) == b);
}

TEST_CASE("synthetic generator without noise only scores the plant") {
    SynthConfig cfg;
    cfg.num_sequences = 5;
    cfg.sequence_length = 80;
    cfg.noise_sigma = 0.0;
    cfg.allow_revcomp = false;
    cfg.motifs.push_back({"m", pwm_from_consensus("ACGTAC", 0.9), {1.0}, 1.0});
    const auto syn = generate_synthetic(cfg, 11);
    REQUIRE(syn.plants.size() == 5);
    for (const auto& p : syn.plants) {
        const auto& tr = syn.dataset.sequences[p.sequence_index].tasks[0].contrib;
        for (std::size_t i = 0; i < cfg.sequence_length; ++i) {
            double row = 0;
            for (std::size_t b = 0; b < 4; ++b) row += std::fabs(tr[i * 4 + b]);
            if (i < p.start || i >= p.start + 6) CHECK(row == 0.0);
        }
    }
    CHECK(generate_synthetic(cfg, 11).dataset == syn.dataset);
    CHECK_FALSE(generate_synthetic(cfg, 12).dataset == syn.dataset);
}

TEST_CASE("expected contribution is pwm times log odds") {
    const Matrix pwm = pwm_from_consensus("AC", 0.7);
    const Matrix ec = expected_contribution(pwm);
    CHECK(ec(0, 0) == doctest::Approx(0.7 * std::log2(0.7 / 0.25)));
    CHECK(ec(0, 1) == doctest::Approx(0.1 * std::log2(0.1 / 0.25)));
}
