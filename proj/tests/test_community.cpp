#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "modisco/community.hpp"

using namespace modisco;

namespace {

using Dense = std::vector<std::vector<double>>;

Dense two_cliques(std::size_t a, std::size_t b, double bridge) {
    const std::size_t n = a + b;
    Dense w(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && ((i < a) == (j < a))) w[i][j] = 1.0;
    w[0][n - 1] = w[n - 1][0] = bridge;
    return w;
}

bool is_bipartition(const std::vector<std::size_t>& labels, std::size_t a) {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if ((labels[i] == labels[0]) != (i < a)) return false;
    return true;
}

}  // namespace

TEST_CASE("modularity by hand") {
    Dense w(4, std::vector<double>(4, 0.0));
    w[0][1] = w[1][0] = 1;
    w[2][3] = w[3][2] = 1;
    CHECK(modularity(testutil::dense_graph(w), {0, 0, 1, 1}) == doctest::Approx(0.5));
    CHECK(modularity(testutil::dense_graph(w), {0, 0, 0, 0}) == doctest::Approx(0.0));

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    std::uniform_int_distribution<std::size_t> lab(0, 2);
    for (int t = 0; t < 20; ++t) {
        Dense r(7, std::vector<double>(7, 0.0));
        for (std::size_t i = 0; i < 7; ++i)
            for (std::size_t j = i; j < 7; ++j) r[i][j] = r[j][i] = u(rng) < 0.5 ? u(rng) : 0.0;
        std::vector<std::size_t> labels(7);
        for (auto& l : labels) l = lab(rng);
        CHECK(std::fabs(modularity(testutil::dense_graph(r), labels) - testutil::modularity_direct(r, labels)) < 1e-12);
    }
}

TEST_CASE("renumber by first appearance") {
    CHECK(renumber({5, 2, 5, 9}) == std::vector<std::size_t>{0, 1, 0, 2});
}

TEST_CASE("louvain on two cliques") {
    const auto g = testutil::dense_graph(two_cliques(4, 4, 0.1));
    const auto levels = louvain(g, 3);
    REQUIRE_FALSE(levels.empty());
    CHECK(is_bipartition(levels.back().labels, 4));
    CHECK(louvain(g, 3).back().labels == levels.back().labels);
    for (const auto& l : levels) CHECK(std::fabs(l.modularity - modularity(g, l.labels)) < 1e-12);
}

TEST_CASE("edgeless graph stays singletons") {
    SparseRows g(4);
    const auto levels = louvain(g, 1);
    CHECK(std::set<std::size_t>(levels.back().labels.begin(), levels.back().labels.end()).size() == 4);
    CHECK(levels.back().modularity == 0.0);
}

TEST_CASE("louvain and leiden match brute force on small graphs") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 15; ++t) {
        Dense w(6, std::vector<double>(6, 0.0));
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = i + 1; j < 6; ++j) w[i][j] = w[j][i] = u(rng) < 0.6 ? u(rng) : 0.0;
        const double best = testutil::brute_force_best_modularity(w);
        const auto g = testutil::dense_graph(w);
        CHECK(leiden_multi_seed(g, 10, 7).modularity <= best + 1e-12);
        CHECK(louvain(g, 7).back().modularity <= best + 1e-12);
    }
}

TEST_CASE("consensus affinity") {
    Dense w(6, std::vector<double>(6, 0.0));
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            if (i != j && (i < 3) == (j < 3)) w[i][j] = 1.0;
    const auto g = testutil::dense_graph(w);
    const auto c = consensus_affinity(g, 10, 1);
    for (std::size_t i = 0; i < 6; ++i)
        for (const auto& [j, v] : c.rows[i]) CHECK(v == 1.0);

    const auto one = consensus_affinity(testutil::dense_graph(two_cliques(3, 3, 0.2)), 1, 4);
    const auto top = louvain(testutil::dense_graph(two_cliques(3, 3, 0.2)), run_seed(4, 0)).back().labels;
    for (std::size_t i = 0; i < 6; ++i)
        for (const auto& [j, v] : one.rows[i]) CHECK(v == (top[i] == top[j] ? 1.0 : 0.0));

    const auto a = louvain_consensus_cluster(g, 20, 5, 9);
    CHECK(a.labels == louvain_consensus_cluster(g, 20, 5, 9).labels);
    CHECK(is_bipartition(a.labels, 3));
}

TEST_CASE("leiden") {
    const auto g = testutil::dense_graph(two_cliques(4, 5, 0.1));
    const auto r = leiden(g, 11);
    CHECK(is_bipartition(r.labels, 4));
    CHECK(std::fabs(r.modularity - modularity(g, r.labels)) < 1e-12);

    LeidenOptions opt;
    std::vector<std::size_t> init(9);
    for (std::size_t i = 0; i < 9; ++i) init[i] = i < 4 ? 0 : 1;
    opt.init = init;
    const double q0 = modularity(g, init);
    CHECK(leiden(g, 2, opt).modularity >= q0 - 1e-12);
    CHECK(leiden_multi_seed(g, 5, 3).labels == leiden_multi_seed(g, 5, 3).labels);
}

TEST_CASE("dicluster") {
    Dense clique(6, std::vector<double>(6, 1.0));
    for (std::size_t i = 0; i < 6; ++i) clique[i][i] = 0;
    const auto one = dicluster(testutil::dense_graph(clique), 10, 1);
    CHECK(std::set<std::size_t>(one.labels.begin(), one.labels.end()).size() == 1);

    const auto two = dicluster(testutil::dense_graph(two_cliques(4, 4, 0.05)), 10, 1);
    CHECK(is_bipartition(two.labels, 4));

    Dense pair(2, std::vector<double>(2, 0.0));
    pair[0][1] = pair[1][0] = 1;
    const auto p = dicluster(testutil::dense_graph(pair), 5, 2);
    CHECK(std::set<std::size_t>(p.labels.begin(), p.labels.end()).size() <= 2);
}
