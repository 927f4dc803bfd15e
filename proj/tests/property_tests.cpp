#include "doctest.h"
#include "properties.hpp"

constexpr std::size_t kCases = 1000;

TEST_CASE("continuous jaccard: bounds, symmetry, scale invariance") {
    CHECK(props::cj_bounds_symmetry_scale(kCases, 101) == 0);
}

TEST_CASE("percentile transform: rank invariance") { CHECK(props::ecdf_rank_invariance(kCases, 202) == 0); }

TEST_CASE("dataset: save/load/save is byte identical") { CHECK(props::dataset_round_trip(kCases, 303) == 0); }

TEST_CASE("dicluster: at most two labels") { CHECK(props::dicluster_at_most_two(kCases, 404) == 0); }

TEST_CASE("iterative merge: no similar pair survives unblocked") {
    CHECK(props::merge_leaves_no_similar_pair(kCases, 505) == 0);
}
