#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "modisco/common.hpp"
#include "modisco/metacluster.hpp"

using namespace modisco;

namespace {

Seqlet with_contrib(const Matrix& c) {
    Seqlet s;
    s.onehot = Matrix(c.rows(), 4);
    s.contrib = {c};
    s.hyp = {c};
    return s;
}

}  // namespace

TEST_CASE("central contribution") {
    CHECK(central_contribution(with_contrib(Matrix(41, 4)), 0, 21) == 0.0);

    Matrix flank(41, 4);
    for (std::size_t r = 0; r < 10; ++r) flank(r, 0) = 1.0;
    for (std::size_t r = 31; r < 41; ++r) flank(r, 2) = -2.0;
    CHECK(central_contribution(with_contrib(flank), 0, 21) == 0.0);

    Matrix core(41, 4);
    for (std::size_t r = 10; r < 31; ++r) core(r, 1) = 0.1;
    CHECK(central_contribution(with_contrib(core), 0, 21) == doctest::Approx(2.1).epsilon(1e-12));
}

TEST_CASE("percentile transform per column") {
    const auto out = percentile_transform({{5}, {-3}, {1}}, false);
    CHECK(out[0][0] == doctest::Approx(1.0));
    CHECK(out[1][0] == doctest::Approx(-2.0 / 3.0));
    CHECK(out[2][0] == doctest::Approx(1.0 / 3.0));

    const auto eq = percentile_transform({{2}, {2}, {2}}, false);
    for (const auto& r : eq) CHECK(r[0] == 1.0);
}

TEST_CASE("pattern compatibility") {
    const std::vector<double> v{0.9, -0.2};
    CHECK(compatible(v, {1, 0}, 0.8));
    CHECK_FALSE(compatible(v, {1, -1}, 0.8));
    CHECK(compatible(v, {0, 0}, 0.8));
    CHECK(enumerate_patterns(2).size() == 9);
}

TEST_CASE("single task positive strong seqlets form one metacluster") {
    std::vector<std::vector<double>> s(200, {0.95});
    MetaclusterOptions o;
    o.strong_threshold = 0.9;
    const auto mcs = metacluster_assign(s, o);
    REQUIRE(mcs.size() == 1);
    CHECK(mcs[0].pattern == ActivityPattern{1});
    CHECK(mcs[0].members.size() == 200);
}

TEST_CASE("fewest zeros wins") {
    std::vector<std::vector<double>> s;
    for (int i = 0; i < 100; ++i) s.push_back({0.95, 0.95});
    s.push_back({0.95, 0.95});
    MetaclusterOptions o;
    o.strong_threshold = 0.9;
    o.min_size = 50;
    const auto mcs = metacluster_assign(s, o);
    REQUIRE(mcs.size() == 1);
    CHECK(mcs[0].pattern == ActivityPattern{1, 1});
}

TEST_CASE("task-specific seqlets land in their specific pattern") {
    std::vector<std::vector<double>> s;
    for (int i = 0; i < 100; ++i) s.push_back({0.97, 0.1});
    for (int i = 0; i < 100; ++i) s.push_back({0.05, 0.96});
    MetaclusterOptions o;
    o.strong_threshold = 0.9;
    o.min_size = 50;
    const auto mcs = metacluster_assign(s, o);
    REQUIRE(mcs.size() == 2);
    for (const auto& mc : mcs) {
        CHECK(mc.members.size() == 100);
        if (mc.pattern == ActivityPattern{1, 0}) CHECK(mc.members.front() == 0);
        else CHECK(mc.pattern == ActivityPattern{0, 1});
    }
}

TEST_CASE("too many tasks is a configuration error") {
    std::vector<std::vector<double>> s(3, std::vector<double>(11, 0.9));
    MetaclusterOptions o;
    CHECK_THROWS_AS(metacluster_assign(s, o), ConfigError);
}

TEST_CASE("cap keeps the strongest members") {
    std::vector<std::vector<double>> s;
    for (int i = 0; i < 10; ++i) s.push_back({0.9 + 0.01 * i});
    MetaclusterOptions o;
    o.strong_threshold = 0.85;
    o.min_size = 1;
    o.max_per_metacluster = 3;
    const auto mcs = metacluster_assign(s, o);
    REQUIRE(mcs.size() == 1);
    CHECK(mcs[0].members == std::vector<std::size_t>{7, 8, 9});
}
