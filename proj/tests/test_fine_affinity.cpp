#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "modisco/fine_affinity.hpp"

using namespace modisco;

TEST_CASE("intersection and union terms") {
    CHECK(intersect_union(3, -2) == std::pair<double, double>{-2, 3});
    CHECK(intersect_union(-1.5, -1.5) == std::pair<double, double>{1.5, 1.5});
    CHECK(intersect_union(0, 5) == std::pair<double, double>{0, 5});
}

TEST_CASE("continuous jaccard toy values") {
    const std::vector<double> a{-1, -1, -2, 4, -1, -1, -1}, b{0, 0, 0, 4, 0, 0, 0}, c{-1, -1, -2, 0, -1, -1, -1};
    CHECK(std::fabs(continuous_jaccard(a, b) - 4.0 / 11.0) < 1e-12);
    CHECK(std::fabs(continuous_jaccard(a, c) - 7.0 / 11.0) < 1e-12);
    std::vector<double> neg(a);
    for (auto& v : neg) v = -v;
    CHECK(continuous_jaccard(a, a) == 1.0);
    CHECK(continuous_jaccard(a, neg) == -1.0);
}

TEST_CASE("feature matrices are l1 normalised per block") {
    Matrix c(3, 4), h(3, 4);
    c(0, 0) = 2;
    c(2, 3) = -2;
    h(1, 1) = 5;
    const Matrix f = build_feature_matrix({h}, {c}, {0});
    CHECK(f.cols() == 8);
    CHECK(abs_sum(column_block(f, 4, 4)) == doctest::Approx(1.0));
    CHECK(abs_sum(column_block(f, 0, 4)) == doctest::Approx(1.0));
    Matrix c10 = c, h10 = h;
    c10 *= 10;
    h10 *= 10;
    CHECK(build_feature_matrix({h10}, {c10}, {0}) == f);
    const Matrix zero_h = build_feature_matrix({Matrix(3, 4)}, {c}, {0});
    CHECK(abs_sum(column_block(zero_h, 0, 4)) == 0.0);
}

TEST_CASE("alignment search") {
    std::mt19937_64 rng(4);
    const Matrix s = testutil::random_matrix(rng, 8, 4);
    const auto self = best_alignment_cj(s, s, 0.5, true);
    CHECK(self.similarity == doctest::Approx(1.0));
    CHECK(self.offset == 0);
    CHECK_FALSE(self.revcomp);

    CHECK(required_overlap(5, 5, 0.7) == 4);

    // The shifted copy: row j of t equals row j+1 of s, zero filled at the end.
    Matrix t(8, 4);
    for (std::size_t r = 0; r + 1 < 8; ++r)
        for (std::size_t b = 0; b < 4; ++b) t(r, b) = s(r + 1, b);
    const auto shifted = best_alignment_cj(s, t, 0.5, false);
    CHECK(shifted.offset == 1);
    const double lost = [&] {
        double a = 0;
        for (std::size_t b = 0; b < 4; ++b) a += std::fabs(s(0, b));
        return a;
    }();
    CHECK(shifted.similarity == doctest::Approx((abs_sum(s) - lost) / abs_sum(s)));

    // Padded overlap agrees with the definition on explicit zero padding.
    for (long o = -2; o <= 2; ++o) {
        std::vector<double> a, b;
        for (long i = std::min(0L, o); i < std::max(8L, 8 + o); ++i)
            for (std::size_t k = 0; k < 4; ++k) {
                a.push_back(i >= 0 && i < 8 ? s(static_cast<std::size_t>(i), k) : 0.0);
                const long j = i - o;
                b.push_back(j >= 0 && j < 8 ? t(static_cast<std::size_t>(j), k) : 0.0);
            }
        CHECK(cj_at_offset(s, t, o) == doctest::Approx(testutil::cj_oracle(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("admissible offsets honour the overlap floor") {
    // Only offsets -1, 0, 1 are admissible for L=5 at 0.7; a strong match at
    // offset 2 must not be found.
    Matrix a(5, 1), b(5, 1);
    a(4, 0) = 1;
    b(0, 0) = 1;
    a(0, 0) = 0.1;
    b(4, 0) = -0.1;
    const auto r = best_alignment_cj(a, b, 0.7, false);
    CHECK(std::labs(r.offset) <= 1);
}

TEST_CASE("fine affinity matrix against brute force") {
    std::mt19937_64 rng(5);
    std::vector<Matrix> f;
    for (int i = 0; i < 10; ++i) f.push_back(testutil::random_matrix(rng, 7, 8));
    f.push_back(f[0]);
    std::vector<std::vector<std::size_t>> nbrs(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = 0; j < f.size(); ++j)
            if (i != j) nbrs[i].push_back(j);
    const auto m = fine_affmat(f, nbrs, 0.7, true);
    for (std::size_t i = 0; i < f.size(); ++i) {
        REQUIRE(m.rows[i].size() == f.size() - 1);
        for (const auto& [j, v] : m.rows[i]) CHECK(v == doctest::Approx(best_alignment_cj(f[i], f[j], 0.7, true).similarity));
    }
    double dup = 0;
    for (const auto& [j, v] : m.rows[0])
        if (j == 10) dup = v;
    CHECK(dup == doctest::Approx(1.0));
}

TEST_CASE("spearman") {
    const std::vector<double> x{1, 2, 3}, y{3, 1, 2}, r{3, 2, 1};
    CHECK(spearman_rho(x, x) == doctest::Approx(1.0));
    CHECK(spearman_rho(x, y) == doctest::Approx(-0.5));
    CHECK(spearman_rho(x, r) == doctest::Approx(-1.0));
    const std::vector<double> c{2, 2, 2};
    CHECK(spearman_rho(x, c) == 0.0);
    CHECK(average_ranks(std::vector<double>{5, 1, 5}) == std::vector<double>{2.5, 1, 2.5});
}

TEST_CASE("noise filter") {
    const std::vector<std::vector<double>> coarse{{0.9, 0.5, 0.1}, {0.8, 0.3, 0.2}};
    auto fine = coarse;
    CHECK(noise_filter(coarse, fine, 0.15).size() == 2);
    fine[1] = {0.1, 0.5, 0.9};
    CHECK(noise_filter(coarse, fine, 0.15) == std::vector<std::size_t>{0});
    CHECK(noise_filter(coarse, fine, -1.0).size() == 2);
}

TEST_CASE("randomised fine row is the one most often dropped") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<std::size_t> drops(20, 0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> coarse(20), fine(20);
        for (std::size_t i = 0; i < 20; ++i)
            for (int k = 0; k < 15; ++k) {
                const double c = u(rng);
                coarse[i].push_back(c);
                fine[i].push_back(i == 7 ? u(rng) : c + 0.1 * u(rng));
            }
        const auto keep = noise_filter(coarse, fine, 0.15);
        std::vector<char> kept(20, 0);
        for (auto k : keep) kept[k] = 1;
        for (std::size_t i = 0; i < 20; ++i) drops[i] += kept[i] ? 0 : 1;
    }
    CHECK(std::max_element(drops.begin(), drops.end()) - drops.begin() == 7);
}
