#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "modisco/coarse_affinity.hpp"

using namespace modisco;

namespace {

Seqlet seqlet_from(const std::string& seq, const std::vector<Matrix>& hyp) {
    Seqlet s;
    s.onehot = testutil::onehot(seq);
    s.hyp = hyp;
    s.contrib = hyp;
    return s;
}

std::string random_seq(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> b(0, 3);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += "ACGT"[b(rng)];
    return s;
}

}  // namespace

TEST_CASE("summed hypothetical track") {
    std::mt19937_64 rng(1);
    const Matrix h = testutil::random_matrix(rng, 6, 4);
    Matrix neg = h;
    neg *= -1.0;
    const Seqlet one = seqlet_from("ACGTAC", {h});
    CHECK(summed_hyp_track(one, {1}) == h);
    CHECK(summed_hyp_track(one, {-1}) == neg);
    const Seqlet two = seqlet_from("ACGTAC", {h, neg});
    Matrix twice = h;
    twice *= 2.0;
    CHECK(summed_hyp_track(two, {1, -1}) == twice);
    CHECK_THROWS(summed_hyp_track(one, {0}));
}

TEST_CASE("ungapped dimers by hand") {
    const GappedKmerSpace space({2, 0, 0});
    CHECK(space.dimension() == 16);
    const Matrix oh = testutil::onehot("ACAC");
    const auto e = space.embed(oh, oh);
    CHECK(e[space.id("AC")] == 4.0);
    CHECK(e[space.id("CA")] == 2.0);
    double total = 0;
    for (double v : e) total += v;
    CHECK(total == 6.0);
    CHECK(space.name(space.id("GT")) == "GT");
}

TEST_CASE("default space layout") {
    const GappedKmerSpace space({8, 3, 2});
    CHECK(space.dimension() == 20 * 1024);
    const std::size_t id = space.id("AC..G.TA");
    CHECK(space.name(id) == "AC..G.TA");
    CHECK(space.name(space.reverse_complement_id(id)) == "TA.C..GT");
    for (std::size_t i = 0; i < space.dimension(); i += 97)
        CHECK(space.reverse_complement_id(space.reverse_complement_id(i)) == i);
}

TEST_CASE("mismatch scoring drops the mismatched position") {
    const GappedKmerSpace space({3, 0, 1});
    const Matrix oh = testutil::onehot("ACG");
    Matrix track(3, 4);
    track(0, 0) = 1;
    track(1, 1) = 2;
    track(2, 2) = 4;
    const auto e = space.embed(oh, track);
    CHECK(e[space.id("ACG")] == 7.0);
    CHECK(e[space.id("TCG")] == 6.0);
    CHECK(e[space.id("AAG")] == 5.0);
    CHECK(e[space.id("ACA")] == 3.0);
    CHECK(e[space.id("TTG")] == 0.0);
}

TEST_CASE("zero track embeds to zero") {
    const GappedKmerSpace space({4, 1, 1});
    const auto e = space.embed(testutil::onehot("ACGTACGT"), Matrix(8, 4));
    for (double v : e) CHECK(v == 0.0);
}

TEST_CASE("reverse complement bijection on embeddings") {
    std::mt19937_64 rng(2);
    const GappedKmerSpace space({4, 1, 1});
    const std::string seq = random_seq(rng, 12);
    const Matrix oh = testutil::onehot(seq);
    const Matrix track = testutil::random_matrix(rng, 12, 4);
    const auto fwd = space.embed(oh, track);
    const auto rev = space.embed(reverse_complement(oh), reverse_complement(track));
    for (std::size_t i = 0; i < space.dimension(); ++i)
        CHECK(rev[space.reverse_complement_id(i)] == doctest::Approx(fwd[i]).epsilon(1e-12));
}

TEST_CASE("cosine affinity") {
    const std::vector<double> a{1, 2}, b{2, 1}, z{0, 0}, c{0, 3}, d{3, 0};
    CHECK(cosine_affinity(a, a) == doctest::Approx(1.0));
    CHECK(cosine_affinity(a, b) == doctest::Approx(0.8));
    CHECK(cosine_affinity(c, d) == 0.0);
    CHECK(cosine_affinity(a, z) == 0.0);
}

TEST_CASE("coarse affinity matrix and neighbours") {
    std::mt19937_64 rng(3);
    const std::string seq = random_seq(rng, 20);
    const Matrix h = testutil::random_matrix(rng, 20, 4);
    const Seqlet s = seqlet_from(seq, {h});

    SUBCASE("identical seqlets") {
        const auto r = coarse_affmat_and_neighbors({s, s, s}, {}, {1}, 500, true, true);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(r.neighbors[i].size() == 2);
            for (std::size_t j = 0; j < 3; ++j)
                if (i != j) CHECK(r.affinity(i, j) == doctest::Approx(1.0).epsilon(1e-5));
        }
    }
    SUBCASE("reverse complement partner") {
        Seqlet rc;
        rc.onehot = reverse_complement(s.onehot);
        rc.hyp = {reverse_complement(h)};
        rc.contrib = rc.hyp;
        const auto other = seqlet_from(random_seq(rng, 20), {testutil::random_matrix(rng, 20, 4)});
        const auto r = coarse_affmat_and_neighbors({s, rc, other}, {}, {1}, 1, true, true);
        CHECK(r.affinity(0, 1) == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(r.neighbors[0] == std::vector<std::size_t>{1});
        const auto fwd_only = coarse_affmat_and_neighbors({s, rc}, {}, {1}, 1, false, true);
        CHECK(fwd_only.affinity(0, 1) < 0.9);
    }
    SUBCASE("matches direct cosine") {
        std::vector<Seqlet> ss;
        for (int i = 0; i < 6; ++i) ss.push_back(seqlet_from(random_seq(rng, 15), {testutil::random_matrix(rng, 15, 4)}));
        const auto r = coarse_affmat_and_neighbors(ss, {}, {1}, 500, false, true);
        const GappedKmerSpace space(GappedKmerSpec{});
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = i + 1; j < 6; ++j) {
                const double want = cosine_affinity(space.embed(ss[i].onehot, ss[i].hyp[0]),
                                                    space.embed(ss[j].onehot, ss[j].hyp[0]));
                CHECK(r.affinity(i, j) == doctest::Approx(want).epsilon(1e-4));
            }
    }
}
