#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "modisco/aggregation.hpp"

using namespace modisco;

namespace {

Seqlet unit_seqlet(double v) {
    Seqlet s;
    s.onehot = Matrix(1, 4);
    s.onehot(0, 0) = 1;
    s.contrib = {Matrix(1, 4)};
    s.contrib[0](0, 0) = v;
    s.hyp = s.contrib;
    return s;
}

// Members of length 1 at the given offsets: the center histogram is the
// offset histogram.
Motif histogram_motif(const std::vector<std::size_t>& counts) {
    std::vector<MotifMember> ms;
    for (std::size_t p = 0; p < counts.size(); ++p)
        for (std::size_t k = 0; k < counts[p]; ++k) ms.push_back({unit_seqlet(1.0), static_cast<long>(p)});
    return make_motif(std::move(ms));
}

}  // namespace

TEST_CASE("identical seqlets aggregate to themselves") {
    std::mt19937_64 rng(1);
    const Dataset ds = testutil::random_dataset(rng, 1, 40);
    const Seqlet s = *slice_seqlet(ds, {0, 5, 25, false});
    const Motif m = aggregate_cluster({s, s, s}, {0}, 0.7, true, 10);
    CHECK(m.length == 20);
    for (std::size_t r = 0; r < 20; ++r)
        for (std::size_t b = 0; b < 4; ++b) CHECK(m.contrib[0](r, b) == doctest::Approx(s.contrib[0](r, b)));

    const Motif one = aggregate_cluster({s}, {0}, 0.7, true, 10);
    CHECK(one.members.size() == 1);
    CHECK(one.contrib[0] == s.contrib[0]);
}

TEST_CASE("shifted copy is aligned by its offset") {
    std::mt19937_64 rng(2);
    const Dataset ds = testutil::random_dataset(rng, 1, 60);
    const Seqlet a = *slice_seqlet(ds, {0, 10, 30, false});
    const Seqlet b = *slice_seqlet(ds, {0, 12, 32, false});
    const Motif m = aggregate_cluster({a, b}, {0}, 0.7, false, 20);
    CHECK(m.length == 22);
    long oa = -1, ob = -1;
    for (const auto& mem : m.members) (mem.seqlet.coord.start == 10 ? oa : ob) = mem.offset;
    CHECK(ob - oa == 2);
}

TEST_CASE("trim to support") {
    const Motif m = histogram_motif({1, 5, 10, 5, 1});
    CHECK(center_histogram(m) == std::vector<std::size_t>{1, 5, 10, 5, 1});
    const Motif t = trim_to_support(m, 0.2, 2);
    CHECK(t.members.size() == 20);
    CHECK(center_histogram(t) == std::vector<std::size_t>{5, 10, 5});
    CHECK_FALSE(t.flagged);

    const Motif flat = histogram_motif({4, 4, 4});
    CHECK(trim_to_support(flat, 0.2, 2).members.size() == 12);

    // 30 > 0.2 * 10: nothing passes, only the peak position survives
    const Motif low = trim_to_support(m, 0.2, 30);
    CHECK(low.flagged);
    CHECK(low.members.size() == 10);
    CHECK(low.length <= m.length);
}

TEST_CASE("expand to fill") {
    std::mt19937_64 rng(3);
    const Dataset ds = testutil::random_dataset(rng, 2, 50);
    MotifMember full{*slice_seqlet(ds, {0, 10, 30, false}), 0};
    MotifMember shorter{*slice_seqlet(ds, {1, 15, 30, false}), 5};
    Motif m = make_motif({full, shorter});
    REQUIRE(m.length == 20);
    const Motif e = expand_to_fill(m, ds);
    REQUIRE(e.members.size() == 2);
    CHECK(e.members[0].seqlet.coord == full.seqlet.coord);
    CHECK(e.members[1].seqlet.coord == SeqletCoord{1, 10, 30, false});
    CHECK(e.members[1].seqlet.contrib[0] == slice_seqlet(ds, {1, 10, 30, false})->contrib[0]);

    MotifMember edge{*slice_seqlet(ds, {1, 0, 15, false}), 5};
    const Motif dropped = expand_to_fill(make_motif({full, edge}), ds);
    CHECK(dropped.members.size() == 1);

    // reverse strand member: left in motif space is right in the source
    MotifMember rc{*slice_seqlet(ds, {1, 20, 35, true}), 5};
    const Motif er = expand_to_fill(make_motif({full, rc}), ds);
    REQUIRE(er.members.size() == 2);
    CHECK(er.members[1].seqlet.coord == SeqletCoord{1, 20, 40, true});
}

TEST_CASE("flip member keeps the placement consistent") {
    std::mt19937_64 rng(4);
    const Dataset ds = testutil::random_dataset(rng, 1, 40);
    MotifMember m{*slice_seqlet(ds, {0, 3, 13, false}), 4};
    const auto f = flip_member(m, 20);
    CHECK(f.offset == 6);
    CHECK(f.seqlet.coord.revcomp);
    const auto back = reslice_member(f, ds, 6, 16);
    REQUIRE(back.has_value());
    CHECK(back->seqlet.coord == f.seqlet.coord);
}

TEST_CASE("centering and standardising") {
    std::mt19937_64 rng(5);
    Dataset ds = testutil::random_dataset(rng, 3, 80);
    // strong central block at positions 30..39 of every sequence
    for (auto& rec : ds.sequences)
        for (std::size_t i = 0; i < 80; ++i)
            for (std::size_t b = 0; b < 4; ++b) {
                const float scale = (i >= 30 && i < 40) ? 1.0f : 0.01f;
                rec.tasks[0].hyp[i * 4 + b] *= scale;
                rec.tasks[0].contrib[i * 4 + b] *= scale;
            }
    std::vector<MotifMember> ms;
    for (std::size_t s = 0; s < 3; ++s) ms.push_back({*slice_seqlet(ds, {s, 20, 50, false}), 0});
    const Motif m = make_motif(ms);
    CHECK(best_window_start(m, {0}, 10) == 10);
    const Motif c = center_and_standardize(m, ds, {0}, 10, 5);
    CHECK(c.length == 20);
    CHECK(c.members[0].seqlet.coord.start == 25);
    CHECK(center_and_standardize(m, ds, {0}, 10, 0).length == 10);

    std::vector<MotifMember> shorter;
    for (std::size_t s = 0; s < 3; ++s) shorter.push_back({*slice_seqlet(ds, {s, 25, 45, false}), 0});
    CHECK(center_and_standardize(make_motif(shorter), ds, {0}, 10, 5).length == 20);
}

TEST_CASE("sign consistency") {
    const Motif pos = make_motif({{unit_seqlet(2.0), 0}});
    const Motif neg = make_motif({{unit_seqlet(-2.0), 0}, {unit_seqlet(1.0), 1}});
    const Motif zero = make_motif({{unit_seqlet(0.0), 0}});
    CHECK(sign_consistent(pos, {1}));
    CHECK_FALSE(sign_consistent(neg, {1}));
    CHECK_FALSE(sign_consistent(zero, {1}));
    CHECK(sign_consistency_filter({pos, neg, zero}, {1}).size() == 1);
}

TEST_CASE("recluster rounds") {
    const Motif m = make_motif({{unit_seqlet(1.0), 0}, {unit_seqlet(2.0), 0}});
    int calls = 0;
    auto fn = [&](const std::vector<Seqlet>& pooled) {
        ++calls;
        CHECK(pooled.size() == 2);
        std::vector<MotifMember> ms;
        for (const auto& s : pooled) ms.push_back({s, 0});
        return std::vector<Motif>{make_motif(ms)};
    };
    CHECK(recluster_rounds({m}, 0, fn).front().members.size() == 2);
    CHECK(calls == 0);
    recluster_rounds({m}, 2, fn);
    CHECK(calls == 2);
}
