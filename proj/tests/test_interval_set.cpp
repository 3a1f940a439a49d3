#include <catch2/catch_amalgamated.hpp>

#include "uol/interval_set.hpp"
#include "uol/rng.hpp"

using uol::IntervalSet;

TEST_CASE("interval basics") {
    IntervalSet s = IntervalSet::open(0.0, 1.0);
    CHECK(!s.empty());
    CHECK(s.contains(0.5));
    CHECK(!s.contains(0.0));
    CHECK(!s.contains(1.0));
    CHECK(IntervalSet::closed(0.0, 1.0).contains(0.0));
    CHECK(IntervalSet::point(0.25).contains(0.25));
    CHECK(IntervalSet::interval(1.0, 0.0, true, true).empty());
    CHECK(IntervalSet::interval(0.5, 0.5, true, false).empty()); // half-open point
}

TEST_CASE("intersection endpoint closures") {
    auto a = IntervalSet::interval(0.0, 0.75, true, false);  // [0, 0.75)
    auto b = IntervalSet::interval(0.25, 1.0, false, true);  // (0.25, 1]
    auto c = a.intersect(b);
    CHECK(c.contains(0.5));
    CHECK(!c.contains(0.25));
    CHECK(!c.contains(0.75));
    CHECK(c.intersect(IntervalSet::point(0.3)).contains(0.3));
}

TEST_CASE("subtraction leaves singletons") {
    // [0, 0.75) \ (0, 1) == {0}
    auto a = IntervalSet::interval(0.0, 0.75, true, false);
    auto d = a.subtract(IntervalSet::open(0.0, 1.0));
    REQUIRE(!d.empty());
    CHECK(d.contains(0.0));
    CHECK(!d.contains(0.375));
    auto w = d.any_point();
    REQUIRE(w.has_value());
    CHECK(*w == 0.0);
}

TEST_CASE("subtract splits in the middle") {
    auto a = IntervalSet::closed(0.0, 1.0);
    auto d = a.subtract(IntervalSet::open(0.25, 0.75));
    CHECK(d.contains(0.25));
    CHECK(d.contains(0.75));
    CHECK(!d.contains(0.5));
    CHECK(d.contains(0.0));
    CHECK(d.contains(1.0));
}

TEST_CASE("union merges touching pieces") {
    auto u = IntervalSet::interval(0.0, 0.5, true, false)
                 .unite(IntervalSet::interval(0.5, 1.0, true, true));
    CHECK(u.parts().size() == 1);
    CHECK(u.contains(0.5));
    auto v = IntervalSet::open(0.0, 0.5).unite(IntervalSet::open(0.5, 1.0));
    CHECK(v.parts().size() == 2); // 0.5 missing, no merge
    CHECK(!v.contains(0.5));
}

TEST_CASE("set algebra agrees with pointwise evaluation") {
    uol::Rng rng(uol::derive_seed(77, "intervals"));
    for (int n = 0; n < 500; ++n) {
        auto rand_set = [&rng]() {
            IntervalSet s;
            int pieces = 1 + static_cast<int>(rng.next_u64() % 3);
            for (int i = 0; i < pieces; ++i) {
                double a = std::floor(rng.uniform(-2.0, 2.0) * 64.0) / 64.0;
                double b = a + std::floor(rng.uniform(0.0, 1.0) * 64.0) / 64.0;
                s = s.unite(IntervalSet::interval(a, b, rng.bernoulli_bit(), rng.bernoulli_bit()));
            }
            return s;
        };
        IntervalSet a = rand_set(), b = rand_set();
        IntervalSet inter = a.intersect(b), diff = a.subtract(b), uni = a.unite(b);
        for (double x = -2.0; x <= 3.0; x += 1.0 / 128.0) {
            bool ia = a.contains(x), ib = b.contains(x);
            REQUIRE(inter.contains(x) == (ia && ib));
            REQUIRE(diff.contains(x) == (ia && !ib));
            REQUIRE(uni.contains(x) == (ia || ib));
        }
        if (!diff.empty()) {
            auto w = diff.any_point();
            REQUIRE(w.has_value());
            REQUIRE(diff.contains(*w));
        }
    }
}
