#include <catch2/catch_amalgamated.hpp>

#include "uol/learners.hpp"
#include "uol/processes.hpp"
#include "uol/rng.hpp"

using namespace uol;

TEST_CASE("nearest neighbor basics") {
    NnLearner nn(ValueSpace::countable());
    CHECK(nn.predict(0.7L) == Label::nat(0)); // empty history -> default
    nn.observe(0.0L, Label::nat(5));
    nn.observe(1.0L, Label::nat(9));
    CHECK(nn.predict(0.4L) == Label::nat(5));
    CHECK(nn.predict(0.6L) == Label::nat(9));
    // exact tie goes to the most ancient closest point
    CHECK(nn.predict(0.5L) == Label::nat(5));
    CHECK(*nn.representant(0.5L) == 1);
}

TEST_CASE("nearest neighbor duplicate points keep the earliest label") {
    NnLearner nn(ValueSpace::binary());
    nn.observe(0.3L, Label::bit(1));
    nn.observe(0.3L, Label::bit(0)); // malformed (noiseless model), earliest wins
    CHECK(nn.predict(0.3L) == Label::bit(1));
    CHECK(*nn.representant(0.3L) == 1);
}

TEST_CASE("generic-distance nearest neighbor matches the scalar one") {
    Rng rng(derive_seed(5, "nn-generic"));
    NnLearner scalar(ValueSpace::binary());
    NnGeneric<Point> generic(Label::bit(0), [](const Point& a, const Point& b) {
        return static_cast<double>(a > b ? a - b : b - a);
    });
    for (int t = 0; t < 300; ++t) {
        Point x = static_cast<Point>(rng.uniform(-1.0, 1.0));
        REQUIRE(scalar.predict(x) == generic.predict(x));
        Label y = Label::bit(rng.bernoulli_bit());
        scalar.observe(x, y);
        generic.observe(x, y);
    }
}

TEST_CASE("memorization") {
    MemorizationLearner memo(ValueSpace::countable());
    memo.observe(0.3L, Label::nat(4));
    CHECK(memo.predict(0.3L) == Label::nat(4));
    CHECK(memo.predict(0.30001L) == Label::nat(0)); // no exact match
    memo.observe(0.3L, Label::nat(6));              // conflicting later label
    CHECK(memo.predict(0.3L) == Label::nat(4));     // earliest occurrence
    CHECK(!memo.representant(0.8L).has_value());
    CHECK(*memo.representant(0.3L) == 1);
}

TEST_CASE("oracle learner error schedule") {
    ValueSpace b = ValueSpace::binary();
    TargetFn tgt = TargetFn::threshold(0.5, false);
    auto target = [tgt](Point x) { return tgt(x); };

    OracleLearner perfect(b, target);
    OracleLearner flawed(b, target, {3});
    std::uint64_t wrong_all = 0;
    OracleLearner always(b, target, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    for (std::uint64_t t = 1; t <= 10; ++t) {
        Point x = static_cast<Point>(t) / 20.0L;
        Label truth = tgt(x);
        CHECK(perfect.predict(x) == truth);
        if (t == 3)
            CHECK(flawed.predict(x) == Label::bit(1 - static_cast<int>(truth.as_uint())));
        else
            CHECK(flawed.predict(x) == truth);
        wrong_all += always.predict(x) != truth;
        perfect.observe(x, truth);
        flawed.observe(x, truth);
        always.observe(x, truth);
    }
    CHECK(wrong_all == 10); // average indicator loss 1 under a full schedule
}

TEST_CASE("worst labels maximize the loss") {
    CHECK(worst_label(ValueSpace::binary(), Label::bit(1)) == Label::bit(0));
    CHECK(worst_label(ValueSpace::finite(4), Label::cls(4)) == Label::cls(1));
    CHECK(worst_label(ValueSpace::countable(), Label::nat(7)) == Label::nat(8));
    ValueSpace r = ValueSpace::real_interval(0.0, 1.0);
    CHECK(worst_label(r, Label::real(0.2)) == Label::real(1.0));
    CHECK(worst_label(r, Label::real(0.9)) == Label::real(0.0));
}

TEST_CASE("geometric counterexample: an error at every step") {
    ProcessGen gen = ProcessGen::geometric(-1.0L / 3.0L);
    TargetFn tgt = TargetFn::interval_union({{0.0, 1.0}});
    NnLearner nn(ValueSpace::binary());
    std::uint64_t mistakes = 0;
    const std::uint64_t T = 1000;
    for (std::uint64_t t = 1; t <= T; ++t) {
        Point x = gen.next_input(t);
        Label y = tgt(x);
        bool mistake = nn.predict(x) != y;
        if (t >= 2) REQUIRE(mistake); // the nearest neighbor of X_t is X_{t-1}
        mistakes += mistake;
        nn.observe(x, y);
    }
    double avg = static_cast<double>(mistakes) / static_cast<double>(T);
    CHECK(avg >= 0.998);
    CHECK(avg <= 1.0);
}

TEST_CASE("predictions never use the pending label") {
    ProcessGen gen = ProcessGen::iid_uniform(0.0, 1.0, derive_seed(8, "leak"));
    TargetFn tgt = TargetFn::interval_union({{0.2, 0.6}});
    Trace tr = make_trace(gen, tgt, 60);
    for (std::size_t corrupt : {5u, 30u, 59u}) {
        NnLearner clean(ValueSpace::binary()), dirty(ValueSpace::binary());
        for (std::size_t t = 0; t < corrupt; ++t) {
            REQUIRE(clean.predict(tr.xs[t]) == dirty.predict(tr.xs[t]));
            Label y = tr.ys[t];
            Label yc = t + 1 == corrupt ? Label::bit(1 - static_cast<int>(y.as_uint())) : y;
            clean.observe(tr.xs[t], y);
            dirty.observe(tr.xs[t], yc);
        }
    }
}
