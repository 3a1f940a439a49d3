#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "uol/learners.hpp"
#include "uol/processes.hpp"
#include "uol/reductions.hpp"
#include "uol/rng.hpp"

using namespace uol;

namespace {

/// Always predicts the same bit; ignores everything it observes.
class ConstLearner final : public OnlineLearner {
public:
    explicit ConstLearner(int bit) : bit_(bit) {}
    Label predict(Point) override { return Label::bit(bit_); }
    void observe(Point, const Label&) override {}
    std::unique_ptr<OnlineLearner> clone() const override {
        return std::make_unique<ConstLearner>(*this);
    }

private:
    int bit_;
};

LearnerFactory nn_binary() {
    return []() -> std::unique_ptr<OnlineLearner> {
        return std::make_unique<NnLearner>(ValueSpace::binary());
    };
}

Trace nat_trace(std::uint64_t seed, std::size_t T, std::uint64_t labels) {
    ProcessGen gen = ProcessGen::iid_uniform(0.0, 1.0, seed);
    std::vector<double> bps;
    std::vector<Label> ys;
    for (std::uint64_t j = 0; j < labels; ++j) {
        if (j > 0) bps.push_back(static_cast<double>(j) / static_cast<double>(labels));
        ys.push_back(Label::nat(1 + (j * 3) % labels));
    }
    TargetFn tgt = TargetFn::quantized_step(bps, ys);
    return make_trace(gen, tgt, T);
}

/// External re-derivation of the exact p value: rebuild a fresh base learner
/// for every subset assignment of the observed labels from the raw history.
double p_by_replay(const std::vector<Point>& xs, const std::vector<std::uint64_t>& ys, Point x,
                   std::uint64_t i) {
    std::map<std::uint64_t, std::size_t> pos;
    for (std::uint64_t y : ys)
        if (!pos.count(y)) pos.emplace(y, pos.size());
    std::size_t m = pos.size();
    double acc = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
        NnLearner nn(ValueSpace::binary());
        for (std::size_t s = 0; s < xs.size(); ++s)
            nn.observe(xs[s], Label::bit(static_cast<int>((mask >> pos.at(ys[s])) & 1)));
        int pred = static_cast<int>(nn.predict(x).as_uint());
        auto it = pos.find(i);
        if (it != pos.end())
            acc += pred == static_cast<int>((mask >> it->second) & 1) ? 1.0 : 0.0;
        else
            acc += 0.5;
    }
    return acc / static_cast<double>(std::size_t{1} << m);
}

} // namespace

TEST_CASE("general-to-binary decoding") {
    ValueSpace r = ValueSpace::real_interval(0.0, 1.0);
    auto make = [&](double constant) {
        // memorization never sees the probe point, so it predicts the default;
        // use an oracle pinned to a constant instead
        return std::make_unique<OracleLearner>(
            r, [constant](Point) { return Label::real(constant); });
    };
    GeneralToBinary at0(r, make(0.0), Label::real(0.0), Label::real(1.0));
    CHECK(at0.predict(0.1L) == Label::bit(0));
    GeneralToBinary at1(r, make(1.0), Label::real(0.0), Label::real(1.0));
    CHECK(at1.predict(0.1L) == Label::bit(1));
    GeneralToBinary mid(r, make(0.5), Label::real(0.0), Label::real(1.0));
    CHECK(mid.predict(0.1L) == Label::bit(0)); // tie broken to 0

    CHECK_THROWS_AS(GeneralToBinary(r, make(0.5), Label::real(0.3), Label::real(0.3)),
                    std::invalid_argument);
    CHECK_THROWS_AS(at0.observe(0.1L, Label::real(0.5)), std::invalid_argument);
}

TEST_CASE("general-to-binary trains the base on mapped anchors") {
    ValueSpace r = ValueSpace::real_interval(0.0, 1.0);
    GeneralToBinary wrap(r, std::make_unique<NnLearner>(r), Label::real(0.1), Label::real(0.9));
    TargetFn tgt = TargetFn::threshold(0.5, false);
    ProcessGen gen = ProcessGen::iid_uniform(0.0, 1.0, derive_seed(21, "g2b"));
    std::uint64_t late_mistakes = 0;
    for (std::uint64_t t = 1; t <= 400; ++t) {
        Point x = gen.next_input(t);
        Label y = tgt(x);
        Label pred = wrap.predict(x);
        if (t > 300) late_mistakes += pred != y;
        wrap.observe(x, y);
    }
    CHECK(late_mistakes <= 5); // learns the threshold through the mapping
}

TEST_CASE("binary-to-finite-k argmax and ties") {
    int calls = 0;
    auto factory = [&calls]() -> std::unique_ptr<OnlineLearner> {
        ++calls;
        return std::make_unique<ConstLearner>(calls == 3 ? 1 : 0);
    };
    BinaryToFiniteK wrap(factory, 4);
    CHECK(wrap.predict(0.5L) == Label::cls(3)); // replica 3 alone predicts 1

    auto zeros = []() -> std::unique_ptr<OnlineLearner> { return std::make_unique<ConstLearner>(0); };
    BinaryToFiniteK all_zero(zeros, 4);
    CHECK(all_zero.predict(0.5L) == Label::cls(1)); // argmax tie -> smallest class

    CHECK_THROWS_AS(BinaryToFiniteK(zeros, 1), std::invalid_argument);
    CHECK_THROWS_AS(all_zero.observe(0.5L, Label::nat(2)), std::invalid_argument);
    CHECK_THROWS_AS(all_zero.observe(0.5L, Label::cls(5)), std::invalid_argument);
}

TEST_CASE("binary-to-finite-k union bound on a seeded trace") {
    ProcessGen gen = ProcessGen::iid_uniform(0.0, 1.0, derive_seed(31, "b2k"));
    TargetFn tgt = TargetFn::quantized_step(
        {0.25, 0.5, 0.75}, {Label::cls(1), Label::cls(2), Label::cls(3), Label::cls(4)});
    BinaryToFiniteK wrap(nn_binary(), 4);
    for (std::uint64_t t = 1; t <= 600; ++t) {
        Point x = gen.next_input(t);
        Label y = tgt(x);
        Label pred = wrap.predict(x);
        std::uint64_t replica_mistakes = 0;
        const auto& bits = wrap.last_replica_bits();
        for (std::uint64_t i = 0; i < 4; ++i)
            replica_mistakes += bits[i] != (y.as_uint() == i + 1 ? 1 : 0);
        REQUIRE(static_cast<std::uint64_t>(pred != y) <= replica_mistakes);
        wrap.observe(x, y);
    }
}

TEST_CASE("stack p-values against full replay enumeration") {
    Trace tr = nat_trace(derive_seed(41, "replay"), 60, 5);
    BinaryToCountable stack(BaseRule::honest(nn_binary()), {});
    for (std::size_t t = 0; t < tr.size(); ++t) {
        if (t % 7 == 0) {
            std::vector<std::uint64_t> probes = {1, 2, 3, 4, 5, 23};
            for (std::uint64_t i : probes) {
                double direct = stack.compute_p_exact(tr.xs[t], i);
                double replay = p_by_replay(stack.history_inputs(), stack.history_labels(),
                                            tr.xs[t], i);
                REQUIRE(direct == replay);
            }
        }
        stack.observe(tr.xs[t], tr.ys[t]);
    }
    CHECK(stack.replica_count() == (std::size_t{1} << stack.distinct_labels()));
}

TEST_CASE("constant-zero base gives p = 1/2 everywhere") {
    auto zeros = []() -> std::unique_ptr<OnlineLearner> { return std::make_unique<ConstLearner>(0); };
    BinaryToCountable stack(BaseRule::honest(zeros), {});
    CHECK(stack.compute_p_exact(0.5L, 3) == 0.5); // empty history
    CHECK(stack.predict_nat(0.5L) == 0);
    stack.observe(0.5L, Label::nat(3));
    stack.observe(0.6L, Label::nat(4));
    CHECK(stack.compute_p_exact(0.7L, 3) == 0.5);
    CHECK(stack.compute_p_exact(0.7L, 4) == 0.5);
    CHECK(stack.predict_nat(0.7L) == 0);
}

TEST_CASE("perfect oracle base discriminates exactly") {
    Trace tr = nat_trace(derive_seed(43, "oracle"), 80, 6);
    std::map<long long, std::uint64_t> lookup;
    for (std::size_t t = 0; t < tr.size(); ++t)
        lookup[static_cast<long long>(tr.xs[t] * 1e9L)] = tr.ys[t].as_uint();
    auto target = [lookup](Point x) { return lookup.at(static_cast<long long>(x * 1e9L)); };
    BinaryToCountable stack(BaseRule::oracle(target), {});
    for (std::size_t t = 0; t < tr.size(); ++t) {
        std::uint64_t truth = tr.ys[t].as_uint();
        REQUIRE(stack.compute_p_exact(tr.xs[t], truth) == 1.0);
        for (std::uint64_t i : stack.observed_labels())
            if (i != truth) REQUIRE(stack.compute_p_exact(tr.xs[t], i) == 0.5);
        REQUIRE(stack.predict_nat(tr.xs[t]) == truth);
        stack.observe(tr.xs[t], tr.ys[t]);
    }
}

TEST_CASE("Monte Carlo estimator") {
    auto target = [](Point x) { return static_cast<std::uint64_t>(x); };
    BinaryToCountable::Options mco;
    mco.mode = StackMode::MonteCarlo;
    mco.mc_replicas = 10000;
    mco.seed = 4242;

    BinaryToCountable stack(BaseRule::oracle(target), mco);
    for (std::uint64_t t = 1; t <= 12; ++t) {
        Point x = static_cast<Point>(1 + (t - 1) % 4);
        std::uint64_t truth = target(x);
        REQUIRE(stack.compute_p_mc(x, truth) == 1.0); // every replica matches its own coin
        stack.observe(x, Label::nat(truth));
    }
    // wrong hypotheses estimate 1/2 within 3 binomial sigmas (~0.015)
    for (std::uint64_t i = 1; i <= 4; ++i) {
        if (i == target(1.0L)) continue;
        double p = stack.compute_p_mc(1.0L, i);
        CHECK(std::fabs(p - 0.5) <= 0.015);
    }

    BinaryToCountable::Options one;
    one.mode = StackMode::MonteCarlo;
    one.mc_replicas = 1;
    one.seed = 7;
    BinaryToCountable tiny(BaseRule::oracle(target), one);
    tiny.observe(1.0L, Label::nat(1));
    double p1 = tiny.compute_p_mc(1.0L, 3);
    CHECK((p1 == 0.0 || p1 == 1.0)); // single Bernoulli match

    BinaryToCountable::Options zero;
    zero.mode = StackMode::MonteCarlo;
    zero.mc_replicas = 0;
    CHECK_THROWS_AS(BinaryToCountable(BaseRule::oracle(target), zero), std::invalid_argument);
}

TEST_CASE("mode mismatches are rejected") {
    BinaryToCountable exact(BaseRule::honest(nn_binary()), {});
    CHECK_THROWS_AS(exact.compute_p_mc(0.5L, 1), std::invalid_argument);
    BinaryToCountable::Options mco;
    mco.mode = StackMode::MonteCarlo;
    mco.mc_replicas = 8;
    BinaryToCountable mc(BaseRule::honest(nn_binary()), mco);
    CHECK_THROWS_AS(mc.compute_p_exact(0.5L, 1), std::invalid_argument);
    CHECK_THROWS_AS(exact.observe(0.5L, Label::bit(1)), std::invalid_argument);
}

TEST_CASE("exact mode capacity cap") {
    BinaryToCountable::Options opt;
    opt.m_max = 2;
    BinaryToCountable stack(BaseRule::honest(nn_binary()), opt);
    stack.observe(0.1L, Label::nat(1));
    stack.observe(0.2L, Label::nat(2));
    CHECK_THROWS_AS(stack.observe(0.3L, Label::nat(3)), capacity_error);
    CHECK_THROWS_AS(BinaryToCountable(BaseRule::honest(nn_binary()),
                                      BinaryToCountable::Options{StackMode::Exact, 0, 0, 0}),
                    std::invalid_argument);
}

TEST_CASE("representant shortcut") {
    RepresentantShortcut sc(std::make_unique<NnLearner>(ValueSpace::binary()));
    CHECK(sc.predict(0.3L) == Label::nat(0)); // empty history
    sc.observe(0.0L, Label::nat(5));
    sc.observe(1.0L, Label::nat(9));
    CHECK(sc.predict(0.2L) == Label::nat(5));
    CHECK(sc.predict(0.8L) == Label::nat(9));
}

TEST_CASE("transport equality across the three routes") {
    Trace tr = nat_trace(derive_seed(47, "transport"), 400, 7);
    BinaryToCountable stack(BaseRule::honest(nn_binary()), {});
    RepresentantShortcut shortcut(std::make_unique<NnLearner>(ValueSpace::countable()));
    NnLearner native(ValueSpace::countable());
    for (std::size_t t = 0; t < tr.size(); ++t) {
        Label a = stack.predict(tr.xs[t]);
        Label b = shortcut.predict(tr.xs[t]);
        Label c = native.predict(tr.xs[t]);
        REQUIRE(a == b);
        REQUIRE(b == c);
        stack.observe(tr.xs[t], tr.ys[t]);
        shortcut.observe(tr.xs[t], tr.ys[t]);
        native.observe(tr.xs[t], tr.ys[t]);
    }
}

TEST_CASE("countable-to-general with one level is the plain quantized predictor") {
    ValueSpace r = ValueSpace::real_interval(0.0, 1.0);
    TargetFn tgt = TargetFn::quantized_step({0.5}, {Label::real(0.2), Label::real(0.8)});
    CountableToGeneral wrap(r, 1, [&](std::size_t k) -> std::unique_ptr<OnlineLearner> {
        double eps = CountableToGeneral::eps_level(k);
        return std::make_unique<OracleLearner>(
            ValueSpace::countable(),
            [&r, tgt, eps](Point x) { return Label::nat(r.quantize(eps, tgt(x))); });
    });
    ProcessGen gen = ProcessGen::iid_uniform(0.0, 1.0, derive_seed(53, "ctg"));
    for (std::uint64_t t = 1; t <= 50; ++t) {
        Point x = gen.next_input(t);
        Label y = tgt(x);
        Label pred = wrap.predict(x);
        REQUIRE(pred == r.dense_point(r.quantize(0.5, y)));
        wrap.observe(x, y);
    }
}

TEST_CASE("perfect quantized levels keep the composed loss below 2*eps_K") {
    ValueSpace r = ValueSpace::real_interval(0.0, 1.0);
    TargetFn tgt = TargetFn::quantized_step({0.31, 0.62}, {Label::real(0.15), Label::real(0.5),
                                                           Label::real(0.9)});
    const std::size_t K = 6;
    CountableToGeneral wrap(r, K, [&](std::size_t k) -> std::unique_ptr<OnlineLearner> {
        double eps = CountableToGeneral::eps_level(k);
        return std::make_unique<OracleLearner>(
            ValueSpace::countable(),
            [&r, tgt, eps](Point x) { return Label::nat(r.quantize(eps, tgt(x))); });
    });
    ProcessGen gen = ProcessGen::iid_uniform(0.0, 1.0, derive_seed(59, "ctg2"));
    for (std::uint64_t t = 1; t <= 300; ++t) {
        Point x = gen.next_input(t);
        Label y = tgt(x);
        Label pred = wrap.predict(x);
        REQUIRE(r.loss(pred, y) <= 2.0 * std::ldexp(1.0, -static_cast<int>(K)));
        REQUIRE(wrap.last_step().p_hat == K);
        wrap.observe(x, y);
    }
}

TEST_CASE("full stack over a binary space equals plain nearest neighbor") {
    ProcessGen gen = ProcessGen::iid_uniform(0.0, 1.0, derive_seed(61, "full"));
    TargetFn tgt = TargetFn::interval_union({{0.2, 0.45}, {0.7, 0.9}});
    auto stack = compose_full_stack(BaseRule::honest(nn_binary()), ValueSpace::binary(), 4, {});
    NnLearner nn(ValueSpace::binary());
    for (std::uint64_t t = 1; t <= 500; ++t) {
        Point x = gen.next_input(t);
        Label y = tgt(x);
        REQUIRE(stack->predict(x) == nn.predict(x));
        stack->observe(x, y);
        nn.observe(x, y);
    }
}

TEST_CASE("full stack reaches zero loss on clustered finite classes") {
    // four tight clusters, one per class: NN is eventually right on every
    // one-vs-rest stream, so the composed rule's loss settles at zero
    std::vector<Point> centers = {0.1L, 0.35L, 0.6L, 0.85L};
    ProcessGen noise = ProcessGen::iid_uniform(-0.02, 0.02, derive_seed(67, "cluster"));
    ProcessGen which = ProcessGen::iid_discrete({0.5L, 1.5L, 2.5L, 3.5L}, {1, 1, 1, 1},
                                                derive_seed(67, "which-cluster"));
    auto stack = compose_full_stack(BaseRule::honest(nn_binary()), ValueSpace::finite(4), 4, {});
    std::uint64_t late_loss = 0;
    for (std::uint64_t t = 1; t <= 400; ++t) {
        int c = static_cast<int>(which.next_input(t));
        Point x = centers[c] + noise.next_input(t);
        Label y = Label::cls(c + 1);
        Label pred = stack->predict(x);
        if (t > 300) late_loss += pred != y;
        stack->observe(x, y);
    }
    CHECK(late_loss == 0);
}

TEST_CASE("level predictions of zero fall back to the first dense point") {
    ValueSpace r = ValueSpace::real_interval(0.0, 1.0);
    CountableToGeneral wrap(r, 3, [](std::size_t) -> std::unique_ptr<OnlineLearner> {
        return std::make_unique<NnLearner>(ValueSpace::countable());
    });
    CHECK(wrap.predict(0.5L) == Label::real(0.5)); // all levels emit 0 at t=1
    CHECK(wrap.last_step().p_hat >= 1);
}
