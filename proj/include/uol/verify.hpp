#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "harness.hpp"
#include "learners.hpp"
#include "processes.hpp"
#include "reductions.hpp"
#include "rng.hpp"
#include "value_space.hpp"

namespace uol {

// Self-contained property checks behind `verify [--scope S]`. Fixed seeds,
// no external data; each check returns pass/fail plus a short detail line.

struct CheckResult {
    bool pass = true;
    std::string detail;
};

struct VerifyCheck {
    std::string name;
    std::string scope;
    std::function<CheckResult()> run;
};

namespace verify_detail {

inline Label random_label(const ValueSpace& s, Rng& rng) {
    switch (s.kind()) {
    case SpaceKind::Binary: return Label::bit(rng.bernoulli_bit());
    case SpaceKind::Finite: return Label::cls(1 + rng.next_u64() % s.num_classes());
    case SpaceKind::Countable: return Label::nat(rng.next_u64() % 50);
    case SpaceKind::RealInterval: return Label::real(rng.uniform(s.lo(), s.hi()));
    }
    throw std::logic_error("unreachable");
}

inline std::vector<ValueSpace> builtin_spaces() {
    return {ValueSpace::binary(), ValueSpace::finite(5), ValueSpace::countable(),
            ValueSpace::real_interval(0.0, 1.0),
            ValueSpace::real_interval(-2.0, 3.0, RealLossKind::Squared)};
}

/// Membership in the ball region by direct loss evaluation (independent of
/// the interval-arithmetic path).
inline bool region_member(const ValueSpace& s, std::uint64_t i, double eps, const Label& y) {
    if (!(s.loss(s.dense_point(i), y) < eps)) return false;
    for (std::uint64_t j = 1; j < i; ++j)
        if (s.loss(s.dense_point(j), y) < eps) return false;
    return true;
}

inline CheckResult near_metric_axioms() {
    const double slack = 1e-12; // float rounding headroom on the triangle sum
    for (const ValueSpace& s : builtin_spaces()) {
        Rng rng(derive_seed(1001, to_string(s.kind())));
        for (int n = 0; n < 10000; ++n) {
            Label a = random_label(s, rng), b = random_label(s, rng), c = random_label(s, rng);
            double lab = s.loss(a, b), lba = s.loss(b, a);
            if (lab != lba) return {false, "symmetry failed on " + std::string(to_string(s.kind()))};
            if ((lab == 0.0) != (a == b)) return {false, "discernibility failed"};
            double lac = s.loss(a, c), lbc = s.loss(b, c);
            double rhs = s.c_ell() * (lab + lbc);
            if (lac > rhs * (1.0 + slack))
                return {false, "relaxed triangle failed on " + std::string(to_string(s.kind()))};
            if (lab > s.ell_bar()) return {false, "loss exceeded ell_bar"};
        }
    }
    return {true, "5 spaces x 10^4 triples"};
}

inline CheckResult quantizer_minimality() {
    for (const ValueSpace& s : builtin_spaces()) {
        Rng rng(derive_seed(1002, to_string(s.kind())));
        for (int n = 0; n < 1000; ++n) {
            Label y = random_label(s, rng);
            double eps = rng.uniform(0.002, 1.5);
            std::uint64_t h = s.quantize(eps, y);
            if (!(s.loss(s.dense_point(h), y) < eps)) return {false, "returned index misses eps"};
            for (std::uint64_t i = 1; i < h; ++i)
                if (s.loss(s.dense_point(i), y) < eps)
                    return {false, "a smaller index already satisfies the bound"};
        }
    }
    return {true, "5 spaces x 10^3 draws, minimality scanned"};
}

inline CheckResult ball_partition() {
    for (const ValueSpace& s : builtin_spaces()) {
        Rng rng(derive_seed(1003, to_string(s.kind())));
        for (double eps : {0.6, 0.25, 0.1}) {
            for (int n = 0; n < 333; ++n) {
                Label y = random_label(s, rng);
                std::uint64_t h = s.quantize(eps, y);
                int members = 0;
                for (std::uint64_t i = 1; i <= h; ++i)
                    members += region_member(s, i, eps, y) ? 1 : 0;
                if (members != 1 || !region_member(s, h, eps, y))
                    return {false, "point not in exactly the region of its quantized index"};
            }
        }
    }
    return {true, "unique region membership at 3 levels"};
}

inline CheckResult intersect_vs_probing() {
    Rng rng(derive_seed(1004, "intersect"));
    const auto spaces = builtin_spaces();
    int agreements = 0;
    for (int n = 0; n < 1000; ++n) {
        const ValueSpace& s = spaces[n % spaces.size()];
        std::vector<ValueSpace::Constraint> cs;
        std::size_t m = 1 + rng.next_u64() % 3;
        for (std::size_t i = 0; i < m; ++i)
            cs.push_back({1 + rng.next_u64() % 30, rng.uniform(0.05, 1.2)});
        auto res = s.intersect_nonempty(cs);
        bool probed = false;
        for (std::uint64_t i = 1; i <= 10000 && !probed; ++i) {
            Label p = s.dense_point(i);
            bool in_all = true;
            for (const auto& c : cs)
                if (!region_member(s, c.index, c.eps, p)) {
                    in_all = false;
                    break;
                }
            probed = in_all;
        }
        if (probed && !res.nonempty) return {false, "probing found a member the oracle missed"};
        if (res.nonempty) {
            for (const auto& c : cs)
                if (!region_member(s, c.index, c.eps, *res.witness))
                    return {false, "witness not inside every region"};
        }
        agreements += probed == res.nonempty;
    }
    std::ostringstream os;
    os << "10^3 constraint lists; probe agreed on " << agreements;
    return {true, os.str()};
}

inline Trace random_binary_trace(std::uint64_t seed, std::size_t T) {
    ProcessGen gen = ProcessGen::iid_uniform(0.0, 1.0, seed);
    TargetFn tgt = TargetFn::interval_union({{0.1, 0.35}, {0.6, 0.8}});
    return make_trace(gen, tgt, T);
}

inline CheckResult no_leakage() {
    Trace tr = random_binary_trace(derive_seed(1005, "trace"), 100);
    auto make_learners = []() {
        std::vector<std::unique_ptr<OnlineLearner>> ls;
        ls.push_back(std::make_unique<NnLearner>(ValueSpace::binary()));
        ls.push_back(std::make_unique<MemorizationLearner>(ValueSpace::binary()));
        return ls;
    };
    for (std::size_t corrupt_at : {3u, 50u, 99u}) {
        auto clean = make_learners();
        auto dirty = make_learners();
        for (std::size_t li = 0; li < clean.size(); ++li) {
            for (std::size_t t = 0; t < corrupt_at; ++t) {
                Label pc = clean[li]->predict(tr.xs[t]);
                Label pd = dirty[li]->predict(tr.xs[t]);
                if (pc != pd) return {false, "prediction changed before the corrupted label"};
                Label y = tr.ys[t];
                Label ycorrupt = t + 1 == corrupt_at ? Label::bit(1 - static_cast<int>(y.as_uint())) : y;
                clean[li]->observe(tr.xs[t], y);
                dirty[li]->observe(tr.xs[t], ycorrupt);
            }
        }
    }
    return {true, "labels observed after a prediction never affect it"};
}

inline CheckResult nn_representant_minimality() {
    Rng rng(derive_seed(1006, "nn"));
    for (int n = 0; n < 1000; ++n) {
        NnLearner nn(ValueSpace::binary());
        std::vector<Point> xs;
        std::size_t len = 2 + rng.next_u64() % 50;
        for (std::size_t t = 0; t < len; ++t) {
            Point x = static_cast<Point>(rng.uniform(-1.0, 1.0));
            if (t > 0) {
                auto rep = nn.representant(x);
                if (!rep) return {false, "no representant with nonempty history"};
                Point best = std::fabs(x - xs[0]);
                std::size_t best_i = 1;
                for (std::size_t i = 1; i < xs.size(); ++i) {
                    Point d = std::fabs(x - xs[i]);
                    if (d < best) {
                        best = d;
                        best_i = i + 1;
                    }
                }
                if (*rep != best_i) return {false, "representant not the most ancient argmin"};
            }
            xs.push_back(x);
            nn.observe(x, Label::bit(rng.bernoulli_bit()));
        }
    }
    return {true, "10^3 random traces against a direct scan"};
}

inline CheckResult memorization_repeats() {
    Rng rng(derive_seed(1007, "memo"));
    ValueSpace space = ValueSpace::countable();
    MemorizationLearner memo(space);
    std::vector<Point> pool = {0.1L, 0.2L, 0.3L, 0.4L};
    std::map<Point, Label> truth;
    for (int t = 0; t < 500; ++t) {
        Point x = pool[rng.next_u64() % pool.size()];
        Label y = Label::nat((static_cast<std::uint64_t>(x * 10.0L)) % 7);
        bool seen = truth.count(x) != 0;
        Label pred = memo.predict(x);
        if (seen && pred != y) return {false, "nonzero loss on a repeated point"};
        truth[x] = y;
        memo.observe(x, y);
    }
    return {true, "zero loss from each second occurrence on"};
}

inline CheckResult counterexample_geometric() {
    ProcessGen gen = ProcessGen::geometric(-1.0L / 3.0L);
    TargetFn tgt = TargetFn::interval_union({{0.0, 1.0}});
    Trace tr = make_trace(gen, tgt, 1000);
    NnLearner nn(ValueSpace::binary());
    std::uint64_t mistakes = 0;
    for (std::size_t t = 0; t < tr.size(); ++t) {
        Label pred = nn.predict(tr.xs[t]);
        bool mistake = pred != tr.ys[t];
        if (t >= 1 && !mistake) return {false, "step " + std::to_string(t + 1) + " was not a mistake"};
        mistakes += mistake;
        nn.observe(tr.xs[t], tr.ys[t]);
    }
    double avg = static_cast<double>(mistakes) / 1000.0;
    if (avg < 0.998 || avg > 1.0) return {false, "average loss " + std::to_string(avg)};
    return {true, "errors at every step t >= 2; avg loss " + std::to_string(avg)};
}

inline LearnerFactory nn_binary_factory() {
    return []() -> std::unique_ptr<OnlineLearner> {
        return std::make_unique<NnLearner>(ValueSpace::binary());
    };
}

inline Trace countable_trace(std::uint64_t seed, std::size_t T, std::uint64_t labels = 8) {
    ProcessGen gen = ProcessGen::iid_uniform(0.0, 1.0, seed);
    std::vector<double> breakpoints;
    std::vector<Label> ys;
    for (std::uint64_t j = 0; j < labels; ++j) {
        if (j > 0) breakpoints.push_back(static_cast<double>(j) / static_cast<double>(labels));
        ys.push_back(Label::nat(3 + (j * 5) % labels)); // distinct, unordered
    }
    TargetFn tgt = TargetFn::quantized_step(breakpoints, ys);
    return make_trace(gen, tgt, T);
}

inline CheckResult p_range_and_collapse() {
    Trace tr = countable_trace(derive_seed(1008, "trace"), 120, 5);
    BinaryToCountable exact(BaseRule::honest(nn_binary_factory()), {});
    BinaryToCountable::Options mco;
    mco.mode = StackMode::MonteCarlo;
    mco.mc_replicas = 256;
    mco.seed = derive_seed(1008, "mc");
    BinaryToCountable mc(BaseRule::honest(nn_binary_factory()), mco);
    for (std::size_t t = 0; t < tr.size(); ++t) {
        for (std::uint64_t i : {std::uint64_t{0}, std::uint64_t{3}, std::uint64_t{77},
                                std::uint64_t{200}}) {
            double pe = exact.compute_p_exact(tr.xs[t], i);
            double pm = mc.compute_p_mc(tr.xs[t], i);
            if (pe < 0.0 || pe > 1.0 || pm < 0.0 || pm > 1.0) return {false, "p outside [0,1]"};
        }
        // never-observed labels all score exactly 1/2 under a deterministic base
        double pa = exact.compute_p_exact(tr.xs[t], 501);
        double pb = exact.compute_p_exact(tr.xs[t], 502);
        if (pa != pb || pa != 0.5) return {false, "unobserved labels did not collapse to 1/2"};
        exact.observe(tr.xs[t], tr.ys[t]);
        mc.observe(tr.xs[t], tr.ys[t]);
    }
    return {true, "p in [0,1]; unobserved labels collapse to 1/2"};
}

inline CheckResult exact_mc_agreement() {
    Trace tr = countable_trace(derive_seed(1009, "trace"), 200, 8);
    BinaryToCountable exact(BaseRule::honest(nn_binary_factory()), {});
    BinaryToCountable::Options mco;
    mco.mode = StackMode::MonteCarlo;
    mco.mc_replicas = 10000;
    mco.seed = derive_seed(1009, "mc");
    BinaryToCountable mc(BaseRule::honest(nn_binary_factory()), mco);
    const double tol = 4.0 * std::sqrt(0.25 / 10000.0); // 0.02
    std::uint64_t pairs = 0, within = 0;
    for (std::size_t t = 0; t < tr.size(); ++t) {
        std::set<std::uint64_t> labels = exact.observed_labels();
        labels.insert(400); // one never-observed hypothesis per step
        for (std::uint64_t i : labels) {
            double pe = exact.compute_p_exact(tr.xs[t], i);
            double pm = mc.compute_p_mc(tr.xs[t], i);
            ++pairs;
            within += std::fabs(pe - pm) <= tol;
        }
        exact.observe(tr.xs[t], tr.ys[t]);
        mc.observe(tr.xs[t], tr.ys[t]);
    }
    double frac = static_cast<double>(within) / static_cast<double>(pairs);
    std::ostringstream os;
    os << within << "/" << pairs << " pairs within " << tol;
    return {frac >= 0.99, os.str()};
}

inline CheckResult transport_equality() {
    for (int memo = 0; memo <= 1; ++memo) {
        for (std::uint64_t seed : {11u, 12u, 13u}) {
            Trace tr = countable_trace(derive_seed(1010, "trace", seed), 1000, 8);
            auto base_factory = [&]() -> LearnerFactory {
                if (memo)
                    return []() -> std::unique_ptr<OnlineLearner> {
                        return std::make_unique<MemorizationLearner>(ValueSpace::binary());
                    };
                return nn_binary_factory();
            }();
            BinaryToCountable stack(BaseRule::honest(base_factory), {});
            std::unique_ptr<RepresentantLearner> rep_rule;
            std::unique_ptr<OnlineLearner> native;
            if (memo) {
                rep_rule = std::make_unique<MemorizationLearner>(ValueSpace::countable());
                native = std::make_unique<MemorizationLearner>(ValueSpace::countable());
            } else {
                rep_rule = std::make_unique<NnLearner>(ValueSpace::countable());
                native = std::make_unique<NnLearner>(ValueSpace::countable());
            }
            RepresentantShortcut shortcut(std::move(rep_rule));
            for (std::size_t t = 0; t < tr.size(); ++t) {
                Label a = stack.predict(tr.xs[t]);
                Label b = shortcut.predict(tr.xs[t]);
                Label c = native.get()->predict(tr.xs[t]);
                if (a != b || b != c)
                    return {false, "divergence at step " + std::to_string(t + 1)};
                stack.observe(tr.xs[t], tr.ys[t]);
                shortcut.observe(tr.xs[t], tr.ys[t]);
                native->observe(tr.xs[t], tr.ys[t]);
            }
        }
    }
    return {true, "stack == shortcut == native rule, NN and memorization, 3 seeds"};
}

/// Oracle schedule fixture with sigma-averaged errors dialed exactly.
struct ScheduledOracle {
    std::map<std::uint64_t, double> e; // step -> exact sigma-averaged error
    ErrorSchedule schedule;
    std::function<std::uint64_t(Point)> target;
    std::vector<Point> xs;
    std::vector<std::uint64_t> ys;
};

inline ScheduledOracle make_scheduled_oracle(std::size_t T) {
    ScheduledOracle f;
    for (std::size_t t = 1; t <= T; ++t) {
        f.xs.push_back(static_cast<Point>(t));
        f.ys.push_back((t - 1) % 4 + 1); // labels 1..4, all seen by step 4
    }
    f.target = [](Point x) { return (static_cast<std::uint64_t>(x) - 1) % 4 + 1; };
    // error events: full flips, and assignment-conditioned flips with exact rates
    std::map<std::uint64_t, int> depth = {{10, 0}, {50, 0}, {51, 0}, {120, 0}, // e = 1
                                          {30, 1}, {90, 1},                    // e = 1/2
                                          {60, 2},                             // e = 1/4
                                          {70, 3},                             // e = 1/8
                                          {80, 4}};                            // e = 1/16
    for (const auto& [step, d] : depth) f.e[step] = std::ldexp(1.0, -d);
    f.schedule = [depth](std::uint64_t t, const AssignmentView& view) {
        auto it = depth.find(t);
        if (it == depth.end()) return false;
        for (int label = 1; label <= it->second; ++label) {
            auto b = view.bit_for(static_cast<std::uint64_t>(label));
            if (!b || *b != 1) return false;
        }
        return true;
    };
    return f;
}

inline CheckResult mistake_rate_bound() {
    const std::size_t T = 200;
    ScheduledOracle f = make_scheduled_oracle(T);
    BinaryToCountable stack(BaseRule::oracle(f.target, f.schedule), {});
    double cum_e = 0.0;
    std::uint64_t mistakes = 0;
    for (std::size_t t = 1; t <= T; ++t) {
        std::uint64_t pred = stack.predict_nat(f.xs[t - 1]);
        double e_t = f.e.count(t) ? f.e.at(t) : 0.0;
        bool mistake = pred != f.ys[t - 1];
        if (mistake && e_t < 0.125)
            return {false, "mistake at step " + std::to_string(t) + " with e_t < 1/8"};
        mistakes += mistake;
        cum_e += e_t;
        if (static_cast<double>(mistakes) > 8.0 * cum_e + 1e-9)
            return {false, "cumulative mistakes exceeded 8 * sum(e_t) at step " + std::to_string(t)};
        stack.observe(f.xs[t - 1], Label::nat(f.ys[t - 1]));
    }
    std::ostringstream os;
    os << mistakes << " mistakes vs 8*sum(e)=" << 8.0 * cum_e;
    return {true, os.str()};
}

inline CheckResult oracle_discrimination() {
    const std::size_t T = 200;
    ScheduledOracle f = make_scheduled_oracle(T);
    BinaryToCountable stack(BaseRule::oracle(f.target, nullptr), {});
    for (std::size_t t = 1; t <= T; ++t) {
        double p_true = stack.compute_p_exact(f.xs[t - 1], f.ys[t - 1]);
        if (p_true != 1.0) return {false, "p(true label) != 1 at step " + std::to_string(t)};
        for (std::uint64_t i : stack.observed_labels())
            if (i != f.ys[t - 1]) {
                double p = stack.compute_p_exact(f.xs[t - 1], i);
                if (p != 0.5) return {false, "p(wrong label) != 1/2 at step " + std::to_string(t)};
            }
        stack.observe(f.xs[t - 1], Label::nat(f.ys[t - 1]));
    }
    return {true, "p = 1 on the truth, 1/2 elsewhere, every step"};
}

inline Config parsed(const std::string& text) { return Config::parse_string(text); }

inline CheckResult harness_stack_bounds() {
    // perfect quantized oracle levels over a real interval
    ExperimentConfig a = ExperimentConfig::from_config(parsed(R"(
[experiment]
horizon = 400
seed = 5
[space]
kind = real_interval
lo = 0
hi = 1
[process]
kind = iid_uniform
lo = 0
hi = 1
[target]
kind = quantized_step
breakpoints = 0.31, 0.62
labels = 0.15, 0.5, 0.9
[learner]
base = oracle
chain = countable_to_general
levels = 6
)"));
    LossCurve ca = run_experiment(a);
    if (ca.rows.back().violations != 0) return {false, "per-step bounds violated (oracle levels)"};
    if (ca.rows.back().avg_loss > 2.0 * std::ldexp(1.0, -6))
        return {false, "oracle-level run exceeded 2*eps_K"};

    // full stack, oracle binary base
    ExperimentConfig b = ExperimentConfig::from_config(parsed(R"(
[experiment]
horizon = 300
seed = 6
[space]
kind = real_interval
lo = 0
hi = 1
[process]
kind = iid_uniform
lo = 0
hi = 1
[target]
kind = quantized_step
breakpoints = 0.5
labels = 0.25, 0.75
[learner]
base = oracle
chain = full
levels = 5
)"));
    LossCurve cb = run_experiment(b);
    if (cb.rows.back().violations != 0) return {false, "per-step bounds violated (full stack)"};

    // full stack, NN binary base
    ExperimentConfig c = ExperimentConfig::from_config(parsed(R"(
[experiment]
horizon = 300
seed = 7
[space]
kind = finite
k = 4
[process]
kind = iid_uniform
lo = 0
hi = 1
[target]
kind = quantized_step
breakpoints = 0.25, 0.5, 0.75
labels = 1, 2, 3, 4
[learner]
base = nn
chain = full
levels = 4
)"));
    LossCurve cc = run_experiment(c);
    if (cc.rows.back().violations != 0) return {false, "per-step bounds violated (NN full stack)"};
    return {true, "quantization and ball-intersection bounds, zero violations"};
}

inline CheckResult finitek_union_bound() {
    ExperimentConfig cfg = ExperimentConfig::from_config(parsed(R"(
[experiment]
horizon = 1000
seed = 9
[space]
kind = finite
k = 4
[process]
kind = iid_uniform
lo = 0
hi = 1
[target]
kind = quantized_step
breakpoints = 0.25, 0.5, 0.75
labels = 1, 2, 3, 4
[learner]
base = nn
chain = binary_to_finitek
)"));
    LossCurve curve = run_experiment(cfg);
    if (curve.rows.back().violations != 0) return {false, "union bound violated"};
    return {true, "per-step finite-k mistakes within replica mistake sum"};
}

inline CheckResult partition_totality() {
    Rng rng(derive_seed(1011, "partition"));
    Point a = 0.5L;
    for (int n = 0; n < 10000; ++n) {
        Point x;
        switch (n % 4) {
        case 0: x = static_cast<Point>(rng.uniform(-10.0, 10.0)); break;
        case 1: x = a; break;
        case 2: x = a + static_cast<Point>(std::ldexp(rng.uniform(0.5, 1.0), -(n % 60))); break;
        default: x = a - static_cast<Point>(std::ldexp(rng.uniform(0.5, 1.0), -(n % 60))); break;
        }
        DyadicCell c = dyadic_cell(a, x);
        if (x == a) {
            if (c.side != 0) return {false, "center point not in the singleton cell"};
            continue;
        }
        Point d = x > a ? x - a : a - x;
        if ((x > a) != (c.side > 0)) return {false, "wrong side"};
        Point lo = std::ldexp(1.0L, c.exponent);
        Point hi = std::ldexp(1.0L, c.exponent + 1);
        if (!(lo <= d && d < hi)) return {false, "distance outside the claimed dyadic band"};
    }
    return {true, "10^4 points, unique dyadic band each"};
}

inline CheckResult smv_decreasing() {
    ProcessGen gen = ProcessGen::iid_uniform(0.0, 1.0, derive_seed(42, "process"));
    std::vector<Point> xs;
    for (std::uint64_t t = 1; t <= 10000; ++t) xs.push_back(gen.next_input(t));
    auto rows = smv_audit(xs, PartitionSpec::dyadic_around(0.5L), {100, 1000, 10000});
    std::uint64_t prev_cells = 0;
    double prev_ratio = 2.0;
    for (const SmvRow& r : rows) {
        if (r.distinct_cells < prev_cells || r.distinct_cells > r.horizon)
            return {false, "cell count not monotone or exceeds T"};
        if (!(r.ratio < prev_ratio)) return {false, "ratios not strictly decreasing"};
        prev_cells = r.distinct_cells;
        prev_ratio = r.ratio;
    }
    std::ostringstream os;
    os << "ratios";
    for (const SmvRow& r : rows) os << " " << r.ratio;
    return {true, os.str()};
}

inline CheckResult closure_identities() {
    std::vector<TargetFn> targets = {TargetFn::interval_union({{0.0, 0.3}}),
                                     TargetFn::interval_union({{0.35, 0.6}}),
                                     TargetFn::interval_union({{0.7, 0.9}})};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ProcessGen gen = ProcessGen::iid_uniform(0.0, 1.0, derive_seed(seed, "closure"));
        Trace tr = make_trace(gen, targets[0], 1000);
        ClosureReport rep = closure_check(tr, targets);
        if (!rep.violations.empty())
            return {false, "violation at step " + std::to_string(rep.violations[0].step)};
        // complement equality with two actually-trained learners
        NnLearner on_a(ValueSpace::binary()), on_ac(ValueSpace::binary());
        for (std::size_t t = 0; t < tr.size(); ++t) {
            Label ya = targets[0](tr.xs[t]);
            Label yac = Label::bit(1 - static_cast<int>(ya.as_uint()));
            if (t > 0) {
                bool ma = on_a.predict(tr.xs[t]) != ya;
                bool mac = on_ac.predict(tr.xs[t]) != yac;
                if (ma != mac) return {false, "trained complement mistake mismatch"};
            }
            on_a.observe(tr.xs[t], ya);
            on_ac.observe(tr.xs[t], yac);
        }
    }
    return {true, "zero violations on 5 seeded traces"};
}

inline CheckResult counterexample_totality() {
    ProcessGen gen = ProcessGen::geometric(-1.0L / 3.0L);
    TargetFn tgt = TargetFn::threshold(0.0, false);
    Trace tr = make_trace(gen, tgt, 2000);
    MistakeCellReport rep = mistake_vs_newcell_check(tr, tgt);
    for (std::size_t t = 1; t < tr.size(); ++t)
        if (rep.mistakes[t] != rep.mistakes[t - 1] + 1)
            return {false, "missed a mistake at step " + std::to_string(t + 1)};
    if (!rep.bound_holds) return {false, "mistake/new-cell bound failed"};
    return {true, "every step t >= 2 errs and opens a fresh cell"};
}

inline CheckResult mistake_vs_newcell() {
    {
        ProcessGen gen = ProcessGen::geometric(-1.0L / 3.0L);
        TargetFn tgt = TargetFn::threshold(0.0, false);
        MistakeCellReport rep = mistake_vs_newcell_check(make_trace(gen, tgt, 10000), tgt);
        if (!rep.bound_holds) return {false, "bound failed on the geometric trace"};
    }
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ProcessGen gen = ProcessGen::iid_uniform(0.0, 1.0, derive_seed(seed, "mnc"));
        TargetFn tgt = TargetFn::threshold(0.5, seed % 2 == 0);
        MistakeCellReport rep = mistake_vs_newcell_check(make_trace(gen, tgt, 10000), tgt);
        if (!rep.bound_holds)
            return {false, "bound failed on iid seed " + std::to_string(seed)};
    }
    return {true, "mistakes(T) <= new_cells(T) on every prefix, 6 traces"};
}

inline std::string small_run_config() {
    return R"(
[experiment]
horizon = 2000
seed = 42
[space]
kind = binary
[process]
kind = iid_uniform
lo = 0
hi = 1
[target]
kind = interval_union
intervals = 0.1:0.2, 0.4:0.5, 0.8:0.9
[learner]
base = nn
)";
}

inline CheckResult harness_reproducibility() {
    ExperimentConfig cfg = ExperimentConfig::from_config(parsed(small_run_config()));
    std::string a = to_csv(run_experiment(cfg));
    std::string b = to_csv(run_experiment(cfg));
    if (a != b) return {false, "two runs with one seed differ"};
    return {true, "byte-identical CSV across runs"};
}

inline CheckResult checkpoint_exactness() {
    ExperimentConfig cfg = ExperimentConfig::from_config(parsed(small_run_config()));
    LossCurve curve = run_experiment(cfg);
    // raw per-step log, aggregated independently
    BuiltLearner built = build_learner(cfg);
    std::vector<double> step_losses;
    for (std::uint64_t t = 1; t <= cfg.horizon; ++t) {
        Point x = cfg.process.next_input(t);
        Label pred = built.learner->predict(x);
        Label y = cfg.target(x);
        step_losses.push_back(cfg.space.loss(pred, y));
        built.learner->observe(x, y);
    }
    for (const LossCurveRow& row : curve.rows) {
        double cum = 0.0;
        for (std::uint64_t t = 0; t < row.horizon; ++t) cum += step_losses[t];
        if (cum / static_cast<double>(row.horizon) != row.avg_loss)
            return {false, "checkpoint average differs from the raw log"};
    }
    return {true, "checkpoint averages equal the raw per-step log"};
}

inline CheckResult sweep_determinism() {
    std::vector<std::pair<std::string, ExperimentConfig>> configs;
    for (int i = 0; i < 4; ++i)
        configs.emplace_back("cfg" + std::to_string(i),
                             ExperimentConfig::from_config(parsed(small_run_config())));
    auto seq = sweep(configs, 1);
    auto par = sweep(configs, 4);
    if (seq.size() != par.size()) return {false, "result counts differ"};
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (seq[i].name != par[i].name) return {false, "order not preserved"};
        if (!seq[i].curve || !par[i].curve) return {false, "run failed"};
        if (to_csv(*seq[i].curve) != to_csv(*par[i].curve))
            return {false, "parallel result differs from sequential"};
    }
    if (!sweep({}, 3).empty()) return {false, "empty sweep not empty"};
    return {true, "jobs=1 and jobs=4 byte-identical, order preserved"};
}

} // namespace verify_detail

inline const std::vector<VerifyCheck>& verify_checks() {
    using namespace verify_detail;
    static const std::vector<VerifyCheck> checks = {
        {"near-metric-axioms", "value_space", near_metric_axioms},
        {"quantizer-minimality", "value_space", quantizer_minimality},
        {"ball-partition", "value_space", ball_partition},
        {"intersect-vs-probing", "value_space", intersect_vs_probing},
        {"no-leakage", "learners", no_leakage},
        {"nn-representant-minimality", "learners", nn_representant_minimality},
        {"memorization-repeats", "learners", memorization_repeats},
        {"counterexample-reproduction", "learners", counterexample_geometric},
        {"p-range-and-collapse", "reductions", p_range_and_collapse},
        {"oracle-discrimination", "reductions", oracle_discrimination},
        {"exact-mc-agreement", "reductions", exact_mc_agreement},
        {"transport-equality", "reductions", transport_equality},
        {"mistake-rate-bound", "reductions", mistake_rate_bound},
        {"stack-per-step-bounds", "reductions", harness_stack_bounds},
        {"finitek-union-bound", "reductions", finitek_union_bound},
        {"partition-totality", "processes", partition_totality},
        {"smv-ratios-decreasing", "processes", smv_decreasing},
        {"closure-identities", "processes", closure_identities},
        {"counterexample-totality", "processes", counterexample_totality},
        {"mistake-vs-newcell", "processes", mistake_vs_newcell},
        {"reproducibility", "harness", harness_reproducibility},
        {"checkpoint-exactness", "harness", checkpoint_exactness},
        {"sweep-determinism", "harness", sweep_determinism},
    };
    return checks;
}

struct VerifyLine {
    std::string name;
    std::string scope;
    bool pass;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyLine> lines;
    bool all_pass = true;
};

/// Runs the enumerated property checks for one module (or all).
inline VerifyReport verify_suite(const std::string& scope = "all") {
    VerifyReport report;
    bool matched = false;
    for (const VerifyCheck& c : verify_checks()) {
        if (scope != "all" && scope != c.scope) continue;
        matched = true;
        CheckResult r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        report.lines.push_back({c.name, c.scope, r.pass, r.detail});
        report.all_pass = report.all_pass && r.pass;
    }
    if (!matched) throw std::invalid_argument("verify: unknown scope '" + scope + "'");
    return report;
}

} // namespace uol
