#pragma once

#include <atomic>
#include <cstdio>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "config.hpp"
#include "learners.hpp"
#include "processes.hpp"
#include "reductions.hpp"

namespace uol {

enum class BaseKind : std::uint8_t { Nn, Memorization, Oracle };
enum class ChainKind : std::uint8_t {
    None,
    BinaryToCountable,
    BinaryToFiniteK,
    CountableToGeneral,
    Full,
    GeneralToBinary,
};

struct LearnerSpec {
    BaseKind base = BaseKind::Nn;
    ChainKind chain = ChainKind::None;
    StackMode mode = StackMode::Exact;
    std::size_t m_max = 16;
    std::size_t mc_replicas = 10000;
    std::size_t levels = 8;
    std::set<std::uint64_t> oracle_errors; // steps where every oracle replica errs
    // general_to_binary plumbing
    std::optional<ValueSpace> rich_space;
    std::optional<Label> anchor0, anchor1;
};

struct ExperimentConfig {
    std::uint64_t horizon = 1;
    std::uint64_t seed = 0;
    std::string output; // CSV path; empty -> caller decides
    ValueSpace space = ValueSpace::binary();
    ProcessGen process = ProcessGen::geometric(0.5L);
    TargetFn target = TargetFn::threshold(0.0, false);
    LearnerSpec learner;
    std::optional<PartitionSpec> partition; // new-cells counter; defaults from threshold targets
    bool check_closure = true;

    static ExperimentConfig from_config(const Config& cfg);
};

struct LossCurveRow {
    std::uint64_t horizon;
    double avg_loss;
    std::uint64_t mistakes;
    std::uint64_t new_cells;
    std::uint64_t distinct_labels;
    std::uint64_t replicas;
    std::uint64_t violations;
};

struct LossCurve {
    std::vector<LossCurveRow> rows;
};

// ---------------------------------------------------------------------------
// Config -> experiment

namespace detail {

inline ValueSpace space_from_config(const Config& cfg, const std::string& prefix) {
    std::string kind = cfg.get(prefix + ".kind");
    if (kind == "binary") return ValueSpace::binary();
    if (kind == "finite") return ValueSpace::finite(cfg.get_uint(prefix + ".k"));
    if (kind == "countable") return ValueSpace::countable();
    if (kind == "real_interval") {
        std::string loss = cfg.get_or(prefix + ".loss", "absolute");
        if (loss != "absolute" && loss != "squared")
            throw std::invalid_argument(prefix + ".loss: expected absolute or squared");
        return ValueSpace::real_interval(cfg.get_real(prefix + ".lo"), cfg.get_real(prefix + ".hi"),
                                         loss == "absolute" ? RealLossKind::Absolute
                                                            : RealLossKind::Squared);
    }
    throw std::invalid_argument(prefix + ".kind: unknown space kind '" + kind + "'");
}

inline Label parse_label(const ValueSpace& space, const std::string& s) {
    double v = Config::parse_real(s, "label");
    Label y = Label::bit(0);
    switch (space.kind()) {
    case SpaceKind::Binary: y = Label::bit(static_cast<int>(v)); break;
    case SpaceKind::Finite: y = Label::cls(static_cast<std::uint64_t>(v)); break;
    case SpaceKind::Countable: y = Label::nat(static_cast<std::uint64_t>(v)); break;
    case SpaceKind::RealInterval: y = Label::real(v); break;
    }
    space.check_label(y);
    return y;
}

inline ProcessGen process_from_config(const Config& cfg, std::uint64_t master_seed) {
    std::string kind = cfg.get("process.kind");
    std::uint64_t seed = derive_seed(master_seed, "process");
    if (kind == "iid_uniform")
        return ProcessGen::iid_uniform(cfg.get_real("process.lo"), cfg.get_real("process.hi"),
                                       seed);
    if (kind == "iid_discrete") {
        std::vector<double> pts = cfg.get_real_list("process.points");
        std::vector<double> w = cfg.has("process.weights")
                                    ? cfg.get_real_list("process.weights")
                                    : std::vector<double>(pts.size(), 1.0);
        std::vector<Point> support(pts.begin(), pts.end());
        return ProcessGen::iid_discrete(std::move(support), std::move(w), seed);
    }
    if (kind == "geometric") return ProcessGen::geometric(cfg.get_real("process.ratio"));
    if (kind == "fixed") {
        std::vector<double> pts = cfg.get_real_list("process.values");
        return ProcessGen::fixed_sequence(std::vector<Point>(pts.begin(), pts.end()));
    }
    if (kind == "file") return ProcessGen::file_trace(cfg.get("process.path"));
    throw std::invalid_argument("process.kind: unknown process kind '" + kind + "'");
}

inline TargetFn target_from_config(const Config& cfg, const ValueSpace& space) {
    std::string kind = cfg.get("target.kind");
    if (kind == "threshold")
        return TargetFn::threshold(cfg.get_real("target.a"),
                                   cfg.get_bool_or("target.closed", false));
    if (kind == "interval_union") {
        std::vector<std::pair<double, double>> iv;
        for (const std::string& item : cfg.get_list("target.intervals")) {
            std::size_t colon = item.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("target.intervals: expected lo:hi pairs");
            iv.emplace_back(Config::parse_real(item.substr(0, colon), "target.intervals"),
                            Config::parse_real(item.substr(colon + 1), "target.intervals"));
        }
        return TargetFn::interval_union(std::move(iv));
    }
    if (kind == "dyadic_cell_label") return TargetFn::dyadic_cell_label(cfg.get_real("target.a"));
    if (kind == "quantized_step") {
        std::vector<double> bp = cfg.get_real_list("target.breakpoints");
        std::vector<Label> labels;
        for (const std::string& s : cfg.get_list("target.labels"))
            labels.push_back(parse_label(space, s));
        return TargetFn::quantized_step(std::move(bp), std::move(labels));
    }
    throw std::invalid_argument("target.kind: unknown target kind '" + kind + "'");
}

inline void validate_target_space(const ExperimentConfig& ec) {
    TargetKind tk = ec.target.kind();
    SpaceKind sk = ec.space.kind();
    bool ok = true;
    if (tk == TargetKind::Threshold || tk == TargetKind::IntervalUnion)
        ok = sk == SpaceKind::Binary;
    else if (tk == TargetKind::DyadicCellLabel)
        ok = sk == SpaceKind::Countable;
    if (!ok)
        throw std::invalid_argument("target kind does not produce labels of the space kind");
}

} // namespace detail

inline ExperimentConfig ExperimentConfig::from_config(const Config& cfg) {
    ExperimentConfig ec;
    ec.horizon = cfg.get_uint("experiment.horizon");
    if (ec.horizon < 1) throw std::invalid_argument("experiment.horizon: must be >= 1");
    ec.seed = cfg.get_uint_or("experiment.seed", 0);
    ec.output = cfg.get_or("experiment.output", "");
    ec.space = detail::space_from_config(cfg, "space");
    ec.process = detail::process_from_config(cfg, ec.seed);
    ec.target = detail::target_from_config(cfg, ec.space);
    detail::validate_target_space(ec);

    LearnerSpec& ls = ec.learner;
    std::string base = cfg.get_or("learner.base", "nn");
    if (base == "nn")
        ls.base = BaseKind::Nn;
    else if (base == "memorization")
        ls.base = BaseKind::Memorization;
    else if (base == "oracle")
        ls.base = BaseKind::Oracle;
    else
        throw std::invalid_argument("learner.base: unknown base rule '" + base + "'");

    std::string chain = cfg.get_or("learner.chain", "none");
    if (chain == "none")
        ls.chain = ChainKind::None;
    else if (chain == "binary_to_countable")
        ls.chain = ChainKind::BinaryToCountable;
    else if (chain == "binary_to_finitek")
        ls.chain = ChainKind::BinaryToFiniteK;
    else if (chain == "countable_to_general")
        ls.chain = ChainKind::CountableToGeneral;
    else if (chain == "full")
        ls.chain = ChainKind::Full;
    else if (chain == "general_to_binary")
        ls.chain = ChainKind::GeneralToBinary;
    else
        throw std::invalid_argument("learner.chain: unknown chain '" + chain + "'");

    std::string mode = cfg.get_or("learner.mode", "exact");
    if (mode == "exact")
        ls.mode = StackMode::Exact;
    else if (mode == "mc")
        ls.mode = StackMode::MonteCarlo;
    else
        throw std::invalid_argument("learner.mode: expected exact or mc");
    ls.m_max = cfg.get_uint_or("learner.m_max", 16);
    ls.mc_replicas = cfg.get_uint_or("learner.mc_replicas", 10000);
    ls.levels = cfg.get_uint_or("learner.levels", 8);
    if (cfg.has("learner.oracle_errors"))
        for (double v : cfg.get_real_list("learner.oracle_errors"))
            ls.oracle_errors.insert(static_cast<std::uint64_t>(v));

    if (ls.chain == ChainKind::BinaryToCountable && ec.space.kind() != SpaceKind::Countable)
        throw std::invalid_argument("chain binary_to_countable requires a countable space");
    if (ls.chain == ChainKind::BinaryToFiniteK && ec.space.kind() != SpaceKind::Finite)
        throw std::invalid_argument("chain binary_to_finitek requires a finite space");
    if (ls.chain == ChainKind::GeneralToBinary) {
        if (ec.space.kind() != SpaceKind::Binary)
            throw std::invalid_argument("chain general_to_binary requires a binary space");
        if (ls.base == BaseKind::Oracle)
            throw std::invalid_argument("chain general_to_binary does not support oracle bases");
        ls.rich_space = detail::space_from_config(cfg, "learner.rich");
        ls.anchor0 = detail::parse_label(*ls.rich_space, cfg.get("learner.anchor0"));
        ls.anchor1 = detail::parse_label(*ls.rich_space, cfg.get("learner.anchor1"));
        if (!(ls.rich_space->loss(*ls.anchor0, *ls.anchor1) > 0.0))
            throw std::invalid_argument("learner.anchor0 and anchor1 must be distinct");
    }

    if (cfg.has("partition.kind")) {
        std::string pk = cfg.get("partition.kind");
        if (pk == "dyadic_around")
            ec.partition = PartitionSpec::dyadic_around(cfg.get_real("partition.a"));
        else if (pk == "uniform_grid")
            ec.partition = PartitionSpec::uniform_grid(cfg.get_real("partition.width"));
        else
            throw std::invalid_argument("partition.kind: unknown partition '" + pk + "'");
    }
    ec.check_closure = cfg.get_bool_or("checks.closure", true);

    auto unused = cfg.unused_keys();
    if (!unused.empty()) {
        std::string msg = "unknown config keys:";
        for (const std::string& k : unused) msg += " " + k;
        throw std::invalid_argument(msg);
    }
    return ec;
}

// ---------------------------------------------------------------------------
// Learner construction

struct BuiltLearner {
    std::unique_ptr<OnlineLearner> learner;
    CountableToGeneral* ctg = nullptr;
    BinaryToFiniteK* b2k = nullptr;
    BinaryToCountable* b2c = nullptr;
    RepresentantLearner* representant = nullptr; // set when the base rule answers directly
};

inline BuiltLearner build_learner(const ExperimentConfig& cfg) {
    const LearnerSpec& ls = cfg.learner;
    const TargetFn target = cfg.target;
    BuiltLearner out;

    auto native_factory = [&](const ValueSpace& space) -> LearnerFactory {
        switch (ls.base) {
        case BaseKind::Nn:
            return [space]() -> std::unique_ptr<OnlineLearner> {
                return std::make_unique<NnLearner>(space);
            };
        case BaseKind::Memorization:
            return [space]() -> std::unique_ptr<OnlineLearner> {
                return std::make_unique<MemorizationLearner>(space);
            };
        case BaseKind::Oracle: {
            auto errors = ls.oracle_errors;
            return [space, target, errors]() -> std::unique_ptr<OnlineLearner> {
                return std::make_unique<OracleLearner>(
                    space, [target](Point x) { return target(x); }, errors);
            };
        }
        }
        throw std::logic_error("unreachable");
    };

    auto binary_rule = [&]() -> BaseRule {
        if (ls.base == BaseKind::Oracle) {
            auto errors = ls.oracle_errors;
            ErrorSchedule schedule;
            if (!errors.empty())
                schedule = [errors](std::uint64_t t, const AssignmentView&) {
                    return errors.count(t) != 0;
                };
            return BaseRule::oracle([target](Point x) { return target(x).as_uint(); },
                                    std::move(schedule));
        }
        return BaseRule::honest(native_factory(ValueSpace::binary()));
    };

    BinaryToCountable::Options stack_opt;
    stack_opt.mode = ls.mode;
    stack_opt.m_max = ls.m_max;
    stack_opt.mc_replicas = ls.mc_replicas;
    stack_opt.seed = derive_seed(cfg.seed, "stack");

    switch (ls.chain) {
    case ChainKind::None: {
        out.learner = native_factory(cfg.space)();
        out.representant = dynamic_cast<RepresentantLearner*>(out.learner.get());
        break;
    }
    case ChainKind::BinaryToCountable: {
        auto stack = std::make_unique<BinaryToCountable>(binary_rule(), stack_opt);
        out.b2c = stack.get();
        out.learner = std::move(stack);
        break;
    }
    case ChainKind::BinaryToFiniteK: {
        if (ls.base == BaseKind::Oracle)
            throw std::invalid_argument("binary_to_finitek does not support oracle bases");
        auto wrap = std::make_unique<BinaryToFiniteK>(native_factory(ValueSpace::binary()),
                                                      cfg.space.num_classes());
        out.b2k = wrap.get();
        out.learner = std::move(wrap);
        break;
    }
    case ChainKind::CountableToGeneral: {
        ValueSpace space = cfg.space;
        auto errors = ls.oracle_errors;
        CountableToGeneral::LevelFactory level_factory;
        if (ls.base == BaseKind::Oracle) {
            // level k's oracle predicts the eps_k-quantized true label
            level_factory = [space, target, errors](std::size_t k) {
                double eps = CountableToGeneral::eps_level(k);
                return std::make_unique<OracleLearner>(
                    ValueSpace::countable(),
                    [space, target, eps](Point x) {
                        return Label::nat(space.quantize(eps, target(x)));
                    },
                    errors);
            };
        } else {
            LearnerFactory f = native_factory(ValueSpace::countable());
            level_factory = [f](std::size_t) { return f(); };
        }
        auto wrap = std::make_unique<CountableToGeneral>(space, ls.levels, level_factory);
        out.ctg = wrap.get();
        out.learner = std::move(wrap);
        break;
    }
    case ChainKind::Full: {
        std::unique_ptr<CountableToGeneral> wrap;
        if (ls.base == BaseKind::Oracle) {
            // each level's oracle base answers for the level-quantized target
            ValueSpace space = cfg.space;
            auto errors = ls.oracle_errors;
            ErrorSchedule schedule;
            if (!errors.empty())
                schedule = [errors](std::uint64_t t, const AssignmentView&) {
                    return errors.count(t) != 0;
                };
            auto opt = stack_opt;
            wrap = std::make_unique<CountableToGeneral>(
                space, ls.levels,
                [space, target, schedule, opt](std::size_t k) -> std::unique_ptr<OnlineLearner> {
                    double eps = CountableToGeneral::eps_level(k);
                    BaseRule rule = BaseRule::oracle(
                        [space, target, eps](Point x) { return space.quantize(eps, target(x)); },
                        schedule);
                    BinaryToCountable::Options o = opt;
                    o.seed = derive_seed(opt.seed, "stack-level", k);
                    return std::make_unique<BinaryToCountable>(rule, o);
                });
        } else {
            wrap = compose_full_stack(binary_rule(), cfg.space, ls.levels, stack_opt);
        }
        out.ctg = wrap.get();
        out.learner = std::move(wrap);
        break;
    }
    case ChainKind::GeneralToBinary: {
        auto base = native_factory(*ls.rich_space)();
        out.learner = std::make_unique<GeneralToBinary>(*ls.rich_space, std::move(base),
                                                        *ls.anchor0, *ls.anchor1);
        break;
    }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run loop

inline std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t horizon) {
    std::vector<std::uint64_t> cp;
    for (std::uint64_t t = 1; t < horizon; t *= 2) cp.push_back(t);
    cp.push_back(horizon);
    return cp;
}

/// Executes the predict-then-observe loop with every per-step bound check
/// applicable to the configured chain. Bit-reproducible given the seed.
inline LossCurve run_experiment(const ExperimentConfig& cfg) {
    BuiltLearner built = build_learner(cfg);
    const ValueSpace& space = cfg.space;

    std::optional<PartitionSpec> partition = cfg.partition;
    if (!partition && cfg.target.kind() == TargetKind::Threshold)
        partition = PartitionSpec::dyadic_around(cfg.target.threshold_at());

    bool closure_applicable = cfg.check_closure && built.representant &&
                              cfg.target.kind() == TargetKind::IntervalUnion;

    std::vector<std::uint64_t> checkpoints = geometric_checkpoints(cfg.horizon);
    std::size_t next_cp = 0;
    LossCurve curve;

    std::set<std::pair<std::int64_t, std::int64_t>> cells;
    std::set<Label> seen_labels;
    double cum_loss = 0.0;
    std::uint64_t mistakes = 0, violations = 0;

    for (std::uint64_t t = 1; t <= cfg.horizon; ++t) {
        Point x = cfg.process.next_input(t);
        std::optional<std::size_t> rep;
        if (closure_applicable) rep = built.representant->representant(x);

        Label pred = built.learner->predict(x);
        Label y = cfg.target(x);
        double step_loss = space.loss(pred, y);
        cum_loss += step_loss;
        if (pred != y) ++mistakes;
        seen_labels.insert(y);
        if (partition) cells.insert(partition->cell(x));

        if (built.b2k) {
            // finite-k mistake only if some one-vs-rest replica is mistaken
            const std::vector<int>& bits = built.b2k->last_replica_bits();
            std::uint64_t replica_mistakes = 0;
            for (std::uint64_t i = 0; i < bits.size(); ++i)
                replica_mistakes += bits[i] != (y.as_uint() == i + 1 ? 1 : 0);
            if (static_cast<std::uint64_t>(pred != y) > replica_mistakes) ++violations;
        }

        if (closure_applicable && rep) {
            Point xr = cfg.process.next_input(*rep);
            int fx = static_cast<int>(cfg.target(x).as_uint());
            int fr = static_cast<int>(cfg.target(xr).as_uint());
            if ((fx != fr) != ((1 - fx) != (1 - fr))) ++violations;
            std::uint64_t component_mistakes = 0;
            for (const auto& [lo, hi] : cfg.target.intervals()) {
                int ax = x >= static_cast<Point>(lo) && x <= static_cast<Point>(hi);
                int ar = xr >= static_cast<Point>(lo) && xr <= static_cast<Point>(hi);
                component_mistakes += ax != ar;
            }
            if (static_cast<std::uint64_t>(fx != fr) > component_mistakes) ++violations;
        }

        built.learner->observe(x, y);

        if (built.ctg) {
            const auto& info = built.ctg->last_step();
            const auto& h = built.ctg->last_quantized();
            double ell_bar = space.ell_bar();
            std::size_t max_correct = 0;
            for (std::size_t k = 1; k <= built.ctg->num_levels(); ++k) {
                double eps = CountableToGeneral::eps_level(k);
                // each level's own output stays within eps of the truth
                // whenever its countable prediction hits the quantized label
                double level_loss = space.loss(space.dense_point(info.clamped[k - 1]), y);
                double slack = info.raw[k - 1] == h[k - 1] ? 0.0 : ell_bar;
                if (level_loss > eps + slack) ++violations;
                if (max_correct == k - 1 && info.raw[k - 1] == h[k - 1]) max_correct = k;
            }
            if (max_correct >= 1) {
                double eps = CountableToGeneral::eps_level(max_correct);
                if (step_loss > 2.0 * space.c_ell() * eps) ++violations;
            }
        }

        while (next_cp < checkpoints.size() && checkpoints[next_cp] == t) {
            std::uint64_t replicas = 1;
            if (built.b2c) replicas = built.b2c->replica_count();
            if (built.b2k) replicas = built.b2k->num_classes();
            if (built.ctg) {
                replicas = 0;
                for (std::size_t k = 1; k <= built.ctg->num_levels(); ++k) {
                    auto* stack = dynamic_cast<BinaryToCountable*>(&built.ctg->level(k));
                    replicas += stack ? stack->replica_count() : 1;
                }
            }
            curve.rows.push_back({t, cum_loss / static_cast<double>(t), mistakes,
                                  partition ? cells.size() : 0, seen_labels.size(), replicas,
                                  violations});
            ++next_cp;
        }
    }
    return curve;
}

// ---------------------------------------------------------------------------
// CSV output (bit-exact schema)

inline std::string to_csv(const LossCurve& curve) {
    std::string out = "T,avg_loss,mistakes,new_cells,distinct_labels,replicas,violations\n";
    char buf[512];
    for (const LossCurveRow& r : curve.rows) {
        std::snprintf(buf, sizeof(buf), "%llu,%.17g,%llu,%llu,%llu,%llu,%llu\n",
                      static_cast<unsigned long long>(r.horizon), r.avg_loss,
                      static_cast<unsigned long long>(r.mistakes),
                      static_cast<unsigned long long>(r.new_cells),
                      static_cast<unsigned long long>(r.distinct_labels),
                      static_cast<unsigned long long>(r.replicas),
                      static_cast<unsigned long long>(r.violations));
        out += buf;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sweep: independent replicas, output order matches input order

struct SweepResult {
    std::string name;
    std::optional<LossCurve> curve;
    std::string error;
};

inline std::vector<SweepResult> sweep(const std::vector<std::pair<std::string, ExperimentConfig>>& configs,
                                      std::size_t parallelism) {
    if (parallelism < 1) throw std::invalid_argument("sweep: parallelism must be >= 1");
    std::vector<SweepResult> results(configs.size());
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= configs.size()) return;
            results[i].name = configs[i].first;
            try {
                results[i].curve = run_experiment(configs[i].second);
            } catch (const std::exception& e) {
                results[i].error = e.what();
            }
        }
    };
    if (parallelism == 1 || configs.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        std::size_t n = std::min(parallelism, configs.size());
        for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return results;
}

} // namespace uol
