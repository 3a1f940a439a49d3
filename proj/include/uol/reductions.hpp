#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "basics.hpp"
#include "interval_set.hpp"
#include "learner.hpp"
#include "rng.hpp"
#include "value_space.hpp"

namespace uol {

// ---------------------------------------------------------------------------
// General-to-binary wrapper: map bits to two anchor labels, decode by loss
// comparison (ties to 0).

class GeneralToBinary final : public OnlineLearner {
public:
    GeneralToBinary(ValueSpace rich_space, std::unique_ptr<OnlineLearner> base, Label y0, Label y1)
        : space_(std::move(rich_space)), base_(std::move(base)), y0_(std::move(y0)),
          y1_(std::move(y1)) {
        if (!(space_.loss(y0_, y1_) > 0.0))
            throw std::invalid_argument("GeneralToBinary: anchor labels must be distinct");
    }

    Label predict(Point x) override {
        Label p = base_->predict(x);
        return Label::bit(space_.loss(p, y0_) <= space_.loss(p, y1_) ? 0 : 1);
    }

    void observe(Point x, const Label& y) override {
        if (y.kind() != LabelKind::Bit)
            throw std::invalid_argument("GeneralToBinary: labels must be bits");
        base_->observe(x, y.as_uint() == 0 ? y0_ : y1_);
    }

    std::unique_ptr<OnlineLearner> clone() const override {
        auto c = std::make_unique<GeneralToBinary>(space_, base_->clone(), y0_, y1_);
        return c;
    }

private:
    ValueSpace space_;
    std::unique_ptr<OnlineLearner> base_;
    Label y0_, y1_;
};

// ---------------------------------------------------------------------------
// Binary-to-finite-k wrapper: k one-vs-rest replicas, argmax with ties to the
// smallest class.

class BinaryToFiniteK final : public OnlineLearner {
public:
    BinaryToFiniteK(LearnerFactory base_factory, std::uint64_t k) : k_(k) {
        if (k < 2) throw std::invalid_argument("BinaryToFiniteK: k must be >= 2");
        for (std::uint64_t i = 0; i < k; ++i) replicas_.push_back(base_factory());
    }

    Label predict(Point x) override {
        last_bits_.clear();
        std::uint64_t winner = 1;
        int best = -1;
        for (std::uint64_t i = 0; i < k_; ++i) {
            int b = static_cast<int>(replicas_[i]->predict(x).as_uint());
            last_bits_.push_back(b);
            if (b > best) {
                best = b;
                winner = i + 1;
            }
        }
        return Label::cls(winner);
    }

    void observe(Point x, const Label& y) override {
        if (y.kind() != LabelKind::Class || y.as_uint() > k_)
            throw std::invalid_argument("BinaryToFiniteK: labels must be classes in [k]");
        for (std::uint64_t i = 0; i < k_; ++i)
            replicas_[i]->observe(x, Label::bit(y.as_uint() == i + 1 ? 1 : 0));
    }

    std::unique_ptr<OnlineLearner> clone() const override {
        auto c = std::unique_ptr<BinaryToFiniteK>(new BinaryToFiniteK(k_));
        for (const auto& r : replicas_) c->replicas_.push_back(r->clone());
        c->last_bits_ = last_bits_;
        return c;
    }

    /// Replica predictions from the most recent predict call, class order.
    const std::vector<int>& last_replica_bits() const { return last_bits_; }
    std::uint64_t num_classes() const { return k_; }

private:
    explicit BinaryToFiniteK(std::uint64_t k) : k_(k) {}

    std::uint64_t k_;
    std::vector<std::unique_ptr<OnlineLearner>> replicas_;
    std::vector<int> last_bits_;
};

// ---------------------------------------------------------------------------
// Binary-to-countable stack (random-subset test, 3/4 threshold rule)

/// A replica's sigma assignment: the bit attached to a raw label, when the
/// replica has one.
class AssignmentView {
public:
    virtual ~AssignmentView() = default;
    virtual std::optional<int> bit_for(std::uint64_t label) const = 0;
};

/// Error schedule for oracle bases: whether the replica errs at `step`,
/// possibly depending on its assignment (so sigma-averaged error rates can
/// be dialed exactly).
using ErrorSchedule = std::function<bool(std::uint64_t step, const AssignmentView&)>;

/// One base replica's prediction. In exact mode, when the rule consulted the
/// sigma bit of a label outside its assignment, coin_label names that label
/// and the prediction equals its coin (negated when flip) — bit is unused.
/// In Monte Carlo mode bit is always realized and coin_label is only a hint
/// for candidate discovery.
struct BasePrediction {
    int bit = 0;
    std::optional<std::uint64_t> coin_label;
    bool flip = false;
};

class BinaryBase {
public:
    virtual ~BinaryBase() = default;
    virtual BasePrediction predict(Point x) = 0;
    virtual void observe(Point x, int bit) = 0;
    /// Duplicate, assigning `bit` to a label newly added to the enumeration.
    virtual std::unique_ptr<BinaryBase> fork(std::uint64_t label, int bit) const = 0;
    virtual std::unique_ptr<BinaryBase> clone() const = 0;
};

namespace detail {

/// Ordinary learner: sees only inputs and bits, never a sigma assignment.
class HonestBase final : public BinaryBase {
public:
    explicit HonestBase(std::unique_ptr<OnlineLearner> learner) : learner_(std::move(learner)) {}

    BasePrediction predict(Point x) override {
        return {static_cast<int>(learner_->predict(x).as_uint()), std::nullopt, false};
    }

    void observe(Point x, int bit) override { learner_->observe(x, Label::bit(bit)); }

    std::unique_ptr<BinaryBase> fork(std::uint64_t, int) const override { return clone(); }

    std::unique_ptr<BinaryBase> clone() const override {
        return std::make_unique<HonestBase>(learner_->clone());
    }

private:
    std::unique_ptr<OnlineLearner> learner_;
};

/// Exact-mode oracle: predicts the sigma bit of the true label (flipped at
/// scheduled steps). Consulting a label outside the assignment surfaces as a
/// coin prediction so the enumeration can marginalize it.
class ExactOracleBase final : public BinaryBase, public AssignmentView {
public:
    ExactOracleBase(std::function<std::uint64_t(Point)> target, ErrorSchedule schedule)
        : target_(std::move(target)), schedule_(std::move(schedule)) {}

    std::optional<int> bit_for(std::uint64_t label) const override {
        auto it = bits_.find(label);
        if (it == bits_.end()) return std::nullopt;
        return it->second;
    }

    BasePrediction predict(Point x) override {
        std::uint64_t truth = target_(x);
        bool err = schedule_ && schedule_(t_ + 1, *this);
        auto b = bit_for(truth);
        if (b) return {*b ^ (err ? 1 : 0), std::nullopt, false};
        return {0, truth, err};
    }

    void observe(Point, int) override { ++t_; }

    std::unique_ptr<BinaryBase> fork(std::uint64_t label, int bit) const override {
        auto c = std::make_unique<ExactOracleBase>(*this);
        c->bits_[label] = bit;
        return c;
    }

    std::unique_ptr<BinaryBase> clone() const override {
        return std::make_unique<ExactOracleBase>(*this);
    }

private:
    std::function<std::uint64_t(Point)> target_;
    ErrorSchedule schedule_;
    std::map<std::uint64_t, int> bits_;
    std::uint64_t t_ = 0;
};

/// Monte Carlo oracle: the sigma coins are realized lazily from the replica
/// stream, keyed by label value so draw order never matters.
class McOracleBase final : public BinaryBase, public AssignmentView {
public:
    McOracleBase(std::function<std::uint64_t(Point)> target, ErrorSchedule schedule,
                 std::uint64_t stream_seed)
        : target_(std::move(target)), schedule_(std::move(schedule)), stream_(stream_seed) {}

    std::optional<int> bit_for(std::uint64_t label) const override {
        return coin_bit(stream_, label);
    }

    BasePrediction predict(Point x) override {
        std::uint64_t truth = target_(x);
        bool err = schedule_ && schedule_(t_ + 1, *this);
        int bit = coin_bit(stream_, truth) ^ (err ? 1 : 0);
        return {bit, truth, err};
    }

    void observe(Point, int) override { ++t_; }

    std::unique_ptr<BinaryBase> fork(std::uint64_t, int) const override { return clone(); }

    std::unique_ptr<BinaryBase> clone() const override {
        return std::make_unique<McOracleBase>(*this);
    }

private:
    std::function<std::uint64_t(Point)> target_;
    ErrorSchedule schedule_;
    std::uint64_t stream_;
    std::uint64_t t_ = 0;
};

} // namespace detail

/// Base binary rule for a reduction stack: either a factory of honest
/// learners, or an oracle test double defined by a target and an error
/// schedule.
class BaseRule {
public:
    static BaseRule honest(LearnerFactory factory) {
        BaseRule r;
        r.factory_ = std::move(factory);
        return r;
    }

    static BaseRule oracle(std::function<std::uint64_t(Point)> target,
                           ErrorSchedule schedule = {}) {
        BaseRule r;
        r.oracle_target_ = std::move(target);
        r.oracle_schedule_ = std::move(schedule);
        return r;
    }

    bool is_oracle() const { return static_cast<bool>(oracle_target_); }

    std::unique_ptr<BinaryBase> make_exact() const {
        if (is_oracle())
            return std::make_unique<detail::ExactOracleBase>(oracle_target_, oracle_schedule_);
        return std::make_unique<detail::HonestBase>(factory_());
    }

    std::unique_ptr<BinaryBase> make_mc(std::uint64_t stream_seed) const {
        if (is_oracle())
            return std::make_unique<detail::McOracleBase>(oracle_target_, oracle_schedule_,
                                                          stream_seed);
        return std::make_unique<detail::HonestBase>(factory_());
    }

private:
    BaseRule() = default;
    LearnerFactory factory_;
    std::function<std::uint64_t(Point)> oracle_target_;
    ErrorSchedule oracle_schedule_;
};

enum class StackMode : std::uint8_t { Exact, MonteCarlo };

/// Countable-classification learner built on a binary rule. Exact mode
/// enumerates one base replica per subset assignment of the observed labels
/// (2^m replicas, spawned lazily); Monte Carlo mode keeps M sampled subsets
/// with persisted coins. Predicts the least label whose consistency score
/// exceeds 3/4, or 0 when none does.
class BinaryToCountable final : public OnlineLearner {
public:
    struct Options {
        StackMode mode = StackMode::Exact;
        std::size_t m_max = 16;      // exact-mode cap on distinct labels
        std::size_t mc_replicas = 0; // M, Monte Carlo mode only
        std::uint64_t seed = 0;      // Monte Carlo stream seed
    };

    BinaryToCountable(BaseRule rule, Options opt) : rule_(std::move(rule)), opt_(opt) {
        if (opt_.mode == StackMode::Exact) {
            if (opt_.m_max < 1 || opt_.m_max > 24)
                throw std::invalid_argument("BinaryToCountable: m_max must be in [1, 24]");
            replicas_.push_back(rule_.make_exact());
        } else {
            if (opt_.mc_replicas == 0)
                throw std::invalid_argument("BinaryToCountable: Monte Carlo mode needs M >= 1");
            for (std::size_t j = 0; j < opt_.mc_replicas; ++j) {
                seeds_.push_back(derive_seed(opt_.seed, "sigma-replica", j));
                replicas_.push_back(rule_.make_mc(seeds_.back()));
            }
        }
    }

    BinaryToCountable(const BinaryToCountable& o)
        : rule_(o.rule_), opt_(o.opt_), label_order_(o.label_order_), pos_(o.pos_),
          observed_(o.observed_), seeds_(o.seeds_), xs_(o.xs_), ys_(o.ys_), t_(o.t_) {
        for (const auto& r : o.replicas_) replicas_.push_back(r->clone());
    }

    Label predict(Point x) override { return Label::nat(predict_nat(x)); }

    std::uint64_t predict_nat(Point x) {
        auto preds = pass(x);
        for (std::uint64_t i : candidate_labels(preds))
            if (p_value(preds, i) > 0.75) return i;
        return 0;
    }

    void observe(Point x, const Label& y) override {
        if (y.kind() != LabelKind::Nat)
            throw std::invalid_argument("BinaryToCountable: labels must be naturals");
        std::uint64_t v = y.as_uint();
        if (!observed_.count(v)) spawn(v);
        if (opt_.mode == StackMode::Exact) {
            std::size_t q = pos_.at(v);
            for (std::size_t mask = 0; mask < replicas_.size(); ++mask)
                replicas_[mask]->observe(x, static_cast<int>((mask >> q) & 1));
        } else {
            for (std::size_t j = 0; j < replicas_.size(); ++j)
                replicas_[j]->observe(x, coin_bit(seeds_[j], v));
        }
        xs_.push_back(x);
        ys_.push_back(v);
        ++t_;
    }

    std::unique_ptr<OnlineLearner> clone() const override {
        return std::make_unique<BinaryToCountable>(*this);
    }

    /// Exact sigma-averaged consistency score of hypothesis "the label is i".
    double compute_p_exact(Point x, std::uint64_t i) {
        if (opt_.mode != StackMode::Exact)
            throw std::invalid_argument("compute_p_exact: stack is in Monte Carlo mode");
        auto preds = pass(x);
        return p_value(preds, i);
    }

    /// Unbiased M-replica estimate of the same score; deterministic given the
    /// stack seed.
    double compute_p_mc(Point x, std::uint64_t i) {
        if (opt_.mode != StackMode::MonteCarlo)
            throw std::invalid_argument("compute_p_mc: stack is in exact mode");
        auto preds = pass(x);
        return p_value(preds, i);
    }

    StackMode mode() const { return opt_.mode; }
    std::size_t distinct_labels() const { return observed_.size(); }
    std::size_t replica_count() const { return replicas_.size(); }
    const std::set<std::uint64_t>& observed_labels() const { return observed_; }
    const std::vector<Point>& history_inputs() const { return xs_; }
    const std::vector<std::uint64_t>& history_labels() const { return ys_; }

    /// Candidate labels the 3/4 test inspects at input x (observed labels
    /// plus any label whose coin an oracle base consulted).
    std::set<std::uint64_t> candidates(Point x) {
        auto preds = pass(x);
        return candidate_labels(preds);
    }

private:
    std::vector<BasePrediction> pass(Point x) {
        std::vector<BasePrediction> preds;
        preds.reserve(replicas_.size());
        for (auto& r : replicas_) preds.push_back(r->predict(x));
        return preds;
    }

    std::set<std::uint64_t> candidate_labels(const std::vector<BasePrediction>& preds) const {
        std::set<std::uint64_t> cand = observed_;
        for (const auto& p : preds)
            if (p.coin_label) cand.insert(*p.coin_label);
        return cand;
    }

    double p_value(const std::vector<BasePrediction>& preds, std::uint64_t i) const {
        double acc = 0.0;
        if (opt_.mode == StackMode::Exact) {
            auto it = pos_.find(i);
            if (it != pos_.end()) {
                std::size_t q = it->second;
                for (std::size_t mask = 0; mask < preds.size(); ++mask) {
                    const BasePrediction& pr = preds[mask];
                    if (pr.coin_label)
                        acc += 0.5; // independent coin, matches b_i half the time
                    else
                        acc += pr.bit == static_cast<int>((mask >> q) & 1) ? 1.0 : 0.0;
                }
            } else {
                for (const BasePrediction& pr : preds) {
                    if (pr.coin_label && *pr.coin_label == i)
                        acc += pr.flip ? 0.0 : 1.0; // the prediction is this very coin
                    else
                        acc += 0.5;
                }
            }
        } else {
            for (std::size_t j = 0; j < preds.size(); ++j)
                acc += preds[j].bit == coin_bit(seeds_[j], i) ? 1.0 : 0.0;
        }
        return acc / static_cast<double>(preds.size());
    }

    void spawn(std::uint64_t label) {
        if (opt_.mode == StackMode::Exact) {
            std::size_t m = label_order_.size();
            if (m >= opt_.m_max) {
                std::ostringstream os;
                os << "exact enumeration over " << (m + 1) << " distinct labels exceeds m_max="
                   << opt_.m_max << "; use Monte Carlo mode";
                throw capacity_error(os.str());
            }
            pos_[label] = m;
            label_order_.push_back(label);
            std::vector<std::unique_ptr<BinaryBase>> next(replicas_.size() * 2);
            for (std::size_t mask = 0; mask < replicas_.size(); ++mask) {
                next[mask] = replicas_[mask]->fork(label, 0);
                next[mask | (std::size_t{1} << m)] = replicas_[mask]->fork(label, 1);
            }
            replicas_ = std::move(next);
        }
        observed_.insert(label);
    }

    BaseRule rule_;
    Options opt_;
    std::vector<std::unique_ptr<BinaryBase>> replicas_; // exact: indexed by assignment mask
    std::vector<std::uint64_t> label_order_;            // first-appearance order
    std::map<std::uint64_t, std::size_t> pos_;          // label -> mask bit
    std::set<std::uint64_t> observed_;
    std::vector<std::uint64_t> seeds_; // Monte Carlo replica streams
    std::vector<Point> xs_;            // raw trace, re-derivable encodings
    std::vector<std::uint64_t> ys_;
    std::uint64_t t_ = 0;
};

// ---------------------------------------------------------------------------
// Representant shortcut (rules transported by the construction)

/// Countable-label learner echoing the representant's raw label; equals the
/// binary-to-countable construction applied to the same representant rule,
/// step by step.
class RepresentantShortcut final : public OnlineLearner {
public:
    explicit RepresentantShortcut(std::unique_ptr<RepresentantLearner> rule)
        : rule_(std::move(rule)) {}

    Label predict(Point x) override {
        auto r = rule_->representant(x);
        return r ? ys_[*r - 1] : Label::nat(0);
    }

    void observe(Point x, const Label& y) override {
        ys_.push_back(y);
        rule_->observe(x, y);
    }

    std::unique_ptr<OnlineLearner> clone() const override {
        auto cloned = rule_->clone();
        auto* rep = dynamic_cast<RepresentantLearner*>(cloned.get());
        if (!rep) throw std::logic_error("RepresentantShortcut: clone lost representant type");
        cloned.release();
        auto c = std::make_unique<RepresentantShortcut>(std::unique_ptr<RepresentantLearner>(rep));
        c->ys_ = ys_;
        return c;
    }

private:
    std::unique_ptr<RepresentantLearner> rule_;
    std::vector<Label> ys_;
};

// ---------------------------------------------------------------------------
// Countable-to-general wrapper (quantizer levels, ball-set consistency)

/// Learner over (Y, l) built from countable-classification learners at
/// levels eps_k = 2^-k, k = 1..K. Each level is trained on quantized labels;
/// the prediction follows the deepest level whose ball regions still have a
/// consistent intersection. A level emitting the fallback label 0 is read as
/// dense index 1 (for every built-in space, y^1 is the default label).
class CountableToGeneral final : public OnlineLearner {
public:
    using LevelFactory = std::function<std::unique_ptr<OnlineLearner>(std::size_t level)>;

    struct StepInfo {
        std::vector<std::uint64_t> raw;     // level predictions as emitted
        std::vector<std::uint64_t> clamped; // 0 mapped to dense index 1
        std::size_t p_hat = 0;
        Label prediction;
    };

    CountableToGeneral(ValueSpace space, std::size_t levels, const LevelFactory& make_level)
        : space_(std::move(space)), region_cache_(levels) {
        if (levels < 1) throw std::invalid_argument("CountableToGeneral: need K >= 1 levels");
        for (std::size_t k = 1; k <= levels; ++k) levels_.push_back(make_level(k));
    }

    CountableToGeneral(const CountableToGeneral& o)
        : space_(o.space_), step_(o.step_), last_h_(o.last_h_),
          region_cache_(o.region_cache_) {
        for (const auto& l : o.levels_) levels_.push_back(l->clone());
    }

    static double eps_level(std::size_t k) { return std::ldexp(1.0, -static_cast<int>(k)); }

    Label predict(Point x) override {
        std::size_t K = levels_.size();
        step_ = StepInfo{};
        for (std::size_t k = 0; k < K; ++k) {
            Label raw = levels_[k]->predict(x);
            step_.raw.push_back(raw.as_uint());
            step_.clamped.push_back(std::max<std::uint64_t>(raw.as_uint(), 1));
        }
        std::size_t p_hat = 1;
        if (space_.is_indicator()) {
            auto acc = space_.discrete_region(step_.clamped[0], eps_level(1));
            for (std::size_t p = 2; p <= K; ++p) {
                auto next = intersect_discrete(
                    acc, space_.discrete_region(step_.clamped[p - 1], eps_level(p)));
                if (next.kind == ValueSpace::DiscreteRegion::Kind::Empty) break;
                acc = next;
                p_hat = p;
            }
        } else {
            IntervalSet acc = region(1, step_.clamped[0]);
            for (std::size_t p = 2; p <= K; ++p) {
                IntervalSet next = acc.intersect(region(p, step_.clamped[p - 1]));
                if (next.empty()) break;
                acc = std::move(next);
                p_hat = p;
            }
        }
        step_.p_hat = p_hat;
        step_.prediction = space_.dense_point(step_.clamped[p_hat - 1]);
        return step_.prediction;
    }

    void observe(Point x, const Label& y) override {
        space_.check_label(y);
        last_h_.clear();
        for (std::size_t k = 0; k < levels_.size(); ++k) {
            std::uint64_t h = space_.quantize(eps_level(k + 1), y);
            last_h_.push_back(h);
            levels_[k]->observe(x, Label::nat(h));
        }
    }

    std::unique_ptr<OnlineLearner> clone() const override {
        return std::make_unique<CountableToGeneral>(*this);
    }

    std::size_t num_levels() const { return levels_.size(); }
    const ValueSpace& space() const { return space_; }
    const StepInfo& last_step() const { return step_; }
    /// h_{eps_k}(y_t) for the most recent observation, k = 1..K.
    const std::vector<std::uint64_t>& last_quantized() const { return last_h_; }
    OnlineLearner& level(std::size_t k) { return *levels_[k - 1]; }

private:
    const IntervalSet& region(std::size_t level, std::uint64_t i) {
        auto& cache = region_cache_[level - 1];
        auto it = cache.find(i);
        if (it == cache.end())
            it = cache.emplace(i, space_.real_region(i, eps_level(level))).first;
        return it->second;
    }

    static ValueSpace::DiscreteRegion intersect_discrete(const ValueSpace::DiscreteRegion& a,
                                                         const ValueSpace::DiscreteRegion& b) {
        using K = ValueSpace::DiscreteRegion::Kind;
        if (a.kind == K::Empty || b.kind == K::Empty) return {K::Empty, Label()};
        if (a.kind == K::All) return b;
        if (b.kind == K::All) return a;
        return a.label == b.label ? a : ValueSpace::DiscreteRegion{K::Empty, Label()};
    }

    ValueSpace space_;
    std::vector<std::unique_ptr<OnlineLearner>> levels_;
    StepInfo step_;
    std::vector<std::uint64_t> last_h_;
    std::vector<std::map<std::uint64_t, IntervalSet>> region_cache_;
};

// ---------------------------------------------------------------------------
// Full composition: binary -> countable -> (Y, l). Never consults the input
// process.

inline std::unique_ptr<CountableToGeneral>
compose_full_stack(BaseRule rule, ValueSpace space, std::size_t levels,
                   BinaryToCountable::Options opt) {
    return std::make_unique<CountableToGeneral>(
        std::move(space), levels, [rule, opt](std::size_t level) -> std::unique_ptr<OnlineLearner> {
            BinaryToCountable::Options o = opt;
            o.seed = derive_seed(opt.seed, "stack-level", level);
            return std::make_unique<BinaryToCountable>(rule, o);
        });
}

} // namespace uol
