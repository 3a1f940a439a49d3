#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "basics.hpp"
#include "learner.hpp"
#include "value_space.hpp"

namespace uol {

/// 1-nearest-neighbor on the real line. Predicts the label of the closest
/// past input, splitting ties in favor of the most ancient closest point;
/// exact floating-point comparisons, full history, no pruning.
class NnLearner final : public RepresentantLearner {
public:
    explicit NnLearner(ValueSpace space) : space_(std::move(space)) {}

    std::optional<std::size_t> representant(Point x) const override {
        if (xs_.empty()) return std::nullopt;
        std::size_t best = 0;
        Point best_d = std::fabs(x - xs_[0]);
        for (std::size_t i = 1; i < xs_.size(); ++i) {
            Point d = std::fabs(x - xs_[i]);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best + 1;
    }

    Label predict(Point x) override {
        auto r = representant(x);
        return r ? ys_[*r - 1] : space_.default_label();
    }

    void observe(Point x, const Label& y) override {
        xs_.push_back(x);
        ys_.push_back(y);
    }

    std::unique_ptr<OnlineLearner> clone() const override {
        return std::make_unique<NnLearner>(*this);
    }

    std::size_t history_size() const { return xs_.size(); }

private:
    ValueSpace space_;
    std::vector<Point> xs_;
    std::vector<Label> ys_;
};

/// Nearest neighbor over an arbitrary point type with a caller-supplied
/// distance. Same rule and tie convention as NnLearner; the built-in
/// processes emit scalars, so this stays a template utility.
template <class P>
class NnGeneric {
public:
    using Distance = std::function<double(const P&, const P&)>;

    NnGeneric(Label default_label, Distance dist)
        : default_label_(std::move(default_label)), dist_(std::move(dist)) {}

    std::optional<std::size_t> representant(const P& x) const {
        if (xs_.empty()) return std::nullopt;
        std::size_t best = 0;
        double best_d = dist_(x, xs_[0]);
        for (std::size_t i = 1; i < xs_.size(); ++i) {
            double d = dist_(x, xs_[i]);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best + 1;
    }

    Label predict(const P& x) const {
        auto r = representant(x);
        return r ? ys_[*r - 1] : default_label_;
    }

    void observe(const P& x, const Label& y) {
        xs_.push_back(x);
        ys_.push_back(y);
    }

private:
    Label default_label_;
    Distance dist_;
    std::vector<P> xs_;
    std::vector<Label> ys_;
};

/// Replays the label of the earliest exact occurrence of the query point;
/// default label otherwise.
class MemorizationLearner final : public RepresentantLearner {
public:
    explicit MemorizationLearner(ValueSpace space) : space_(std::move(space)) {}

    std::optional<std::size_t> representant(Point x) const override {
        auto it = seen_.find(x);
        if (it == seen_.end()) return std::nullopt;
        return it->second.first;
    }

    Label predict(Point x) override {
        auto it = seen_.find(x);
        return it == seen_.end() ? space_.default_label() : it->second.second;
    }

    void observe(Point x, const Label& y) override {
        ++t_;
        seen_.emplace(x, std::make_pair(t_, y)); // earliest occurrence wins
    }

    std::unique_ptr<OnlineLearner> clone() const override {
        return std::make_unique<MemorizationLearner>(*this);
    }

private:
    ValueSpace space_;
    std::size_t t_ = 0;
    std::map<Point, std::pair<std::size_t, Label>> seen_;
};

/// Label at maximal loss from y within the space: the flipped bit, the next
/// class cyclically, y+1 for naturals, the farther interval endpoint.
inline Label worst_label(const ValueSpace& space, const Label& y) {
    switch (space.kind()) {
    case SpaceKind::Binary: return Label::bit(y.as_uint() == 0 ? 1 : 0);
    case SpaceKind::Finite: return Label::cls(y.as_uint() % space.num_classes() + 1);
    case SpaceKind::Countable: return Label::nat(y.as_uint() + 1);
    case SpaceKind::RealInterval: {
        double d_lo = std::fabs(y.as_real() - space.lo());
        double d_hi = std::fabs(y.as_real() - space.hi());
        return Label::real(d_lo >= d_hi ? space.lo() : space.hi());
    }
    }
    throw std::logic_error("unreachable");
}

/// Test double: predicts the true label except at scheduled steps, where it
/// predicts a label at maximal loss from the truth. Deterministic.
class OracleLearner final : public OnlineLearner {
public:
    OracleLearner(ValueSpace space, std::function<Label(Point)> target,
                  std::set<std::uint64_t> error_steps = {})
        : space_(std::move(space)), target_(std::move(target)),
          error_steps_(std::move(error_steps)) {}

    Label predict(Point x) override {
        Label truth = target_(x);
        return error_steps_.count(t_ + 1) ? worst_label(space_, truth) : truth;
    }

    void observe(Point, const Label&) override { ++t_; }

    std::unique_ptr<OnlineLearner> clone() const override {
        return std::make_unique<OracleLearner>(*this);
    }

private:
    ValueSpace space_;
    std::function<Label(Point)> target_;
    std::set<std::uint64_t> error_steps_;
    std::uint64_t t_ = 0;
};

} // namespace uol
