#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "basics.hpp"

namespace uol {

/// Sequential predict-then-observe learner over a fixed value space.
/// At step t the prediction may depend on (x_{<t}, y_{<t}, x_t) only;
/// observe(x_t, y_t) must follow each predict exactly once, in order.
class OnlineLearner {
public:
    virtual ~OnlineLearner() = default;

    virtual Label predict(Point x) = 0;
    virtual void observe(Point x, const Label& y) = 0;

    /// Deep copy of the full internal state.
    virtual std::unique_ptr<OnlineLearner> clone() const = 0;
};

using LearnerFactory = std::function<std::unique_ptr<OnlineLearner>()>;

/// Learner whose prediction echoes the label of one history index chosen
/// from the input points alone (nearest neighbor, memorization).
class RepresentantLearner : public OnlineLearner {
public:
    /// 1-based index in {1..t-1} whose label would be echoed for input x,
    /// or nullopt on empty history. Never depends on observed labels.
    virtual std::optional<std::size_t> representant(Point x) const = 0;
};

} // namespace uol
