#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "basics.hpp"
#include "interval_set.hpp"

namespace uol {

enum class SpaceKind : std::uint8_t { Binary, Finite, Countable, RealInterval };

enum class RealLossKind : std::uint8_t { Absolute, Squared };

inline const char* to_string(SpaceKind k) {
    switch (k) {
    case SpaceKind::Binary: return "binary";
    case SpaceKind::Finite: return "finite";
    case SpaceKind::Countable: return "countable";
    case SpaceKind::RealInterval: return "real_interval";
    }
    return "?";
}

/// An output space (Y, l): bounded near-metric loss, dense sequence y^i,
/// eps-quantizer and exact ball-region arithmetic. Immutable after
/// construction; every operation is a pure function of its inputs.
class ValueSpace {
public:
    static ValueSpace binary() { return ValueSpace(SpaceKind::Binary); }

    static ValueSpace finite(std::uint64_t k) {
        if (k < 2) throw std::invalid_argument("ValueSpace::finite: k must be >= 2");
        ValueSpace s(SpaceKind::Finite);
        s.k_ = k;
        return s;
    }

    static ValueSpace countable() { return ValueSpace(SpaceKind::Countable); }

    static ValueSpace real_interval(double lo, double hi,
                                    RealLossKind loss = RealLossKind::Absolute) {
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
            throw std::invalid_argument("ValueSpace::real_interval: need finite lo < hi");
        ValueSpace s(SpaceKind::RealInterval);
        s.lo_ = lo;
        s.hi_ = hi;
        s.real_loss_ = loss;
        return s;
    }

    SpaceKind kind() const { return kind_; }
    std::uint64_t num_classes() const { return k_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    RealLossKind real_loss() const { return real_loss_; }
    std::uint64_t index_cap() const { return index_cap_; }
    void set_index_cap(std::uint64_t cap) { index_cap_ = cap; }

    /// Relaxed-triangle constant. Declared per space, checked by the
    /// property suite: 1 for indicator and absolute losses, 2 for squared.
    double c_ell() const {
        return (kind_ == SpaceKind::RealInterval && real_loss_ == RealLossKind::Squared) ? 2.0
                                                                                         : 1.0;
    }

    /// Loss supremum over the space.
    double ell_bar() const {
        if (kind_ != SpaceKind::RealInterval) return 1.0;
        double w = hi_ - lo_;
        return real_loss_ == RealLossKind::Absolute ? w : w * w;
    }

    bool is_indicator() const { return kind_ != SpaceKind::RealInterval; }

    Label default_label() const { return dense_point(1); }

    void check_label(const Label& y) const {
        bool ok = false;
        switch (kind_) {
        case SpaceKind::Binary: ok = y.kind() == LabelKind::Bit; break;
        case SpaceKind::Finite:
            ok = y.kind() == LabelKind::Class && y.as_uint() >= 1 && y.as_uint() <= k_;
            break;
        case SpaceKind::Countable: ok = y.kind() == LabelKind::Nat; break;
        case SpaceKind::RealInterval:
            ok = y.kind() == LabelKind::Real && y.as_real() >= lo_ && y.as_real() <= hi_;
            break;
        }
        if (!ok) {
            std::ostringstream os;
            os << "label " << y.str() << " (" << to_string(y.kind())
               << ") does not belong to space " << to_string(kind_);
            throw std::invalid_argument(os.str());
        }
    }

    double loss(const Label& a, const Label& b) const {
        check_label(a);
        check_label(b);
        if (is_indicator()) return a == b ? 0.0 : 1.0;
        double d = a.as_real() - b.as_real();
        return real_loss_ == RealLossKind::Absolute ? std::fabs(d) : d * d;
    }

    /// i-th point of the built-in dense sequence, i >= 1. Binary and finite
    /// kinds enumerate all labels then repeat the last; the countable kind
    /// enumerates 0, 1, 2, ...; real intervals use the dyadic enumeration
    /// (midpoint, then quarter points, then eighth points, left to right).
    Label dense_point(std::uint64_t i) const {
        if (i == 0) throw std::invalid_argument("dense_point: indices are 1-based");
        switch (kind_) {
        case SpaceKind::Binary: return Label::bit(i == 1 ? 0 : 1);
        case SpaceKind::Finite: return Label::cls(i <= k_ ? i : k_);
        case SpaceKind::Countable: return Label::nat(i - 1);
        case SpaceKind::RealInterval: {
            unsigned g = std::bit_width(i); // generation, i in [2^(g-1), 2^g)
            std::uint64_t j = i - (std::uint64_t{1} << (g - 1));
            double spacing = (hi_ - lo_) / static_cast<double>(std::uint64_t{1} << (g - 1));
            return Label::real(lo_ + (static_cast<double>(j) + 0.5) * spacing);
        }
        }
        throw std::logic_error("unreachable");
    }

    /// h_eps: least index i with l(y^i, y) < eps. Closed form per kind;
    /// throws density_error past the index cap.
    std::uint64_t quantize(double eps, const Label& y) const {
        if (!(eps > 0.0)) throw std::invalid_argument("quantize: eps must be > 0");
        check_label(y);
        if (is_indicator()) {
            if (eps > 1.0) return 1;
            switch (kind_) {
            case SpaceKind::Binary: return y.as_uint() + 1;
            case SpaceKind::Finite: return y.as_uint();
            default: return y.as_uint() + 1; // countable
            }
        }
        const double r = ball_radius(eps);
        const double w = hi_ - lo_;
        const double x = y.as_real();
        for (unsigned g = 1;; ++g) {
            std::uint64_t base = std::uint64_t{1} << (g - 1);
            if (base > index_cap_) {
                std::ostringstream os;
                os << "quantize: no dense point within " << eps << " of " << x
                   << " among the first " << index_cap_ << " indices";
                throw density_error(os.str());
            }
            std::uint64_t n = base; // points in generation g
            double spacing = w / static_cast<double>(base);
            // nearest point of the generation, then walk left to the least index
            double t = (x - lo_) / spacing - 0.5;
            std::uint64_t j = 0;
            if (t > 0.0) {
                double tr = std::nearbyint(t);
                j = tr >= static_cast<double>(n - 1) ? n - 1 : static_cast<std::uint64_t>(tr);
            }
            auto dist = [&](std::uint64_t jj) {
                double p = lo_ + (static_cast<double>(jj) + 0.5) * spacing;
                return std::fabs(p - x);
            };
            if (dist(j) < r) {
                while (j > 0 && dist(j - 1) < r) --j;
                return base + j;
            }
        }
    }

    /// Exact region B(y^i, eps) \ U_{j<i} B(y^j, eps) for real-interval
    /// spaces. Squared loss maps to absolute-loss balls of radius sqrt(eps).
    IntervalSet real_region(std::uint64_t i, double eps) const {
        if (kind_ != SpaceKind::RealInterval)
            throw capability_error("real_region: space is not a real interval");
        if (i == 0 || !(eps > 0.0)) throw std::invalid_argument("real_region: bad arguments");
        IntervalSet region = real_ball(i, eps);
        for (std::uint64_t j = 1; j < i; ++j) region = region.subtract(real_ball(j, eps));
        return region;
    }

    /// Region for indicator-loss spaces: everything, a single label, or empty.
    struct DiscreteRegion {
        enum class Kind : std::uint8_t { All, Single, Empty } kind;
        Label label; // set when kind == Single
    };

    DiscreteRegion discrete_region(std::uint64_t i, double eps) const {
        if (!is_indicator())
            throw capability_error("discrete_region: space is not indicator-loss");
        if (i == 0 || !(eps > 0.0)) throw std::invalid_argument("discrete_region: bad arguments");
        if (eps > 1.0)
            return i == 1 ? DiscreteRegion{DiscreteRegion::Kind::All, Label()}
                          : DiscreteRegion{DiscreteRegion::Kind::Empty, Label()};
        // eps <= 1: balls are singletons; the region is empty when the dense
        // sequence already produced the same label at a smaller index.
        Label y = dense_point(i);
        bool fresh = true;
        switch (kind_) {
        case SpaceKind::Binary: fresh = i <= 2; break;
        case SpaceKind::Finite: fresh = i <= k_; break;
        default: fresh = true; break;
        }
        return fresh ? DiscreteRegion{DiscreteRegion::Kind::Single, y}
                     : DiscreteRegion{DiscreteRegion::Kind::Empty, Label()};
    }

    struct Constraint {
        std::uint64_t index;
        double eps;
    };

    struct IntersectResult {
        bool nonempty;
        std::optional<Label> witness;
    };

    /// Whether the ball regions named by `constraints` have a common point,
    /// with a witness label when they do. Exact for every built-in kind.
    IntersectResult intersect_nonempty(const std::vector<Constraint>& constraints) const {
        if (constraints.empty())
            throw std::invalid_argument("intersect_nonempty: empty constraint list");
        if (is_indicator()) {
            DiscreteRegion acc{DiscreteRegion::Kind::All, Label()};
            for (const Constraint& c : constraints) {
                DiscreteRegion r = discrete_region(c.index, c.eps);
                acc = intersect_discrete(acc, r);
                if (acc.kind == DiscreteRegion::Kind::Empty) return {false, std::nullopt};
            }
            if (acc.kind == DiscreteRegion::Kind::Single) return {true, acc.label};
            return {true, default_label()};
        }
        IntervalSet acc = IntervalSet::closed(lo_, hi_);
        for (const Constraint& c : constraints) {
            acc = acc.intersect(real_region(c.index, c.eps));
            if (acc.empty()) return {false, std::nullopt};
        }
        auto w = acc.any_point();
        if (!w) return {false, std::nullopt};
        return {true, Label::real(*w)};
    }

private:
    explicit ValueSpace(SpaceKind k) : kind_(k) {}

    double ball_radius(double eps) const {
        return real_loss_ == RealLossKind::Absolute ? eps : std::sqrt(eps);
    }

    IntervalSet real_ball(std::uint64_t i, double eps) const {
        double c = dense_point(i).as_real();
        double r = ball_radius(eps);
        return IntervalSet::open(c - r, c + r).intersect(IntervalSet::closed(lo_, hi_));
    }

    static DiscreteRegion intersect_discrete(const DiscreteRegion& a, const DiscreteRegion& b) {
        using K = DiscreteRegion::Kind;
        if (a.kind == K::Empty || b.kind == K::Empty) return {K::Empty, Label()};
        if (a.kind == K::All) return b;
        if (b.kind == K::All) return a;
        return a.label == b.label ? a : DiscreteRegion{K::Empty, Label()};
    }

    SpaceKind kind_;
    std::uint64_t k_ = 0;
    double lo_ = 0.0;
    double hi_ = 1.0;
    RealLossKind real_loss_ = RealLossKind::Absolute;
    std::uint64_t index_cap_ = std::uint64_t{1} << 20;
};

} // namespace uol
