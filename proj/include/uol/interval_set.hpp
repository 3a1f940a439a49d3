#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace uol {

// A finite union of real intervals with individually open or closed
// endpoints. Ball regions B(y^i, eps) \ U_{j<i} B(y^j, eps) need mixed
// endpoint closures and singleton leftovers, so plain [lo, hi) pairs
// are not enough.

struct Ival {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_closed = true;
    bool hi_closed = true;

    bool is_point() const { return lo == hi; }

    bool contains(double x) const {
        if (x < lo || x > hi) return false;
        if (x == lo && !lo_closed) return false;
        if (x == hi && !hi_closed) return false;
        return true;
    }

    /// Valid (nonempty) as a set of reals.
    bool valid() const {
        if (lo > hi) return false;
        if (lo == hi) return lo_closed && hi_closed;
        return true;
    }
};

class IntervalSet {
public:
    IntervalSet() = default;

    static IntervalSet empty_set() { return IntervalSet(); }

    static IntervalSet interval(double lo, double hi, bool lo_closed, bool hi_closed) {
        IntervalSet s;
        Ival v{lo, hi, lo_closed, hi_closed};
        if (v.valid()) s.parts_.push_back(v);
        return s;
    }

    static IntervalSet closed(double lo, double hi) { return interval(lo, hi, true, true); }
    static IntervalSet open(double lo, double hi) { return interval(lo, hi, false, false); }
    static IntervalSet point(double x) { return interval(x, x, true, true); }

    static IntervalSet all() {
        return interval(-std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity(), false, false);
    }

    bool empty() const { return parts_.empty(); }
    const std::vector<Ival>& parts() const { return parts_; }

    bool contains(double x) const {
        for (const Ival& v : parts_)
            if (v.contains(x)) return true;
        return false;
    }

    IntervalSet intersect(const IntervalSet& other) const {
        IntervalSet out;
        for (const Ival& a : parts_) {
            for (const Ival& b : other.parts_) {
                Ival v;
                if (a.lo > b.lo) {
                    v.lo = a.lo;
                    v.lo_closed = a.lo_closed;
                } else if (a.lo < b.lo) {
                    v.lo = b.lo;
                    v.lo_closed = b.lo_closed;
                } else {
                    v.lo = a.lo;
                    v.lo_closed = a.lo_closed && b.lo_closed;
                }
                if (a.hi < b.hi) {
                    v.hi = a.hi;
                    v.hi_closed = a.hi_closed;
                } else if (a.hi > b.hi) {
                    v.hi = b.hi;
                    v.hi_closed = b.hi_closed;
                } else {
                    v.hi = a.hi;
                    v.hi_closed = a.hi_closed && b.hi_closed;
                }
                if (v.valid()) out.parts_.push_back(v);
            }
        }
        out.normalize();
        return out;
    }

    IntervalSet subtract(const IntervalSet& other) const {
        IntervalSet out = *this;
        for (const Ival& b : other.parts_) out = out.subtract_one(b);
        return out;
    }

    IntervalSet unite(const IntervalSet& other) const {
        IntervalSet out;
        out.parts_ = parts_;
        out.parts_.insert(out.parts_.end(), other.parts_.begin(), other.parts_.end());
        out.normalize();
        return out;
    }

    /// Some member of the set, or nullopt when empty. Non-singleton pieces
    /// yield an interior point: endpoints sit exactly on ball boundaries,
    /// where rounding could flip a strict-inequality membership test.
    std::optional<double> any_point() const {
        if (parts_.empty()) return std::nullopt;
        const Ival& v = parts_.front();
        if (v.is_point()) return v.lo;
        if (std::isfinite(v.lo) && std::isfinite(v.hi)) {
            double mid = 0.5 * (v.lo + v.hi);
            if (v.contains(mid)) return mid;
        }
        if (v.lo_closed && std::isfinite(v.lo)) return v.lo;
        if (v.hi_closed && std::isfinite(v.hi)) return v.hi;
        if (std::isfinite(v.lo) && std::isfinite(v.hi)) {
            double nxt = std::nextafter(v.lo, v.hi);
            if (v.contains(nxt)) return nxt;
            return std::nullopt;
        }
        if (std::isfinite(v.lo)) return v.lo + 1.0;
        if (std::isfinite(v.hi)) return v.hi - 1.0;
        return 0.0;
    }

private:
    // a \ b == a intersect complement(b)
    IntervalSet subtract_one(const Ival& b) const {
        const double inf = std::numeric_limits<double>::infinity();
        IntervalSet comp;
        Ival left{-inf, b.lo, false, !b.lo_closed};
        if (left.valid()) comp.parts_.push_back(left);
        Ival right{b.hi, inf, !b.hi_closed, false};
        if (right.valid()) comp.parts_.push_back(right);
        return intersect(comp);
    }

    // Sort, drop invalid, merge overlapping or touching pieces.
    void normalize() {
        std::erase_if(parts_, [](const Ival& v) { return !v.valid(); });
        std::sort(parts_.begin(), parts_.end(), [](const Ival& a, const Ival& b) {
            if (a.lo != b.lo) return a.lo < b.lo;
            return a.lo_closed && !b.lo_closed;
        });
        std::vector<Ival> merged;
        for (const Ival& v : parts_) {
            if (!merged.empty()) {
                Ival& m = merged.back();
                bool touches = v.lo < m.hi || (v.lo == m.hi && (v.lo_closed || m.hi_closed));
                if (touches) {
                    if (v.hi > m.hi) {
                        m.hi = v.hi;
                        m.hi_closed = v.hi_closed;
                    } else if (v.hi == m.hi) {
                        m.hi_closed = m.hi_closed || v.hi_closed;
                    }
                    continue;
                }
            }
            merged.push_back(v);
        }
        parts_ = std::move(merged);
    }

    std::vector<Ival> parts_;
};

} // namespace uol
