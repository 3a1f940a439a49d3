#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace uol {

// Instance-space scalar. 80-bit extended on x86 keeps geometric traces like
// (-1/3)^t representable out to t ~ 10^4, where double underflows near t = 677.
using Point = long double;

enum class LabelKind : std::uint8_t {
    Bit,   // binary {0,1}
    Class, // finite class in {1..k}
    Nat,   // natural number, 0 allowed
    Real,  // scalar in a bounded interval
};

inline const char* to_string(LabelKind k) {
    switch (k) {
    case LabelKind::Bit: return "bit";
    case LabelKind::Class: return "class";
    case LabelKind::Nat: return "nat";
    case LabelKind::Real: return "real";
    }
    return "?";
}

/// Output-space value. A small tagged scalar: discrete kinds carry an
/// integer payload, Real carries a double.
class Label {
public:
    Label() : kind_(LabelKind::Bit), n_(0), r_(0.0) {}

    static Label bit(int b) {
        if (b != 0 && b != 1) throw std::invalid_argument("Label::bit: value must be 0 or 1");
        return Label(LabelKind::Bit, static_cast<std::uint64_t>(b), 0.0);
    }
    static Label cls(std::uint64_t c) {
        if (c == 0) throw std::invalid_argument("Label::cls: class indices are 1-based");
        return Label(LabelKind::Class, c, 0.0);
    }
    static Label nat(std::uint64_t n) { return Label(LabelKind::Nat, n, 0.0); }
    static Label real(double x) { return Label(LabelKind::Real, 0, x); }

    LabelKind kind() const { return kind_; }
    std::uint64_t as_uint() const { return n_; }
    double as_real() const { return r_; }

    friend bool operator==(const Label& a, const Label& b) {
        if (a.kind_ != b.kind_) return false;
        return a.kind_ == LabelKind::Real ? a.r_ == b.r_ : a.n_ == b.n_;
    }
    friend bool operator!=(const Label& a, const Label& b) { return !(a == b); }
    friend bool operator<(const Label& a, const Label& b) {
        if (a.kind_ != b.kind_) return a.kind_ < b.kind_;
        return a.kind_ == LabelKind::Real ? a.r_ < b.r_ : a.n_ < b.n_;
    }

    std::string str() const {
        std::ostringstream os;
        switch (kind_) {
        case LabelKind::Real: os << r_; break;
        default: os << n_; break;
        }
        return os.str();
    }

private:
    Label(LabelKind k, std::uint64_t n, double r) : kind_(k), n_(n), r_(r) {}

    LabelKind kind_;
    std::uint64_t n_;
    double r_;
};

// Error taxonomy. Configuration and precondition failures are
// std::invalid_argument; the ones below carry a distinct meaning.

/// Dense-sequence search exceeded the index cap without finding a point.
struct density_error : std::runtime_error {
    explicit density_error(const std::string& what) : std::runtime_error(what) {}
};

/// Exact enumeration would exceed the configured replica budget.
struct capacity_error : std::runtime_error {
    explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

/// The requested exact operation is not supported by this space kind.
struct capability_error : std::runtime_error {
    explicit capability_error(const std::string& what) : std::runtime_error(what) {}
};

/// A finite input source ran out before the requested step.
struct end_of_trace : std::runtime_error {
    explicit end_of_trace(const std::string& what) : std::runtime_error(what) {}
};

} // namespace uol
