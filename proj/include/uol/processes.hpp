#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "basics.hpp"
#include "learners.hpp"
#include "rng.hpp"

namespace uol {

// ---------------------------------------------------------------------------
// Input processes

enum class ProcessKind : std::uint8_t {
    IidUniform,
    IidDiscrete,
    Geometric,
    FixedSequence,
    FileTrace,
};

/// Input-point generator. next_input(t) is a pure function of (generator,
/// seed, t): stochastic kinds derive a fresh substream per step, so replicas
/// can share a generator value and runs replay bit-identically.
class ProcessGen {
public:
    static ProcessGen iid_uniform(double lo, double hi, std::uint64_t seed) {
        if (!(lo < hi)) throw std::invalid_argument("iid_uniform: need lo < hi");
        ProcessGen g(ProcessKind::IidUniform, seed);
        g.lo_ = lo;
        g.hi_ = hi;
        return g;
    }

    static ProcessGen iid_discrete(std::vector<Point> support, std::vector<double> weights,
                                   std::uint64_t seed) {
        if (support.empty() || support.size() != weights.size())
            throw std::invalid_argument("iid_discrete: support/weights mismatch");
        ProcessGen g(ProcessKind::IidDiscrete, seed);
        g.support_ = std::move(support);
        g.weights_ = std::move(weights);
        return g;
    }

    static ProcessGen geometric(Point ratio) {
        ProcessGen g(ProcessKind::Geometric, 0);
        g.ratio_ = ratio;
        return g;
    }

    static ProcessGen fixed_sequence(std::vector<Point> values) {
        ProcessGen g(ProcessKind::FixedSequence, 0);
        g.support_ = std::move(values);
        return g;
    }

    static ProcessGen file_trace(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("file_trace: cannot open " + path);
        std::vector<Point> values;
        std::string line;
        while (std::getline(in, line)) {
            std::size_t a = line.find_first_not_of(" \t\r");
            if (a == std::string::npos || line[a] == '#') continue;
            values.push_back(std::strtold(line.c_str() + a, nullptr));
        }
        ProcessGen g(ProcessKind::FileTrace, 0);
        g.support_ = std::move(values);
        return g;
    }

    ProcessKind kind() const { return kind_; }

    /// X_t, t >= 1. Finite kinds signal exhaustion with end_of_trace.
    Point next_input(std::uint64_t t) const {
        if (t == 0) throw std::invalid_argument("next_input: steps are 1-based");
        switch (kind_) {
        case ProcessKind::IidUniform: {
            Rng r(derive_seed(seed_, "process-step", t));
            return static_cast<Point>(r.uniform(lo_, hi_));
        }
        case ProcessKind::IidDiscrete: {
            Rng r(derive_seed(seed_, "process-step", t));
            return support_[r.discrete(weights_)];
        }
        case ProcessKind::Geometric: {
            Point v = 1.0L;
            for (std::uint64_t i = 0; i < t; ++i) v *= ratio_;
            return v;
        }
        case ProcessKind::FixedSequence:
        case ProcessKind::FileTrace:
            if (t > support_.size()) {
                std::ostringstream os;
                os << "input sequence exhausted at step " << t << " (have " << support_.size()
                   << " points)";
                throw end_of_trace(os.str());
            }
            return support_[t - 1];
        }
        throw std::logic_error("unreachable");
    }

private:
    ProcessGen(ProcessKind k, std::uint64_t seed) : kind_(k), seed_(seed) {}

    ProcessKind kind_;
    std::uint64_t seed_;
    double lo_ = 0.0, hi_ = 1.0;
    Point ratio_ = 0.0L;
    std::vector<Point> support_;
    std::vector<double> weights_;
};

// ---------------------------------------------------------------------------
// Target functions (noiseless: y_t = f*(x_t))

enum class TargetKind : std::uint8_t {
    IntervalUnion,
    Threshold,
    DyadicCellLabel,
    QuantizedStep,
};

/// Cell of the countable dyadic partition around `a`:
/// {a}  u  U_i [a+2^i, a+2^(i+1))  u  U_i (a-2^(i+1), a-2^i].
struct DyadicCell {
    int side;     // -1 left of a, 0 the singleton {a}, +1 right of a
    int exponent; // i, clamped to the representable magnitude range

    friend bool operator==(const DyadicCell& l, const DyadicCell& r) {
        return l.side == r.side && l.exponent == r.exponent;
    }
    friend bool operator<(const DyadicCell& l, const DyadicCell& r) {
        return l.side != r.side ? l.side < r.side : l.exponent < r.exponent;
    }
};

inline DyadicCell dyadic_cell(Point a, Point x) {
    if (x == a) return {0, 0};
    Point d = x > a ? x - a : a - x;
    int e = std::ilogb(d); // 2^e <= d < 2^(e+1), exact at powers of two
    e = std::clamp(e, -16446, 16384);
    return {x > a ? 1 : -1, e};
}

/// Natural-number encoding of a dyadic cell, for countable-label targets.
inline std::uint64_t dyadic_cell_id(const DyadicCell& c) {
    if (c.side == 0) return 0;
    std::uint64_t zig = c.exponent >= 0 ? 2ULL * static_cast<std::uint64_t>(c.exponent)
                                        : 2ULL * static_cast<std::uint64_t>(-(c.exponent + 1)) + 1;
    return 1 + 2 * zig + (c.side > 0 ? 0 : 1);
}

/// Deterministic measurable target function.
class TargetFn {
public:
    /// Indicator of a finite union of pairwise-disjoint closed intervals.
    static TargetFn interval_union(std::vector<std::pair<double, double>> intervals) {
        if (intervals.empty()) throw std::invalid_argument("interval_union: no intervals");
        std::sort(intervals.begin(), intervals.end());
        for (std::size_t i = 0; i < intervals.size(); ++i) {
            if (!(intervals[i].first <= intervals[i].second))
                throw std::invalid_argument("interval_union: empty interval");
            if (i > 0 && !(intervals[i - 1].second < intervals[i].first))
                throw std::invalid_argument("interval_union: intervals must be disjoint");
        }
        TargetFn f(TargetKind::IntervalUnion);
        f.intervals_ = std::move(intervals);
        return f;
    }

    /// Indicator of (-inf, a) or, when closed, (-inf, a].
    static TargetFn threshold(double a, bool closed) {
        TargetFn f(TargetKind::Threshold);
        f.a_ = a;
        f.closed_ = closed;
        return f;
    }

    /// Countable label: the dyadic-partition cell id around `a`.
    static TargetFn dyadic_cell_label(double a) {
        TargetFn f(TargetKind::DyadicCellLabel);
        f.a_ = a;
        return f;
    }

    /// Step function: labels[j] on [b_j, b_{j+1}) with b_0 = -inf, b_{m+1} = +inf.
    static TargetFn quantized_step(std::vector<double> breakpoints, std::vector<Label> labels) {
        if (labels.size() != breakpoints.size() + 1)
            throw std::invalid_argument("quantized_step: need one more label than breakpoints");
        if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
            throw std::invalid_argument("quantized_step: breakpoints must be sorted");
        TargetFn f(TargetKind::QuantizedStep);
        f.breakpoints_ = std::move(breakpoints);
        f.labels_ = std::move(labels);
        return f;
    }

    TargetKind kind() const { return kind_; }
    double threshold_at() const { return a_; }
    const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }

    Label operator()(Point x) const {
        switch (kind_) {
        case TargetKind::IntervalUnion: {
            for (const auto& [lo, hi] : intervals_)
                if (x >= lo && x <= hi) return Label::bit(1);
            return Label::bit(0);
        }
        case TargetKind::Threshold:
            return Label::bit(closed_ ? (x <= a_ ? 1 : 0) : (x < a_ ? 1 : 0));
        case TargetKind::DyadicCellLabel:
            return Label::nat(dyadic_cell_id(dyadic_cell(a_, x)));
        case TargetKind::QuantizedStep: {
            std::size_t j = 0;
            while (j < breakpoints_.size() && x >= static_cast<Point>(breakpoints_[j])) ++j;
            return labels_[j];
        }
        }
        throw std::logic_error("unreachable");
    }

private:
    explicit TargetFn(TargetKind k) : kind_(k) {}

    TargetKind kind_;
    std::vector<std::pair<double, double>> intervals_;
    double a_ = 0.0;
    bool closed_ = false;
    std::vector<double> breakpoints_;
    std::vector<Label> labels_;
};

// ---------------------------------------------------------------------------
// Partitions of the instance space

class PartitionSpec {
public:
    static PartitionSpec dyadic_around(Point a) {
        PartitionSpec p;
        p.dyadic_ = true;
        p.a_ = a;
        return p;
    }

    static PartitionSpec uniform_grid(Point width) {
        if (!(width > 0)) throw std::invalid_argument("uniform_grid: width must be > 0");
        PartitionSpec p;
        p.dyadic_ = false;
        p.width_ = width;
        return p;
    }

    /// Comparable cell key; every point maps to exactly one cell.
    std::pair<std::int64_t, std::int64_t> cell(Point x) const {
        if (dyadic_) {
            DyadicCell c = dyadic_cell(a_, x);
            return {c.side, c.exponent};
        }
        return {0, static_cast<std::int64_t>(std::floor(x / width_))};
    }

private:
    PartitionSpec() = default;
    bool dyadic_ = true;
    Point a_ = 0.0L;
    Point width_ = 1.0L;
};

// ---------------------------------------------------------------------------
// Traces and trace-level diagnostics

struct Trace {
    std::vector<Point> xs;
    std::vector<Label> ys;

    std::size_t size() const { return xs.size(); }
};

inline Trace make_trace(const ProcessGen& gen, const TargetFn& target, std::size_t horizon) {
    Trace tr;
    tr.xs.reserve(horizon);
    tr.ys.reserve(horizon);
    for (std::size_t t = 1; t <= horizon; ++t) {
        Point x = gen.next_input(t);
        tr.xs.push_back(x);
        tr.ys.push_back(target(x));
    }
    return tr;
}

struct SmvRow {
    std::uint64_t horizon;
    std::uint64_t distinct_cells;
    double ratio;
};

/// Distinct partition cells visited by x_1..x_T at each checkpoint T; the
/// ratio sequence is the finite-horizon witness for sublinear visits.
inline std::vector<SmvRow> smv_audit(const std::vector<Point>& xs, const PartitionSpec& partition,
                                     const std::vector<std::uint64_t>& checkpoints) {
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
        throw std::invalid_argument("smv_audit: checkpoints must be ascending");
    if (!checkpoints.empty() && checkpoints.back() > xs.size())
        throw std::invalid_argument("smv_audit: checkpoint beyond trace length");
    std::vector<SmvRow> rows;
    std::set<std::pair<std::int64_t, std::int64_t>> cells;
    std::size_t next = 0;
    for (std::uint64_t t = 1; t <= xs.size() && next < checkpoints.size(); ++t) {
        cells.insert(partition.cell(xs[t - 1]));
        while (next < checkpoints.size() && checkpoints[next] == t) {
            rows.push_back({t, cells.size(), static_cast<double>(cells.size()) / static_cast<double>(t)});
            ++next;
        }
    }
    return rows;
}

struct MistakeCellReport {
    std::vector<std::uint64_t> mistakes;  // cumulative, per prefix
    std::vector<std::uint64_t> new_cells; // cumulative, per prefix
    bool bound_holds;                     // mistakes(T) <= new_cells(T) for every prefix
};

/// Runs nearest neighbor against a threshold target and counts cumulative
/// mistakes vs first visits of the dyadic partition around the boundary.
/// A mistake at step t implies x_t opened a new cell (step 1 included:
/// its cell is always fresh).
inline MistakeCellReport mistake_vs_newcell_check(const Trace& trace, const TargetFn& target) {
    if (target.kind() != TargetKind::Threshold)
        throw std::invalid_argument("mistake_vs_newcell_check: target must be a threshold");
    PartitionSpec partition = PartitionSpec::dyadic_around(target.threshold_at());
    NnLearner nn(ValueSpace::binary());
    std::set<std::pair<std::int64_t, std::int64_t>> cells;
    MistakeCellReport report;
    report.bound_holds = true;
    std::uint64_t mistakes = 0;
    for (std::size_t t = 0; t < trace.size(); ++t) {
        Label pred = nn.predict(trace.xs[t]);
        if (pred != trace.ys[t]) ++mistakes;
        cells.insert(partition.cell(trace.xs[t]));
        nn.observe(trace.xs[t], trace.ys[t]);
        report.mistakes.push_back(mistakes);
        report.new_cells.push_back(cells.size());
        if (mistakes > cells.size()) report.bound_holds = false;
    }
    return report;
}

struct ClosureViolation {
    std::uint64_t step;
    std::string what;
};

struct ClosureReport {
    std::uint64_t steps_checked = 0;
    std::vector<ClosureViolation> violations;
};

/// Per-step identities of the nearest-neighbor mistake indicator: equal for a
/// set and its complement, subadditive over finite unions. Step 1 has no
/// representant and is excluded.
inline ClosureReport closure_check(const Trace& trace, const std::vector<TargetFn>& targets) {
    if (targets.size() < 2)
        throw std::invalid_argument("closure_check: need at least two targets");
    for (const TargetFn& f : targets)
        if (f.kind() != TargetKind::IntervalUnion)
            throw std::invalid_argument("closure_check: targets must be interval unions");
    NnLearner nn(ValueSpace::binary());
    ClosureReport report;
    for (std::size_t t = 0; t < trace.size(); ++t) {
        Point x = trace.xs[t];
        auto rep = nn.representant(x);
        if (rep) {
            report.steps_checked++;
            Point xr = trace.xs[*rep - 1];
            int union_in_x = 0, union_in_r = 0;
            std::uint64_t sum_mistakes = 0;
            for (const TargetFn& f : targets) {
                int fx = static_cast<int>(f(x).as_uint());
                int fr = static_cast<int>(f(xr).as_uint());
                // complement symmetry: flipping both bits preserves the indicator
                int m = fx != fr;
                int mc = (1 - fx) != (1 - fr);
                if (m != mc)
                    report.violations.push_back({t + 1, "complement symmetry"});
                sum_mistakes += static_cast<std::uint64_t>(m);
                union_in_x |= fx;
                union_in_r |= fr;
            }
            if (static_cast<std::uint64_t>(union_in_x != union_in_r) > sum_mistakes)
                report.violations.push_back({t + 1, "union subadditivity"});
        }
        nn.observe(x, trace.ys[t]);
    }
    return report;
}

} // namespace uol
