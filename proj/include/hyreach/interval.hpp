#pragma once

#include "hyreach/types.hpp"

#include <optional>

namespace hyreach {

/// Axis-aligned box [lower, upper].
class IntervalVector {
public:
    IntervalVector() = default;
    IntervalVector(Vec lower, Vec upper);

    static IntervalVector point(const Vec& x) { return {x, x}; }
    static IntervalVector fromCenterRadius(const Vec& c, const Vec& r) { return {c - r, c + r}; }

    Eigen::Index dim() const { return lower_.size(); }
    const Vec& lower() const { return lower_; }
    const Vec& upper() const { return upper_; }
    Vec center() const { return 0.5 * (lower_ + upper_); }
    Vec radius() const { return 0.5 * (upper_ - lower_); }
    Vec width() const { return upper_ - lower_; }

    bool contains(const Vec& x, double tol = 0.0) const;
    bool contains(const IntervalVector& other, double tol = 0.0) const;

    /// Smallest box containing both.
    IntervalVector hull(const IntervalVector& other) const;

    /// Componentwise intersection; nullopt when some axis is empty by more
    /// than tol. Axes that are empty by at most tol collapse to the midpoint.
    std::optional<IntervalVector> intersect(const IntervalVector& other, double tol = 0.0) const;

private:
    Vec lower_;
    Vec upper_;
};

/// Scalar interval, used for clock projections and force envelopes.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
};

}  // namespace hyreach
