#pragma once

#include "hyreach/zonotope.hpp"

#include <optional>

namespace hyreach {

/// Hyperplane { x | normal'x = offset } with a unit normal.
class Hyperplane {
public:
    Hyperplane() = default;
    /// Normalizes (normal, offset) jointly; throws for a zero normal.
    Hyperplane(const Vec& normal, double offset);

    const Vec& normal() const { return normal_; }
    double offset() const { return offset_; }
    Eigen::Index dim() const { return normal_.size(); }

    /// normal'x - offset
    double signedDistance(const Vec& x) const { return normal_.dot(x) - offset_; }

private:
    Vec normal_;
    double offset_ = 0.0;
};

/// Half-space { x | normal'x <= bound } (normal not necessarily unit).
struct HalfSpace {
    Vec normal;
    double bound = 0.0;

    bool contains(const Vec& x, double tol = 0.0) const { return normal.dot(x) <= bound + tol; }
};

/// { c + G*beta | A*beta = b, beta in [-1,1]^p }.
class ConstrainedZonotope {
public:
    ConstrainedZonotope() = default;
    explicit ConstrainedZonotope(const Zonotope& z);
    ConstrainedZonotope(Vec center, Mat generators, Mat constraintMatrix, Vec constraintVector);

    Eigen::Index dim() const { return center_.size(); }
    Eigen::Index numGenerators() const { return generators_.cols(); }
    Eigen::Index numConstraints() const { return constraintVector_.size(); }

    const Vec& center() const { return center_; }
    const Mat& generators() const { return generators_; }
    const Mat& constraintMatrix() const { return constraintMatrix_; }
    const Vec& constraintVector() const { return constraintVector_; }

    /// Feasibility of the coefficient polytope.
    bool isEmpty() const;

    /// Range of l'x over the set via two LPs; nullopt when empty.
    std::optional<Interval> project(const Vec& direction) const;

private:
    Vec center_;
    Mat generators_;
    Mat constraintMatrix_;
    Vec constraintVector_;
};

ConstrainedZonotope intersectHyperplane(const ConstrainedZonotope& z, const Hyperplane& h);

/// Adds one slack generator so that normal'x <= bound holds exactly. Returns
/// nullopt when the zonotope part already lies strictly outside.
std::optional<ConstrainedZonotope> intersectHalfSpace(const ConstrainedZonotope& z, const HalfSpace& h);

/// Tightest axis-aligned enclosure (2n LPs). nullopt signals the empty set.
std::optional<IntervalVector> czIntervalHull(const ConstrainedZonotope& z);

}  // namespace hyreach
