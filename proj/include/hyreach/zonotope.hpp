#pragma once

#include "hyreach/interval.hpp"
#include "hyreach/types.hpp"

namespace hyreach {

/// Zonotope { c + G*beta | beta in [-1,1]^p }.
///
/// Values are immutable once built; every operation returns a new set.
class Zonotope {
public:
    Zonotope() = default;
    Zonotope(Vec center, Mat generators);

    static Zonotope point(const Vec& x) { return {x, Mat(x.size(), 0)}; }
    static Zonotope fromInterval(const IntervalVector& box);

    Eigen::Index dim() const { return center_.size(); }
    Eigen::Index numGenerators() const { return generators_.cols(); }
    double order() const { return dim() == 0 ? 0.0 : double(numGenerators()) / double(dim()); }

    const Vec& center() const { return center_; }
    const Mat& generators() const { return generators_; }

    /// Support function h(l) = l'c + sum_i |l'g_i|.
    double support(const Vec& direction) const;

    /// Range of l'x over the set.
    Interval project(const Vec& direction) const;

private:
    Vec center_;
    Mat generators_;
};

Zonotope minkowskiSum(const Zonotope& a, const Zonotope& b);
Zonotope linearMap(const Mat& m, const Zonotope& z);
Zonotope translate(const Zonotope& z, const Vec& offset);
Zonotope scaleGenerators(const Zonotope& z, double s);

IntervalVector intervalHull(const Zonotope& z);

/// n-th root of the interval-hull volume. Zero-width axes give 0.
double volumeMeasure(const Zonotope& z);
double volumeMeasure(const IntervalVector& box);

/// Over-approximating order reduction: keeps the generators that are most
/// expensive to box and encloses the rest in an axis-aligned box, so that the
/// result has at most maxOrder * n generators.
Zonotope reduceOrder(const Zonotope& z, double maxOrder);

/// Drops generators whose infinity norm is below tol.
Zonotope dropTinyGenerators(const Zonotope& z, double tol = 0.0);

/// Encloses conv(a u b). Generators are matched column by column; the shorter
/// matrix is padded with zeros.
Zonotope encloseHull(const Zonotope& a, const Zonotope& b);

/// Exact point membership via one feasibility LP; tol relaxes the equality.
bool containsPoint(const Zonotope& z, const Vec& x, double tol = 1e-9);

/// Cartesian product a x b.
Zonotope cartesianProduct(const Zonotope& a, const Zonotope& b);

}  // namespace hyreach
