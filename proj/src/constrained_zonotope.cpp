#include "hyreach/constrained_zonotope.hpp"

#include "hyreach/linprog.hpp"

#include <cmath>

namespace hyreach {

Hyperplane::Hyperplane(const Vec& normal, double offset) {
    const double norm = normal.norm();
    if (!(norm > 0.0)) throw std::invalid_argument("Hyperplane: zero normal");
    normal_ = normal / norm;
    offset_ = offset / norm;
}

ConstrainedZonotope::ConstrainedZonotope(const Zonotope& z)
    : center_(z.center()), generators_(z.generators()), constraintMatrix_(0, z.numGenerators()), constraintVector_(0) {}

ConstrainedZonotope::ConstrainedZonotope(Vec center, Mat generators, Mat constraintMatrix, Vec constraintVector)
    : center_(std::move(center)),
      generators_(std::move(generators)),
      constraintMatrix_(std::move(constraintMatrix)),
      constraintVector_(std::move(constraintVector)) {
    requireSameDim(center_.size(), generators_.rows(), "ConstrainedZonotope(G)");
    if (constraintVector_.size() == 0) constraintMatrix_.resize(0, generators_.cols());
    requireSameDim(constraintMatrix_.cols(), generators_.cols(), "ConstrainedZonotope(A)");
    requireSameDim(constraintMatrix_.rows(), constraintVector_.size(), "ConstrainedZonotope(b)");
}

namespace {

LpProblem coefficientLp(const ConstrainedZonotope& z, const Vec& objective) {
    const Eigen::Index p = z.numGenerators();
    LpProblem lp;
    lp.objective = objective;
    lp.equalityMatrix = z.constraintMatrix();
    lp.equalityVector = z.constraintVector();
    lp.lower = Vec::Constant(p, -1.0);
    lp.upper = Vec::Constant(p, 1.0);
    return lp;
}

}  // namespace

bool ConstrainedZonotope::isEmpty() const {
    if (numConstraints() == 0) return false;
    LpOptions opts;
    opts.phaseOneOnly = true;
    opts.feasibilityTol = kSetTol;
    return !solveLp(coefficientLp(*this, Vec::Zero(numGenerators())), opts).feasible();
}

std::optional<Interval> ConstrainedZonotope::project(const Vec& direction) const {
    requireSameDim(direction.size(), dim(), "ConstrainedZonotope::project");
    const Vec obj = generators_.transpose() * direction;
    const double base = direction.dot(center_);
    if (numConstraints() > 0 && obj.cwiseAbs().maxCoeff() == 0.0) {
        if (isEmpty()) return std::nullopt;
        return Interval{base, base};
    }
    if (numConstraints() == 0) {
        const double r = obj.cwiseAbs().sum();
        return Interval{base - r, base + r};
    }
    LpOptions opts;
    opts.feasibilityTol = kSetTol;
    const LpResult lo = solveLp(coefficientLp(*this, obj), opts);
    if (!lo.feasible()) return std::nullopt;
    const LpResult hi = solveLp(coefficientLp(*this, -obj), opts);
    if (!hi.feasible()) return std::nullopt;
    return Interval{base + lo.optimum, base - hi.optimum};
}

ConstrainedZonotope intersectHyperplane(const ConstrainedZonotope& z, const Hyperplane& h) {
    requireSameDim(z.dim(), h.dim(), "intersectHyperplane");
    const Eigen::Index m = z.numConstraints();
    Mat a(m + 1, z.numGenerators());
    a.topRows(m) = z.constraintMatrix();
    a.row(m) = h.normal().transpose() * z.generators();
    Vec b(m + 1);
    b.head(m) = z.constraintVector();
    b[m] = h.offset() - h.normal().dot(z.center());
    return {z.center(), z.generators(), std::move(a), std::move(b)};
}

std::optional<ConstrainedZonotope> intersectHalfSpace(const ConstrainedZonotope& z, const HalfSpace& h) {
    requireSameDim(z.dim(), h.normal.size(), "intersectHalfSpace");
    const Vec row = h.normal.transpose() * z.generators();
    const double mid = h.normal.dot(z.center());
    const double rad = row.cwiseAbs().sum();
    const double scale = std::max(1.0, std::abs(h.bound) + std::abs(mid));
    if (mid + rad <= h.bound) return z;                       // already inside
    if (mid - rad > h.bound + kSetTol * scale) return std::nullopt;  // strictly outside

    // normal'x + s = bound with s in [0, bound - min], s = w (1 + xi), w = (bound - min)/2
    const double lowest = mid - rad;
    const double w = 0.5 * std::max(h.bound - lowest, 0.0);
    const Eigen::Index p = z.numGenerators();
    const Eigen::Index m = z.numConstraints();

    Mat g = Mat::Zero(z.dim(), p + 1);
    g.leftCols(p) = z.generators();
    Mat a = Mat::Zero(m + 1, p + 1);
    a.topLeftCorner(m, p) = z.constraintMatrix();
    a.block(m, 0, 1, p) = row.transpose();
    a(m, p) = w;
    Vec b(m + 1);
    b.head(m) = z.constraintVector();
    b[m] = h.bound - mid - w;
    return ConstrainedZonotope(z.center(), std::move(g), std::move(a), std::move(b));
}

std::optional<IntervalVector> czIntervalHull(const ConstrainedZonotope& z) {
    const Eigen::Index n = z.dim();
    if (z.numConstraints() == 0) {
        return intervalHull(Zonotope(z.center(), z.generators()));
    }
    if (z.isEmpty()) return std::nullopt;
    Vec lo(n);
    Vec hi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto range = z.project(Vec::Unit(n, i));
        if (!range) return std::nullopt;
        lo[i] = range->lo;
        hi[i] = std::max(range->hi, range->lo);
    }
    return IntervalVector(std::move(lo), std::move(hi));
}

}  // namespace hyreach
