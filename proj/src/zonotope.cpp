#include "hyreach/zonotope.hpp"

#include "hyreach/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace hyreach {

Zonotope::Zonotope(Vec center, Mat generators) : center_(std::move(center)), generators_(std::move(generators)) {
    if (generators_.cols() == 0) generators_.resize(center_.size(), 0);
    requireSameDim(center_.size(), generators_.rows(), "Zonotope");
}

Zonotope Zonotope::fromInterval(const IntervalVector& box) {
    const Vec r = box.radius();
    std::vector<Eigen::Index> axes;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (r[i] > 0.0) axes.push_back(i);
    }
    Mat g = Mat::Zero(r.size(), Eigen::Index(axes.size()));
    for (std::size_t k = 0; k < axes.size(); ++k) g(axes[k], Eigen::Index(k)) = r[axes[k]];
    return {box.center(), std::move(g)};
}

double Zonotope::support(const Vec& direction) const {
    requireSameDim(dim(), direction.size(), "Zonotope::support");
    return direction.dot(center_) + (direction.transpose() * generators_).cwiseAbs().sum();
}

Interval Zonotope::project(const Vec& direction) const {
    requireSameDim(dim(), direction.size(), "Zonotope::project");
    const double mid = direction.dot(center_);
    const double rad = (direction.transpose() * generators_).cwiseAbs().sum();
    return {mid - rad, mid + rad};
}

Zonotope minkowskiSum(const Zonotope& a, const Zonotope& b) {
    requireSameDim(a.dim(), b.dim(), "minkowskiSum");
    Mat g(a.dim(), a.numGenerators() + b.numGenerators());
    g << a.generators(), b.generators();
    return {a.center() + b.center(), std::move(g)};
}

Zonotope linearMap(const Mat& m, const Zonotope& z) {
    requireSameDim(m.cols(), z.dim(), "linearMap");
    return {m * z.center(), m * z.generators()};
}

Zonotope translate(const Zonotope& z, const Vec& offset) {
    requireSameDim(z.dim(), offset.size(), "translate");
    return {z.center() + offset, z.generators()};
}

Zonotope scaleGenerators(const Zonotope& z, double s) { return {z.center(), s * z.generators()}; }

IntervalVector intervalHull(const Zonotope& z) {
    const Vec r = z.generators().cwiseAbs().rowwise().sum();
    return IntervalVector::fromCenterRadius(z.center(), r);
}

double volumeMeasure(const IntervalVector& box) {
    const Vec w = box.width();
    if (w.size() == 0) return 0.0;
    // log-sum keeps tiny widths from underflowing the product
    double logSum = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) return 0.0;
        logSum += std::log(w[i]);
    }
    return std::exp(logSum / double(w.size()));
}

double volumeMeasure(const Zonotope& z) { return volumeMeasure(intervalHull(z)); }

Zonotope dropTinyGenerators(const Zonotope& z, double tol) {
    const Mat& g = z.generators();
    std::vector<Eigen::Index> keep;
    keep.reserve(std::size_t(g.cols()));
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
        if (g.col(j).cwiseAbs().maxCoeff() > tol) keep.push_back(j);
    }
    if (Eigen::Index(keep.size()) == g.cols()) return z;
    Mat out(g.rows(), Eigen::Index(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) out.col(Eigen::Index(k)) = g.col(keep[k]);
    return {z.center(), std::move(out)};
}

Zonotope reduceOrder(const Zonotope& z, double maxOrder) {
    if (maxOrder < 1.0) throw std::invalid_argument("reduceOrder: maxOrder must be >= 1");
    const Eigen::Index n = z.dim();
    const Eigen::Index p = z.numGenerators();
    const auto limit = Eigen::Index(std::floor(maxOrder * double(n)));
    if (p <= limit) return z;

    const Mat& g = z.generators();
    // boxing cost of a generator: ||g||_1 - ||g||_inf (zero for axis-aligned ones)
    std::vector<double> cost(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto a = g.col(j).cwiseAbs();
        cost[std::size_t(j)] = a.sum() - a.maxCoeff();
    }
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), Eigen::Index(0));
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return cost[std::size_t(a)] > cost[std::size_t(b)]; });

    const Eigen::Index kept = limit - n;
    Mat out = Mat::Zero(n, limit);
    Vec boxRadius = Vec::Zero(n);
    for (Eigen::Index k = 0; k < p; ++k) {
        const Eigen::Index j = idx[std::size_t(k)];
        if (k < kept) {
            out.col(k) = g.col(j);
        } else {
            boxRadius += g.col(j).cwiseAbs();
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) out(i, kept + i) = boxRadius[i];
    return dropTinyGenerators(Zonotope(z.center(), std::move(out)));
}

Zonotope encloseHull(const Zonotope& a, const Zonotope& b) {
    requireSameDim(a.dim(), b.dim(), "encloseHull");
    const Eigen::Index n = a.dim();
    const Eigen::Index p = std::max(a.numGenerators(), b.numGenerators());
    Mat ga = Mat::Zero(n, p);
    Mat gb = Mat::Zero(n, p);
    ga.leftCols(a.numGenerators()) = a.generators();
    gb.leftCols(b.numGenerators()) = b.generators();

    Mat g(n, 2 * p + 1);
    g.leftCols(p) = 0.5 * (ga + gb);
    g.col(p) = 0.5 * (a.center() - b.center());
    g.rightCols(p) = 0.5 * (ga - gb);
    return dropTinyGenerators(Zonotope(0.5 * (a.center() + b.center()), std::move(g)));
}

bool containsPoint(const Zonotope& z, const Vec& x, double tol) {
    requireSameDim(z.dim(), x.size(), "containsPoint");
    if (!intervalHull(z).contains(x, tol)) return false;
    const Eigen::Index p = z.numGenerators();
    if (p == 0) return (x - z.center()).cwiseAbs().maxCoeff() <= tol;

    LpProblem lp;
    lp.objective = Vec::Zero(p);
    lp.equalityMatrix = z.generators();
    lp.equalityVector = x - z.center();
    lp.lower = Vec::Constant(p, -1.0);
    lp.upper = Vec::Constant(p, 1.0);
    LpOptions opts;
    opts.feasibilityTol = std::max(tol, 1e-12);
    opts.phaseOneOnly = true;
    return solveLp(lp, opts).status == LpStatus::Optimal;
}

Zonotope cartesianProduct(const Zonotope& a, const Zonotope& b) {
    const Eigen::Index n = a.dim() + b.dim();
    Vec c(n);
    c << a.center(), b.center();
    Mat g = Mat::Zero(n, a.numGenerators() + b.numGenerators());
    g.topLeftCorner(a.dim(), a.numGenerators()) = a.generators();
    g.bottomRightCorner(b.dim(), b.numGenerators()) = b.generators();
    return {std::move(c), std::move(g)};
}

}  // namespace hyreach
