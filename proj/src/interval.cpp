#include "hyreach/interval.hpp"

#include <algorithm>

namespace hyreach {

IntervalVector::IntervalVector(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    requireSameDim(lower_.size(), upper_.size(), "IntervalVector");
    for (Eigen::Index i = 0; i < lower_.size(); ++i) {
        if (!(lower_[i] <= upper_[i])) {
            throw std::invalid_argument("IntervalVector: lower > upper on axis " + std::to_string(i));
        }
    }
}

bool IntervalVector::contains(const Vec& x, double tol) const {
    requireSameDim(dim(), x.size(), "IntervalVector::contains");
    for (Eigen::Index i = 0; i < dim(); ++i) {
        if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
    }
    return true;
}

bool IntervalVector::contains(const IntervalVector& other, double tol) const {
    requireSameDim(dim(), other.dim(), "IntervalVector::contains");
    return ((other.lower_.array() >= lower_.array() - tol) && (other.upper_.array() <= upper_.array() + tol)).all();
}

IntervalVector IntervalVector::hull(const IntervalVector& other) const {
    requireSameDim(dim(), other.dim(), "IntervalVector::hull");
    return {lower_.cwiseMin(other.lower_), upper_.cwiseMax(other.upper_)};
}

std::optional<IntervalVector> IntervalVector::intersect(const IntervalVector& other, double tol) const {
    requireSameDim(dim(), other.dim(), "IntervalVector::intersect");
    Vec lo = lower_.cwiseMax(other.lower_);
    Vec hi = upper_.cwiseMin(other.upper_);
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (lo[i] > hi[i]) {
            if (lo[i] - hi[i] > tol) return std::nullopt;
            const double mid = 0.5 * (lo[i] + hi[i]);
            lo[i] = mid;
            hi[i] = mid;
        }
    }
    return IntervalVector(std::move(lo), std::move(hi));
}

}  // namespace hyreach
