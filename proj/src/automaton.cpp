#include "hyreach/automaton.hpp"

#include <cmath>

namespace hyreach {

void HybridAutomaton::validate() const {
    if (locations.empty()) throw std::invalid_argument("automaton has no locations");
    const Eigen::Index n = stateDim();
    if (clockIndex < 0 || clockIndex >= n) throw std::invalid_argument("clock index out of range");
    for (const auto& loc : locations) {
        requireSameDim(loc.flow.stateDim(), n, "location flow");
        const auto& f = loc.flow;
        if (f.A.row(clockIndex).cwiseAbs().maxCoeff() != 0.0 || f.B.row(clockIndex).cwiseAbs().sum() != 0.0 ||
            f.b(clockIndex) != 1.0) {
            throw std::invalid_argument("location " + loc.name + ": clock row must be (0, 0, 1)");
        }
        for (const auto& h : loc.invariant) requireSameDim(h.normal.size(), n, "invariant half-space");
        for (const auto& tr : loc.transitions) {
            if (tr.target < 0 || tr.target >= int(locations.size()))
                throw std::invalid_argument("transition " + tr.name + ": invalid target");
            requireSameDim(tr.guard.dim(), n, "guard");
            requireSameDim(tr.jumpMatrix.rows(), n, "jump rows");
            requireSameDim(tr.jumpMatrix.cols(), n, "jump cols");
            requireSameDim(tr.jumpOffset.size(), n, "jump offset");
            for (const auto& h : tr.sideConditions) requireSameDim(h.normal.size(), n, "side condition");
            if (tr.jumpMatrix.row(clockIndex) != Vec::Unit(n, clockIndex).transpose() || tr.jumpOffset(clockIndex) != 0.0)
                throw std::invalid_argument("transition " + tr.name + ": jumps must keep the clock");
        }
    }
}

const Vec& InputModel::sampleAt(double t) const {
    if (samples.empty()) throw std::logic_error("input model has no samples");
    const double k = std::floor(t / sampleInterval + 1e-9);
    if (k <= 0.0) return samples.front();
    if (k >= double(samples.size() - 1)) return samples.back();
    return samples[std::size_t(k)];
}

void InputModel::validate() const {
    if (!(sampleInterval > 0.0)) throw std::invalid_argument("input sample interval must be positive");
    if (samples.empty()) throw std::invalid_argument("input model has no samples");
    for (const auto& s : samples) requireSameDim(s.size(), uncertainty.dim(), "input sample");
}

Interval clockProjection(const Zonotope& z, int clockIndex) {
    const double c = z.center()(clockIndex);
    const double r = z.generators().row(clockIndex).cwiseAbs().sum();
    return {c - r, c + r};
}

Zonotope inputsOverWindow(const InputModel& im, double lo, double hi) {
    if (im.samples.empty()) throw std::logic_error("input model has no samples");
    const auto last = double(im.samples.size() - 1);
    auto index = [&](double t) {
        double k = std::floor((t - im.inputDelay) / im.sampleInterval + 1e-9);
        return std::size_t(std::clamp(k, 0.0, last));
    };
    const std::size_t first = index(lo);
    const std::size_t final = index(hi);
    Vec minV = im.samples[first], maxV = im.samples[first];
    for (std::size_t k = first + 1; k <= final; ++k) {
        minV = minV.cwiseMin(im.samples[k]);
        maxV = maxV.cwiseMax(im.samples[k]);
    }
    return minkowskiSum(Zonotope::fromInterval({minV, maxV}), im.uncertainty);
}

Zonotope unifyInputs(const InputModel& im, const Zonotope& r, int clockIndex, double dt) {
    const Interval t = clockProjection(r, clockIndex);
    return inputsOverWindow(im, t.lo, t.hi + dt);
}

Zonotope applyJump(const Transition& tr, const Zonotope& z) {
    return translate(linearMap(tr.jumpMatrix, z), tr.jumpOffset);
}

bool touchesGuard(const Zonotope& z, const Transition& tr) {
    const Interval s = z.project(tr.guard.normal());
    if (s.lo > tr.guard.offset() + kSetTol || s.hi < tr.guard.offset() - kSetTol) return false;
    for (const auto& h : tr.sideConditions) {
        if (z.project(h.normal).lo > h.bound + kSetTol) return false;
    }
    ConstrainedZonotope cz = intersectHyperplane(ConstrainedZonotope(z), tr.guard);
    for (const auto& h : tr.sideConditions) {
        auto next = intersectHalfSpace(cz, h);
        if (!next) return false;
        cz = std::move(*next);
    }
    return !cz.isEmpty();
}

std::optional<IntervalVector> pruneWithInvariant(const ConstrainedZonotope& z, const std::vector<HalfSpace>& invariant) {
    ConstrainedZonotope cz = z;
    for (const auto& h : invariant) {
        auto next = intersectHalfSpace(cz, h);
        if (!next) return std::nullopt;
        cz = std::move(*next);
    }
    return czIntervalHull(cz);
}

std::optional<IntervalVector> pruneWithInvariant(const Zonotope& z, const std::vector<HalfSpace>& invariant) {
    return pruneWithInvariant(ConstrainedZonotope(z), invariant);
}

}  // namespace hyreach
