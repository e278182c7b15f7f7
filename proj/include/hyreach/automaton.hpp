#pragma once

#include "hyreach/constrained_zonotope.hpp"
#include "hyreach/reach_linear.hpp"

#include <string>
#include <vector>

namespace hyreach {

/// Guard crossing into another location. The guard hyperplane is oriented so
/// that the source location lies on its positive side: normal'x - offset >= 0
/// before the crossing.
struct Transition {
    std::string name;
    Hyperplane guard;
    std::vector<HalfSpace> sideConditions;
    Mat jumpMatrix;
    Vec jumpOffset;
    int target = -1;
};

struct Location {
    std::string name;
    AffineFlow flow;
    std::vector<HalfSpace> invariant;  // empty = full space
    std::vector<Transition> transitions;
};

struct HybridAutomaton {
    std::vector<Location> locations;
    int clockIndex = -1;

    Eigen::Index stateDim() const { return locations.empty() ? 0 : locations.front().flow.stateDim(); }
    /// Throws std::invalid_argument on inconsistent structure.
    void validate() const;
};

/// Zero-order-hold input u_d(t) = samples[k] for t in [kT, (k+1)T), read with
/// delay d1, plus a bounded uncertainty set.
struct InputModel {
    std::vector<Vec> samples;
    double sampleInterval = 1e-3;
    double inputDelay = 0.0;
    Zonotope uncertainty;

    Eigen::Index dim() const { return uncertainty.dim(); }
    /// Sample active at (undelayed) time t; clamps to the first/last sample.
    const Vec& sampleAt(double t) const;
    /// Nominal delayed input u_d(t - d1).
    const Vec& delayedAt(double t) const { return sampleAt(t - inputDelay); }
    void validate() const;
};

Interval clockProjection(const Zonotope& z, int clockIndex);

/// Box of every delayed sample active during the clock window [lo, hi], plus
/// the uncertainty set.
Zonotope inputsOverWindow(const InputModel& im, double lo, double hi);

/// Input set for one step of length dt from R_k: the window is
/// [inf t(R_k), sup t(R_k) + dt].
Zonotope unifyInputs(const InputModel& im, const Zonotope& r, int clockIndex, double dt);

/// Affine image under the transition's jump.
Zonotope applyJump(const Transition& tr, const Zonotope& z);

/// True when the set meets the guard hyperplane together with every side
/// condition (one feasibility LP unless the support test already decides).
bool touchesGuard(const Zonotope& z, const Transition& tr);

/// Box enclosure of z restricted to the half-spaces; nullopt when empty.
std::optional<IntervalVector> pruneWithInvariant(const ConstrainedZonotope& z, const std::vector<HalfSpace>& invariant);
std::optional<IntervalVector> pruneWithInvariant(const Zonotope& z, const std::vector<HalfSpace>& invariant);

}  // namespace hyreach
