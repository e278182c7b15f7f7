#pragma once

#include "hyreach/reach_linear.hpp"

namespace hyreach {

/// f^s(x,u) = scaleGain * (scaleNormal'x - scaleOffset) * (A x + B u + b)
///
/// The scaling factor is affine in x, so f^s is quadratic and its Hessians are
/// constant. No clamping at the guard: the guard hyperplane is invariant under
/// f^s, so states on the approach side never reach it and the paths coincide
/// with those of the base flow.
struct QuadraticFlow {
    AffineFlow baseFlow;
    Vec scaleNormal;
    double scaleOffset = 0.0;
    double scaleGain = 1.0;

    double scale(const Vec& x) const { return scaleGain * (scaleNormal.dot(x) - scaleOffset); }
};

Vec scaledFlowEval(const QuadraticFlow& qf, const Vec& x, const Vec& u);

/// Range of every component of scaleGain * (c'dx) * (A dx + B du) for
/// (dx, du) in the joint deviation zonotope.
IntervalVector quadraticRemainder(const QuadraticFlow& qf, const Zonotope& deviation);

struct QuadraticStepOptions {
    int maxIterations = 10;
    double enlargement = 1.2;
};

/// One conservative-linearization step of the scaled dynamics. The
/// linearization point is center(U) and center(R_k) advanced by half a step
/// along the scaled flow; the remainder enters the
/// linear step as an additional time-varying input box that is found by
/// fixed-point iteration on the time-interval set.
StepResult reachQuadraticStep(const QuadraticFlow& qf, const Zonotope& r, const Zonotope& u, double dt,
                              const QuadraticStepOptions& options = {});

}  // namespace hyreach
