#pragma once

#include "hyreach/types.hpp"

namespace hyreach {

/// min objective'x  s.t.  equalityMatrix * x = equalityVector,  lower <= x <= upper.
/// All bounds must be finite, so the problem is never unbounded.
struct LpProblem {
    Vec objective;
    Mat equalityMatrix;
    Vec equalityVector;
    Vec lower;
    Vec upper;
};

enum class LpStatus { Optimal, Infeasible, IterationLimit };

struct LpOptions {
    // equality residual allowed at the returned solution (original row units)
    double feasibilityTol = 1e-9;
    double optimalityTol = 1e-11;
    int maxIterations = 20000;
    // stop after phase 1 (feasibility only)
    bool phaseOneOnly = false;
};

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    double optimum = 0.0;
    Vec solution;
    // Lagrange multipliers of the equality rows and the reduced costs; together
    // they give the dual bound  b'y + sum_j min(d_j l_j, d_j u_j).
    Vec duals;
    Vec reducedCosts;
    int iterations = 0;

    bool feasible() const { return status == LpStatus::Optimal; }
};

/// Dense bounded-variable primal simplex with a phase-1 artificial pass and
/// Bland's rule for both the entering and the leaving variable.
LpResult solveLp(const LpProblem& problem, const LpOptions& options = {});

/// Dual objective value for a result produced by solveLp.
double dualBound(const LpProblem& problem, const LpResult& result);

}  // namespace hyreach
