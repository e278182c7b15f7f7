#include "hyreach/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace hyreach {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;

// Working state of the bounded simplex over n structural and m artificial columns.
struct Tableau {
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    Mat t;                        // B^{-1} [A | S]
    Vec lower, upper;             // bounds of all n + m columns
    Vec value;                    // current value of every column
    std::vector<Eigen::Index> basis;
    std::vector<bool> isBasic;

    int iterations = 0;

    // Returns false when the iteration limit was hit.
    bool optimize(const Vec& cost, double optTol, int maxIter) {
        const Eigen::Index total = n + m;
        while (true) {
            if (iterations >= maxIter) return false;

            Vec cb(m);
            for (Eigen::Index i = 0; i < m; ++i) cb[i] = cost[basis[std::size_t(i)]];

            Eigen::Index entering = -1;
            int dir = 0;
            for (Eigen::Index j = 0; j < total; ++j) {
                if (isBasic[std::size_t(j)] || upper[j] - lower[j] <= 0.0) continue;
                const double d = cost[j] - cb.dot(t.col(j));
                const bool atLower = value[j] <= lower[j];
                if (atLower && d < -optTol) {
                    entering = j;
                    dir = 1;
                    break;
                }
                if (!atLower && d > optTol) {
                    entering = j;
                    dir = -1;
                    break;
                }
            }
            if (entering < 0) return true;
            ++iterations;

            const Vec delta = -double(dir) * t.col(entering);
            std::vector<double> limits(std::size_t(m), kInf);
            double minLimit = kInf;
            for (Eigen::Index i = 0; i < m; ++i) {
                const Eigen::Index bv = basis[std::size_t(i)];
                double lim = kInf;
                if (delta[i] < -kPivotTol) {
                    lim = (value[bv] - lower[bv]) / (-delta[i]);
                } else if (delta[i] > kPivotTol && upper[bv] < kInf) {
                    lim = (upper[bv] - value[bv]) / delta[i];
                }
                lim = std::max(lim, 0.0);
                limits[std::size_t(i)] = lim;
                minLimit = std::min(minLimit, lim);
            }
            // Bland: among tied rows the smallest basic index leaves
            Eigen::Index leaveRow = -1;
            if (minLimit < kInf) {
                const double tieTol = 1e-14 * (1.0 + minLimit);
                for (Eigen::Index i = 0; i < m; ++i) {
                    if (limits[std::size_t(i)] > minLimit + tieTol) continue;
                    if (leaveRow < 0 || basis[std::size_t(i)] < basis[std::size_t(leaveRow)]) leaveRow = i;
                }
            }
            const double flip = upper[entering] - lower[entering];
            double theta = minLimit;
            if (flip <= minLimit) {
                theta = flip;
                leaveRow = -1;
            }
            if (theta == kInf) return true;  // cannot happen with finite structural bounds

            for (Eigen::Index i = 0; i < m; ++i) value[basis[std::size_t(i)]] += delta[i] * theta;
            value[entering] += double(dir) * theta;

            if (leaveRow < 0) {
                // bound flip
                value[entering] = dir > 0 ? upper[entering] : lower[entering];
                continue;
            }

            const Eigen::Index leaving = basis[std::size_t(leaveRow)];
            value[leaving] = delta[leaveRow] < 0.0 ? lower[leaving] : upper[leaving];
            isBasic[std::size_t(leaving)] = false;
            isBasic[std::size_t(entering)] = true;
            basis[std::size_t(leaveRow)] = entering;

            const double pivot = t(leaveRow, entering);
            t.row(leaveRow) /= pivot;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (i == leaveRow) continue;
                const double f = t(i, entering);
                if (f != 0.0) t.row(i) -= f * t.row(leaveRow);
            }
        }
    }
};

}  // namespace

LpResult solveLp(const LpProblem& problem, const LpOptions& options) {
    const Eigen::Index n = problem.objective.size();
    const Eigen::Index m = problem.equalityVector.size();
    requireSameDim(problem.lower.size(), n, "solveLp(lower)");
    requireSameDim(problem.upper.size(), n, "solveLp(upper)");
    if (m > 0) {
        requireSameDim(problem.equalityMatrix.rows(), m, "solveLp(rows)");
        requireSameDim(problem.equalityMatrix.cols(), n, "solveLp(cols)");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        if (!std::isfinite(problem.lower[j]) || !std::isfinite(problem.upper[j]) ||
            problem.lower[j] > problem.upper[j]) {
            throw std::invalid_argument("solveLp: bounds must be finite with lower <= upper");
        }
    }

    LpResult result;
    if (m == 0) {
        result.solution.resize(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            result.solution[j] = problem.objective[j] > 0.0 ? problem.lower[j] : problem.upper[j];
            if (problem.objective[j] == 0.0) result.solution[j] = problem.lower[j];
        }
        result.status = LpStatus::Optimal;
        result.optimum = problem.objective.dot(result.solution);
        result.duals = Vec();
        result.reducedCosts = problem.objective;
        return result;
    }

    // Row equilibration; the tolerance is carried into scaled units per row.
    Vec rowScale(m);
    Vec rowTol(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double mx = problem.equalityMatrix.row(i).cwiseAbs().maxCoeff();
        rowScale[i] = mx > 0.0 ? 1.0 / mx : 1.0;
        rowTol[i] = options.feasibilityTol * rowScale[i];
    }
    const Mat a = rowScale.asDiagonal() * problem.equalityMatrix;
    const Vec b = rowScale.asDiagonal() * problem.equalityVector;

    Tableau tab;
    tab.n = n;
    tab.m = m;
    tab.lower.resize(n + m);
    tab.upper.resize(n + m);
    tab.value.resize(n + m);
    tab.lower.head(n) = problem.lower;
    tab.upper.head(n) = problem.upper;
    tab.value.head(n) = problem.lower;
    tab.lower.tail(m).setZero();
    tab.upper.tail(m).setConstant(kInf);

    const Vec residual = b - a * problem.lower;
    Vec sign(m);
    for (Eigen::Index i = 0; i < m; ++i) sign[i] = residual[i] >= 0.0 ? 1.0 : -1.0;
    tab.value.tail(m) = residual.cwiseAbs();

    tab.t.resize(m, n + m);
    tab.t.leftCols(n) = sign.asDiagonal() * a;
    tab.t.rightCols(m).setIdentity();
    tab.basis.resize(std::size_t(m));
    tab.isBasic.assign(std::size_t(n + m), false);
    for (Eigen::Index i = 0; i < m; ++i) {
        tab.basis[std::size_t(i)] = n + i;
        tab.isBasic[std::size_t(n + i)] = true;
    }

    Vec phaseOneCost = Vec::Zero(n + m);
    phaseOneCost.tail(m).setOnes();
    if (!tab.optimize(phaseOneCost, 1e-13, options.maxIterations)) {
        result.status = LpStatus::IterationLimit;
        result.iterations = tab.iterations;
        return result;
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        if (tab.value[n + i] > rowTol[i]) {
            result.status = LpStatus::Infeasible;
            result.iterations = tab.iterations;
            return result;
        }
    }
    // Freeze artificials at zero; basic ones leave on degenerate pivots.
    for (Eigen::Index i = 0; i < m; ++i) {
        tab.upper[n + i] = 0.0;
        tab.value[n + i] = 0.0;
    }

    Vec cost = Vec::Zero(n + m);
    cost.head(n) = problem.objective;
    if (!options.phaseOneOnly) {
        if (!tab.optimize(cost, options.optimalityTol, options.maxIterations)) {
            result.status = LpStatus::IterationLimit;
            result.iterations = tab.iterations;
            return result;
        }
    }

    // Recompute basic values from the basis inverse to remove update drift.
    Mat binv(m, m);
    for (Eigen::Index i = 0; i < m; ++i) binv.col(i) = tab.t.col(n + i) * sign[i];
    Vec rhs = b;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (!tab.isBasic[std::size_t(j)]) rhs -= a.col(j) * tab.value[j];
    }
    const Vec xb = binv * rhs;
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index bv = tab.basis[std::size_t(i)];
        tab.value[bv] = bv < n ? std::clamp(xb[i], problem.lower[bv], problem.upper[bv]) : 0.0;
    }

    result.status = LpStatus::Optimal;
    result.solution = tab.value.head(n);
    result.optimum = problem.objective.dot(result.solution);
    Vec cb(m);
    for (Eigen::Index i = 0; i < m; ++i) cb[i] = cost[tab.basis[std::size_t(i)]];
    const Vec yScaled = binv.transpose() * cb;
    result.duals = rowScale.asDiagonal() * yScaled;
    result.reducedCosts = problem.objective - problem.equalityMatrix.transpose() * result.duals;
    result.iterations = tab.iterations;
    return result;
}

double dualBound(const LpProblem& problem, const LpResult& result) {
    double v = result.duals.size() > 0 ? problem.equalityVector.dot(result.duals) : 0.0;
    for (Eigen::Index j = 0; j < problem.objective.size(); ++j) {
        const double d = result.reducedCosts[j];
        v += std::min(d * problem.lower[j], d * problem.upper[j]);
    }
    return v;
}

}  // namespace hyreach
