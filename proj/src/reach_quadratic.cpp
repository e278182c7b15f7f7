#include "hyreach/reach_quadratic.hpp"

#include <cmath>

namespace hyreach {

Vec scaledFlowEval(const QuadraticFlow& qf, const Vec& x, const Vec& u) {
    return qf.scale(x) * qf.baseFlow.eval(x, u);
}

IntervalVector quadraticRemainder(const QuadraticFlow& qf, const Zonotope& deviation) {
    const AffineFlow& f = qf.baseFlow;
    const Eigen::Index n = f.stateDim();
    const Eigen::Index m = f.inputDim();
    requireSameDim(deviation.dim(), n + m, "quadraticRemainder");

    Mat ab(n, n + m);
    ab << f.A, f.B;
    Vec cw = Vec::Zero(n + m);
    cw.head(n) = qf.scaleNormal;

    const Vec& c = deviation.center();
    const Mat& g = deviation.generators();
    const double p0 = cw.dot(c);
    const Vec a = g.transpose() * cw;
    const Vec q0 = ab * c;
    const Mat bq = ab * g;  // row i: coefficients of q_i

    Vec lo(n), hi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec b = bq.row(i).transpose();
        // (p0 + a'beta)(q0 + b'beta) with (a'beta)(b'beta) = ((sa+b/s)'beta)^2/4 - ((sa-b/s)'beta)^2/4;
        // s balances the two factors, otherwise the bound degrades to max(|a|,|b|)^2
        const double lin = (p0 * b + q0(i) * a).cwiseAbs().sum();
        const double na = a.cwiseAbs().sum();
        const double nb = b.cwiseAbs().sum();
        const double s = na > 0.0 && nb > 0.0 ? std::sqrt(nb / na) : 1.0;
        const double sp = (s * a + b / s).cwiseAbs().sum();
        const double sm = (s * a - b / s).cwiseAbs().sum();
        const double center = p0 * q0(i);
        double l = center - lin - 0.25 * sm * sm;
        double h = center + lin + 0.25 * sp * sp;
        if (qf.scaleGain >= 0) {
            lo(i) = qf.scaleGain * l;
            hi(i) = qf.scaleGain * h;
        } else {
            lo(i) = qf.scaleGain * h;
            hi(i) = qf.scaleGain * l;
        }
    }
    if (!lo.allFinite() || !hi.allFinite()) throw ReachError("reach-quadratic", "linearization remainder diverged");
    return {lo, hi};
}

StepResult reachQuadraticStep(const QuadraticFlow& qf, const Zonotope& r, const Zonotope& u, double dt,
                              const QuadraticStepOptions& options) {
    const AffineFlow& f = qf.baseFlow;
    const Eigen::Index n = f.stateDim();
    const Eigen::Index m = f.inputDim();
    requireSameDim(r.dim(), n, "reachQuadraticStep state");
    requireSameDim(u.dim(), m, "reachQuadraticStep input");

    const Vec uc = u.center();
    // linearize halfway along the center's drift
    const Vec xc = r.center() + 0.5 * dt * scaledFlowEval(qf, r.center(), uc);
    const double g0 = qf.scale(xc);
    const Vec f0 = f.eval(xc, uc);
    const Mat jx = qf.scaleGain * f0 * qf.scaleNormal.transpose() + g0 * f.A;
    const Mat ju = g0 * f.B;

    Mat bAug(n, m + n);
    bAug << ju, Mat::Identity(n, n);
    const Vec offset = g0 * f0 - jx * xc - ju * uc;
    LinearStepper stepper(AffineFlow(jx, bAug, offset), dt);

    const Zonotope uDev = translate(u, -uc);
    auto remainderOn = [&](const Zonotope& states) {
        const Zonotope dev = cartesianProduct(translate(states, -xc), uDev);
        if (!dev.center().allFinite() || !dev.generators().allFinite())
            throw ReachError("reach-quadratic", "linearization remainder diverged");
        return quadraticRemainder(qf, dev);
    };
    auto stepWith = [&](const IntervalVector& rem) {
        return stepper.step(r, cartesianProduct(u, Zonotope::fromInterval(rem)));
    };

    const IntervalVector zero = IntervalVector::point(Vec::Zero(n));
    StepResult linear = stepWith(zero);
    IntervalVector actual = remainderOn(linear.timeIntervalSet);
    IntervalVector guess = actual;
    for (int it = 0; it < options.maxIterations; ++it) {
        guess = IntervalVector::fromCenterRadius(guess.center(), options.enlargement * guess.radius());
        StepResult s = stepWith(guess);
        actual = remainderOn(s.timeIntervalSet);
        if (guess.contains(actual)) {
            // remainder must stay a correction to the linear part
            const Vec linRad = intervalHull(linear.timeIntervalSet).radius();
            const Vec remRad = dt * actual.radius() + dt * actual.center().cwiseAbs();
            for (Eigen::Index i = 0; i < n; ++i) {
                if (remRad(i) > 1e-12 && remRad(i) > linRad(i) + 1e-12) {
                    throw ReachError("reach-quadratic", "linearization remainder dominates; reduce the step size");
                }
            }
            return s;
        }
        guess = guess.hull(actual);
    }
    throw ReachError("reach-quadratic", "linearization remainder did not converge");
}

}  // namespace hyreach
