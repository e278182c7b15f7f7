#include "doctest.h"
#include "test_util.hpp"

#include "hyreach/reach_quadratic.hpp"

#include <cmath>

using namespace hyreach;
using namespace testutil;

namespace {

QuadraticFlow decayToGuard() {
    // x' = -x scaled by g(x) = x: x' = -x^2
    QuadraticFlow qf;
    qf.baseFlow = AffineFlow(Mat::Constant(1, 1, -1.0), Mat::Zero(1, 1), Vec::Zero(1));
    qf.scaleNormal = Vec::Ones(1);
    qf.scaleOffset = 0.0;
    qf.scaleGain = 1.0;
    return qf;
}

Vec rk4(const QuadraticFlow& qf, Vec x, const Vec& u, double t, int steps) {
    double h = t / steps;
    for (int k = 0; k < steps; ++k) {
        Vec k1 = scaledFlowEval(qf, x, u);
        Vec k2 = scaledFlowEval(qf, x + 0.5 * h * k1, u);
        Vec k3 = scaledFlowEval(qf, x + 0.5 * h * k2, u);
        Vec k4 = scaledFlowEval(qf, x + h * k3, u);
        x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return x;
}

}  // namespace

TEST_CASE("scaled flow evaluation") {
    std::mt19937_64 rng(59);
    QuadraticFlow qf;
    qf.baseFlow = AffineFlow(randomMat(rng, 3, 3), randomMat(rng, 3, 2), randomVec(rng, 3));
    qf.scaleNormal = Vec::Unit(3, 0);
    qf.scaleOffset = 0.2;
    qf.scaleGain = 1.0 / 0.5;

    Vec onGuard(3);
    onGuard << 0.2, 1.0, -1.0;
    CHECK(scaledFlowEval(qf, onGuard, Vec::Ones(2)).norm() == 0.0);

    Vec far(3);
    far << 0.7, 0.3, 0.1;  // distance 0.5 = the normalization distance
    Vec u = randomVec(rng, 2);
    CHECK((scaledFlowEval(qf, far, u) - qf.baseFlow.eval(far, u)).norm() < 1e-14);

    for (int k = 0; k < 50; ++k) {
        Vec x = randomVec(rng, 3);
        Vec w = randomVec(rng, 2);
        Vec direct = (2.0 * (x(0) - 0.2)) * (qf.baseFlow.A * x + qf.baseFlow.B * w + qf.baseFlow.b);
        CHECK((scaledFlowEval(qf, x, w) - direct).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("remainder bound is exact-quadratic") {
    std::mt19937_64 rng(61);
    QuadraticFlow qf;
    qf.baseFlow = AffineFlow(randomMat(rng, 3, 3), randomMat(rng, 3, 1), randomVec(rng, 3));
    qf.scaleNormal = randomVec(rng, 3).normalized();
    qf.scaleGain = 1.7;
    Zonotope dev(Vec::Zero(4), randomMat(rng, 4, 5));
    IntervalVector full = quadraticRemainder(qf, dev);
    IntervalVector half = quadraticRemainder(qf, scaleGenerators(dev, 0.5));
    CHECK((half.lower() - 0.25 * full.lower()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((half.upper() - 0.25 * full.upper()).cwiseAbs().maxCoeff() < 1e-12);

    // sampled remainders lie inside the bound
    Zonotope off(randomVec(rng, 4, 0.3), randomMat(rng, 4, 5));
    IntervalVector b = quadraticRemainder(qf, off);
    Mat ab(3, 4);
    ab << qf.baseFlow.A, qf.baseFlow.B;
    for (int k = 0; k < 2000; ++k) {
        Vec w = sampleZonotope(rng, off);
        Vec r = qf.scaleGain * qf.scaleNormal.dot(w.head(3)) * (ab * w);
        REQUIRE(b.contains(r, 1e-12));
    }
}

TEST_CASE("point set follows the scaled ODE") {
    QuadraticFlow qf = decayToGuard();
    Zonotope r = Zonotope::point(Vec::Constant(1, 0.8));
    Zonotope u = Zonotope::point(Vec::Zero(1));
    const double dt = 1e-3;
    Vec x = Vec::Constant(1, 0.8);
    for (int k = 0; k < 20; ++k) {
        StepResult s = reachQuadraticStep(qf, r, u, dt);
        x = rk4(qf, x, Vec::Zero(1), dt, 50);
        IntervalVector h = intervalHull(s.timePointSet);
        CHECK(h.contains(x, 1e-12));
        CHECK(h.width()(0) < 1e-8);
        CHECK(std::abs(h.center()(0) - x(0)) < 1e-8);
        r = s.timePointSet;
    }
}

TEST_CASE("x' = -x^2 enclosures contain the analytic solution") {
    QuadraticFlow qf = decayToGuard();
    Zonotope r = Zonotope::fromInterval({Vec::Constant(1, 0.5), Vec::Constant(1, 1.0)});
    Zonotope u = Zonotope::point(Vec::Zero(1));
    const double dt = 0.01;
    for (int k = 0; k < 100; ++k) {
        StepResult s = reachQuadraticStep(qf, r, u, dt);
        double t1 = (k + 1) * dt;
        for (double x0 : {0.5, 0.6, 0.75, 0.9, 1.0}) {
            REQUIRE(intervalHull(s.timePointSet).contains(Vec::Constant(1, x0 / (1 + x0 * t1)), 1e-12));
            for (double f : {0.25, 0.5, 0.75}) {
                double t = k * dt + f * dt;
                REQUIRE(intervalHull(s.timeIntervalSet).contains(Vec::Constant(1, x0 / (1 + x0 * t)), 1e-12));
            }
        }
        r = reduceOrder(s.timePointSet, 20);
    }
    IntervalVector h = intervalHull(r);
    CHECK(h.lower()(0) <= 0.5 / 1.5 + 1e-12);
    CHECK(h.upper()(0) >= 0.5 - 1e-12);
    CHECK(h.upper()(0) < 0.5 + 0.02);
}
