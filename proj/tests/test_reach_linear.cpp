#include "doctest.h"
#include "test_util.hpp"

#include "hyreach/reach_linear.hpp"

#include <cmath>

using namespace hyreach;
using namespace testutil;

namespace {

// independent reference: order-30 Taylor with scaling and squaring, no remainder tracking
Mat expmOracle(const Mat& a, double t) {
    Mat m = a * t;
    int s = 0;
    double nu = m.cwiseAbs().rowwise().sum().maxCoeff();
    while (nu > 0.25) {
        nu /= 2;
        ++s;
    }
    m /= std::pow(2.0, s);
    Mat sum = Mat::Identity(a.rows(), a.cols());
    Mat term = sum;
    for (int i = 1; i <= 30; ++i) {
        term = term * m / double(i);
        sum += term;
    }
    for (int k = 0; k < s; ++k) sum = sum * sum;
    return sum;
}

// classic RK4 for x' = A x + B u(t) + b
template <class Input>
Vec integrate(const AffineFlow& f, Vec x, double t0, double t1, int steps, Input u) {
    double h = (t1 - t0) / steps;
    for (int k = 0; k < steps; ++k) {
        double t = t0 + k * h;
        Vec k1 = f.eval(x, u(t));
        Vec k2 = f.eval(x + 0.5 * h * k1, u(t + 0.5 * h));
        Vec k3 = f.eval(x + 0.5 * h * k2, u(t + 0.5 * h));
        Vec k4 = f.eval(x + h * k3, u(t + h));
        x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return x;
}

AffineFlow doubleIntegrator() {
    Mat a(2, 2);
    a << 0, 1, 0, 0;
    Mat b(2, 1);
    b << 0, 1;
    return {a, b, Vec::Zero(2)};
}

}  // namespace

TEST_CASE("matrix exponential closed forms") {
    Mat a(2, 2);
    a << 0, 1, 0, 0;
    MatrixExponential e = matrixExponential(a, 0.1);
    Mat expect(2, 2);
    expect << 1, 0.1, 0, 1;
    CHECK((e.value - expect).cwiseAbs().maxCoeff() == 0.0);

    MatrixExponential z = matrixExponential(Mat::Zero(3, 3), 2.0);
    CHECK(z.value == Mat::Identity(3, 3));
    CHECK(z.remainderRadius == 0.0);
    CHECK_THROWS(matrixExponential(a, -1.0));
}

TEST_CASE("matrix exponential matches an order-30 oracle") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        Mat a = randomMat(rng, 4, 4);
        a -= 2.0 * Mat::Identity(4, 4);  // shift toward stability
        for (double t : {0.01, 0.3, 1.0}) {
            MatrixExponential e = matrixExponential(a, t);
            CHECK((e.value - expmOracle(a, t)).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(e.remainderRadius < 1e-12);
        }
    }
}

TEST_CASE("balancing is a similarity with bounded norm") {
    Mat a(3, 3);
    a << 0, 1, 0, -5e4, -10, 1e-3, 0, 2e3, -1;
    Vec d = balanceScaling(a);
    Mat ab = d.cwiseInverse().asDiagonal() * a * d.asDiagonal();
    CHECK(ab.cwiseAbs().rowwise().sum().maxCoeff() < a.cwiseAbs().rowwise().sum().maxCoeff());
    CHECK((ab.eigenvalues() - a.eigenvalues()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("zero flow keeps the set") {
    AffineFlow f(Mat::Zero(2, 2), Mat::Zero(2, 1), Vec::Zero(2));
    Zonotope r = Zonotope::fromInterval({Vec::Constant(2, -1), Vec::Constant(2, 1)});
    StepResult s = propagateStep(f, r, Zonotope::point(Vec::Zero(1)), 0.1);
    CHECK(intervalHull(s.timePointSet).lower().isApprox(Vec::Constant(2, -1)));
    CHECK(intervalHull(s.timePointSet).upper().isApprox(Vec::Constant(2, 1)));
    std::mt19937_64 rng(1);
    for (int k = 0; k < 20; ++k) {
        Vec l = randomVec(rng, 2);
        CHECK(s.timeIntervalSet.support(l) >= r.support(l) - 1e-12);
    }
}

TEST_CASE("double integrator from points") {
    AffineFlow f = doubleIntegrator();
    Zonotope u = Zonotope::point(Vec::Zero(1));
    StepResult s1 = propagateStep(f, Zonotope::point((Vec(2) << 1, 0).finished()), u, 0.1);
    CHECK((s1.timePointSet.center() - (Vec(2) << 1, 0).finished()).norm() < 1e-12);
    StepResult s2 = propagateStep(f, Zonotope::point((Vec(2) << 0, 1).finished()), u, 0.1);
    CHECK((s2.timePointSet.center() - (Vec(2) << 0.1, 1).finished()).norm() < 1e-12);
}

TEST_CASE("LTI propagation matches the analytic double integrator") {
    // x(t) = x0 + v0 t + u t^2 / 2 under a constant input
    AffineFlow f = doubleIntegrator();
    const double dt = 0.05;
    LinearStepper st(f, dt);
    Vec x0(2);
    x0 << 0.3, -0.7;
    const double uc = 0.8;
    Zonotope r = Zonotope::point(x0);
    for (int k = 1; k <= 40; ++k) {
        r = st.step(r, Zonotope::point((Vec(1) << uc).finished())).timePointSet;
        double t = k * dt;
        Vec exact(2);
        exact << x0(0) + x0(1) * t + 0.5 * uc * t * t, x0(1) + uc * t;
        CHECK((r.center() - exact).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(intervalHull(r).width().maxCoeff() < 1e-8);
    }
}

TEST_CASE("time-interval set contains both time-point sets") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 10; ++trial) {
        AffineFlow f(randomMat(rng, 4, 4) - Mat::Identity(4, 4), randomMat(rng, 4, 2), randomVec(rng, 4));
        Zonotope r = randomZonotope(rng, 4, 6);
        Zonotope u = randomZonotope(rng, 2, 2);
        StepResult s = propagateStep(f, r, u, 0.05);
        for (int k = 0; k < 30; ++k) {
            Vec l = randomVec(rng, 4);
            CHECK(s.timeIntervalSet.support(l) >= r.support(l) - 1e-12);
            CHECK(s.timeIntervalSet.support(l) >= s.timePointSet.support(l) - 1e-12);
        }
    }
}

TEST_CASE("random affine systems with time-varying inputs stay contained") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 4; ++trial) {
        const int n = 3 + trial;
        AffineFlow f(randomMat(rng, n, n) - 0.5 * Mat::Identity(n, n), randomMat(rng, n, 2), randomVec(rng, n));
        Zonotope r0 = Zonotope(randomVec(rng, n), 0.2 * randomMat(rng, n, n));
        Zonotope u(randomVec(rng, 2), 0.3 * randomMat(rng, 2, 2));
        const double dt = 0.04;
        const int steps = 15;
        LinearStepper st(f, dt);
        std::vector<StepResult> seq;
        Zonotope r = r0;
        for (int k = 0; k < steps; ++k) {
            seq.push_back(st.step(r, u));
            r = seq.back().timePointSet;
        }
        for (int s = 0; s < 100; ++s) {
            Vec x = sampleZonotope(rng, r0);
            // piecewise-constant input switching four times per step
            std::vector<Vec> pieces;
            for (int k = 0; k < 4 * steps; ++k) pieces.push_back(sampleZonotope(rng, u));
            auto input = [&](double t) {
                int idx = std::min<int>(int(t / (dt / 4) + 1e-9), int(pieces.size()) - 1);
                return pieces[idx];
            };
            for (int k = 0; k < steps; ++k) {
                double t0 = k * dt;
                for (int j = 1; j <= 4; ++j) {
                    Vec xm = integrate(f, x, t0, t0 + j * dt / 4, 40 * j, input);
                    REQUIRE(containsPoint(seq[k].timeIntervalSet, xm, 1e-9));
                }
                x = integrate(f, x, t0, t0 + dt, 160, input);
                REQUIRE(containsPoint(seq[k].timePointSet, x, 1e-9));
            }
        }
    }
}

TEST_CASE("reach until: invariant and analytic decay") {
    AffineFlow f(Mat::Constant(1, 1, -1.0), Mat::Zero(1, 1), Vec::Zero(1));
    auto none = [](const Zonotope&, double) { return Zonotope::point(Vec::Zero(1)); };
    Zonotope r0 = Zonotope::fromInterval({Vec::Constant(1, 0.9), Vec::Constant(1, 1.1)});

    HalfSpace below{Vec::Constant(1, 1.0), 0.5};
    AffineReachSequence empty = reachAffineUntil(f, r0, none, {below}, 0.01, 1.0);
    CHECK(empty.steps.empty());
    CHECK(empty.leftInvariant);

    AffineReachSequence seq = reachAffineUntil(f, r0, none, {}, 0.013, 5.0);
    CHECK_FALSE(seq.leftInvariant);
    double total = 0;
    for (const auto& s : seq.steps) total += s.stepSize;
    CHECK(total == doctest::Approx(5.0).epsilon(1e-12));
    IntervalVector h = intervalHull(seq.steps.back().timePointSet);
    CHECK(h.lower()(0) >= std::exp(-5.0) * 0.9 - 1e-9);
    CHECK(h.upper()(0) <= std::exp(-5.0) * 1.1 + 1e-9);
    CHECK(h.lower()(0) <= std::exp(-5.0) * 0.9 + 1e-9);

    // leaves x >= 0.5 around t = ln 2
    HalfSpace above{Vec::Constant(1, -1.0), -0.5};
    AffineReachSequence cut = reachAffineUntil(f, r0, none, {above}, 0.01, 5.0);
    CHECK(cut.leftInvariant);
    double tExit = 0.01 * double(cut.steps.size());
    CHECK(tExit == doctest::Approx(std::log(2.0 * 1.1)).epsilon(0.02));
}

TEST_CASE("step size refinement does not enlarge sets") {
    Mat a(3, 3);
    a << 0, 1, 0, -5e4 / 4.5, 0, 0, 1053, 0, -1053;
    AffineFlow f(a, Mat::Zero(3, 1), (Vec(3) << 0, 0, 0).finished());
    Zonotope r0(Vec::Zero(3), 1e-4 * Mat::Identity(3, 3));
    auto none = [](const Zonotope&, double) { return Zonotope::point(Vec::Zero(1)); };
    LinearReachOptions o;
    o.maxOrder = 1000;
    auto coarse = reachAffineUntil(f, r0, none, {}, 6.5e-4, 0.013, o);
    auto fine = reachAffineUntil(f, r0, none, {}, 3.25e-4, 0.013, o);
    CHECK(volumeMeasure(fine.steps.back().timePointSet) <= volumeMeasure(coarse.steps.back().timePointSet) + 1e-9);
}
