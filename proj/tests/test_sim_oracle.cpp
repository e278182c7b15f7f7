#include "doctest.h"
#include "test_util.hpp"

#include "hyreach/scenario.hpp"
#include "hyreach/sim_oracle.hpp"

#include <cmath>
#include <set>

using namespace hyreach;
using namespace testutil;

namespace {

Vec vec(std::initializer_list<double> xs) {
    Vec v(Eigen::Index(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

InputModel silentInput() {
    InputModel im;
    im.samples = {Vec::Zero(1)};
    im.uncertainty = Zonotope::point(Vec::Zero(1));
    return im;
}

HybridAutomaton bouncingToy() {
    HybridAutomaton ha;
    ha.clockIndex = 1;
    Transition up{"up", Hyperplane(vec({-1, 0}), -1.0), {}, Mat::Identity(2, 2), Vec::Zero(2), 1};
    ha.locations = {Location{"L1", {Mat::Zero(2, 2), Mat::Zero(2, 1), vec({1, 1})}, {{vec({1, 0}), 1.0}}, {up}},
                    Location{"L2", {Mat::Zero(2, 2), Mat::Zero(2, 1), vec({-1, 1})}, {}, {}}};
    return ha;
}

struct ContactCase {
    Scenario scenario;
    HybridAutomaton ha;
    InputModel im;
    Vec center;
};

ContactCase contactCase(double mass, double speed) {
    ContactCase c{gridScenario(Scenario{}, mass, speed, IntersectionMethod::Trinal), {}, {}, {}};
    c.ha = buildAutomaton(c.scenario.params);
    c.im = buildInputModel(c.scenario.trajectory, c.scenario.params);
    c.center = buildInitialSet(c.im.samples).center();
    return c;
}

}  // namespace

TEST_CASE("single affine location against the matrix exponential") {
    Mat a(3, 3);
    a << -2.0, 5.0, 0.0, -5.0, -2.0, 0.0, 0.0, 0.0, 0.0;
    HybridAutomaton ha;
    ha.clockIndex = 2;
    ha.locations = {Location{"L", {a, Mat::Zero(3, 1), vec({0, 0, 1})}, {}, {}}};
    SimOptions opt;
    opt.dtSim = 1e-4;
    opt.tEnd = 1.0;
    opt.recordInterval = 0.05;
    const Vec x0 = vec({1.0, -0.5, 0.0});
    const SimTrace tr = simulateTrajectory(ha, x0, 0, silentInput(), Vec::Zero(1), opt);
    REQUIRE(tr.times.size() == 21);
    const Mat a2 = a.topLeftCorner(2, 2);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double t = tr.times[i];
        CHECK(t == doctest::Approx(0.05 * double(i)).epsilon(1e-12));
        const Vec want = matrixExponential(a2, t).value * x0.head(2);
        CHECK((tr.states[i].head(2) - want).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(tr.states[i](2) == doctest::Approx(t).epsilon(1e-12));
    }
    CHECK(tr.events.empty());
}

TEST_CASE("uniform motion event time") {
    const HybridAutomaton ha = bouncingToy();
    SimOptions opt;
    opt.dtSim = 1e-3;
    opt.tEnd = 1.5;
    opt.recordInterval = 0.01;
    for (double x0 : {0.0, 0.123, 0.5, 0.77}) {
        const SimTrace tr = simulateTrajectory(ha, vec({x0, 0.0}), 0, silentInput(), Vec::Zero(1), opt);
        REQUIRE(tr.events.size() == 1);
        CHECK(std::abs(tr.events[0].time - (1.0 - x0)) < 1e-9);
        CHECK(tr.events[0].from == 0);
        CHECK(tr.events[0].to == 1);
        CHECK(tr.events[0].transition == "up");
        // x = 1 - |t - t_hit| after the bounce
        const double tEnd = tr.times.back();
        CHECK(tr.states.back()(0) == doctest::Approx(1.0 - (tEnd - (1.0 - x0))).epsilon(1e-9));
        CHECK(tr.locations.back() == 1);
    }
}

TEST_CASE("nominal contact event near the planned impact") {
    for (double m : {1.5, 4.5, 8.0}) {
        const ContactCase c = contactCase(m, 0.55);
        SimOptions opt;
        const SimTrace tr = simulateTrajectory(c.ha, c.center, loc::freeMotion, c.im, Vec::Zero(3), opt);
        REQUIRE(!tr.events.empty());
        CHECK(tr.events[0].transition == "L1->L2");
        CHECK(tr.events[0].time >= 0.1 - 2e-3);
        CHECK(tr.events[0].time <= 0.1 + 2e-3);
    }
}

TEST_CASE("halving the simulation step barely moves the terminal state") {
    for (double speed : {0.1, 0.55}) {
        const ContactCase c = contactCase(8.0, speed);
        SimOptions coarse;
        SimOptions fine = coarse;
        fine.dtSim = coarse.dtSim / 2.0;
        const Vec w = vec({3e-5, 0.0, 0.0});
        const SimTrace a = simulateTrajectory(c.ha, c.center, loc::freeMotion, c.im, w, coarse);
        const SimTrace b = simulateTrajectory(c.ha, c.center, loc::freeMotion, c.im, w, fine);
        REQUIRE(a.states.size() == b.states.size());
        const Vec d = a.states.back() - b.states.back();
        CHECK(d.head(4).cwiseAbs().maxCoeff() < 1e-7);
        CHECK(a.locations.back() == b.locations.back());
    }
}

TEST_CASE("seeding") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(trajectorySeed(7, i));
    CHECK(seen.size() == 1000);
    CHECK(trajectorySeed(7, 3) == trajectorySeed(7, 3));
    CHECK(trajectorySeed(7, 3) != trajectorySeed(8, 3));

    const IntervalVector box(vec({-1, 2, 0}), vec({1, 3, 0}));
    for (std::uint64_t s = 0; s < 200; ++s) {
        const Vec p = samplePoint(box, s);
        CHECK(box.contains(p));
        CHECK(p(2) == 0.0);
    }
    CHECK(samplePoint(box, 5) == samplePoint(box, 5));

    std::mt19937_64 rng(2);
    const Zonotope z = randomZonotope(rng, 3, 5);
    for (std::uint64_t s = 0; s < 100; ++s) CHECK(containsPoint(z, sampleZonotope(z, s), 1e-9));
}

TEST_CASE("chattering is reported") {
    // A drifts down onto x = 0, B drifts up onto it: zero-time ping-pong
    HybridAutomaton ha;
    ha.clockIndex = 1;
    Transition toB{"a->b", Hyperplane(vec({1, 0}), 0.0), {}, Mat::Identity(2, 2), Vec::Zero(2), 1};
    Transition toA{"b->a", Hyperplane(vec({-1, 0}), 0.0), {}, Mat::Identity(2, 2), Vec::Zero(2), 0};
    ha.locations = {Location{"A", {Mat::Zero(2, 2), Mat::Zero(2, 1), vec({-1, 1})}, {}, {toB}},
                    Location{"B", {Mat::Zero(2, 2), Mat::Zero(2, 1), vec({-1, 1})}, {}, {toA}}};
    SimOptions opt;
    opt.dtSim = 1e-3;
    opt.tEnd = 0.5;
    opt.recordInterval = 0.01;
    opt.maxJumps = 3;
    ha.locations[1].flow.b(0) = 1.0;
    CHECK_THROWS_AS(simulateTrajectory(ha, vec({0.05, 0.0}), 0, silentInput(), Vec::Zero(1), opt), ReachError);
}

TEST_CASE("containment on the toy and a point start") {
    const HybridAutomaton ha = bouncingToy();
    const InputModel im = silentInput();
    EngineOptions eo;
    eo.stepSize = 0.01;
    eo.tEnd = 1.5;
    const IntervalVector point(vec({0.3, 0.0}), vec({0.3, 0.0}));
    const ReachResult r = runAutomaton(ha, Zonotope::fromInterval(point), 0, im, eo);
    ContainmentOptions co;
    co.samples = 5;
    const ContainmentReport rep = containmentTest(ha, point, 0, im, r, eo, co);
    CHECK(rep.passed());
    CHECK(rep.samples == 5);
    CHECK(rep.checkedPoints == 5 * 151);
}

TEST_CASE("shrunken reachable sets are caught") {
    Scenario s = gridScenario(Scenario{}, 4.5, 0.55, IntersectionMethod::Trinal);
    ScenarioResult run = runScenario(s);
    ContainmentOptions co;
    co.samples = 20;

    const ContainmentReport clean = checkContainment(run, co);
    CHECK(clean.passed());

    for (auto& seg : run.reach.segments)
        for (auto& e : seg.entries) e.timeIntervalSet = scaleGenerators(e.timeIntervalSet, 0.5);
    const ContainmentReport broken = checkContainment(run, co);
    CHECK_FALSE(broken.passed());
    CHECK(broken.violations.size() > 0);
    CHECK(broken.simulationErrors == 0);
}

TEST_CASE("parallel and serial containment agree") {
    Scenario s = gridScenario(Scenario{}, 8.0, 0.45, IntersectionMethod::Trinal);
    const ScenarioResult run = runScenario(s);
    ContainmentOptions co;
    co.samples = 24;
    const ContainmentReport a = checkContainment(run, co);
    const ContainmentReport b = checkContainment(run, co, true);
    CHECK(a.checkedPoints == b.checkedPoints);
    CHECK(a.violations.size() == b.violations.size());
    CHECK(a.simulationErrors == b.simulationErrors);
    CHECK(a.passed());
}
