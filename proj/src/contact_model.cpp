#include "hyreach/contact_model.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace hyreach {

ContactParams ContactParams::forMass(double m) {
    ContactParams p;
    p.m = m;
    if (m == 1.5) {
        p.dt = 80.0;
    } else if (m == 4.5) {
        p.dt = 135.0;
    } else if (m == 8.0) {
        p.dt = 180.0;
    } else {
        p.dt = criticalDamping(m, p.kt);
    }
    return p;
}

void ContactParams::validate() const {
    if (!(m > 0.0)) throw std::invalid_argument("mass must be positive");
    if (!(d2 > 0.0)) throw std::invalid_argument("d2 must be positive");
    for (double v : {kt, dt, dr, ft, ke, de, d1}) {
        if (v < 0.0) throw std::invalid_argument("stiffness, damping, force and delay parameters must be nonnegative");
    }
}

void TrajectorySpec::validate() const {
    if (!(impactSpeed > 0.0)) throw std::invalid_argument("impact speed must be positive");
    if (!(stopPosition < 0.0)) throw std::invalid_argument("stop position must be below the surface");
    if (!(sampleRate > 0.0) || !(horizon > 0.0) || !(impactTime > 0.0))
        throw std::invalid_argument("sample rate, horizon and impact time must be positive");
}

namespace {

struct Blocks {
    Mat a1, a2, b1;
    Vec off;
};

AffineFlow assemble(const Blocks& k, double d2) {
    const double w = 2.0 / d2;
    const Mat i2 = Mat::Identity(2, 2);
    Mat a = Mat::Zero(5, 5);
    a.block(0, 0, 2, 2) = k.a1;
    a.block(0, 2, 2, 2) = k.a2;
    a.block(2, 0, 2, 2) = w * i2 - k.a1;
    a.block(2, 2, 2, 2) = -w * i2 - k.a2;
    Mat b = Mat::Zero(5, 3);
    b.block(0, 0, 2, 3) = k.b1;
    b.block(2, 0, 2, 3) = -k.b1;
    Vec off = Vec::Zero(5);
    off.segment(0, 2) = k.off;
    off.segment(2, 2) = -k.off;
    off(state::clock) = 1.0;
    return {a, b, off};
}

Vec unit(int i) { return Vec::Unit(state::dim, i); }

}  // namespace

HybridAutomaton buildAutomaton(const ContactParams& p) {
    p.validate();
    Mat freeA1(2, 2), contactA1(2, 2), impA2(2, 2), reactA2(2, 2), impB1(2, 3);
    freeA1 << 0, 1, 0, 0;
    contactA1 << 0, 1, -p.ke / p.m, -p.de / p.m;
    impA2 << 0, 0, -p.kt / p.m, -p.dt / p.m;
    reactA2 << 0, 0, 0, -p.dr / p.m;
    impB1 << 0, 0, 0, p.kt / p.m, p.dt / p.m, 1;
    const Mat zeroB = Mat::Zero(2, 3);
    const Vec noOffset = Vec::Zero(2);
    const Vec contactOffset = (Vec(2) << 0, p.ke * p.l / p.m).finished();

    // force seen by the controller (delayed states) and the true surface position
    Vec delayedForce = Vec::Zero(state::dim);
    delayedForce(state::zHat) = -p.ke;
    delayedForce(state::zHatDot) = -p.de;
    const double delayedForceOffset = p.ke * p.l;

    const HalfSpace above{-unit(state::z), -p.l};     // z >= l
    const HalfSpace below{unit(state::z), p.l};       // z <= l
    const HalfSpace forceBelow{delayedForce, p.ft - delayedForceOffset};
    const HalfSpace movingDown{unit(state::zDot), 0.0};
    const HalfSpace movingUp{-unit(state::zDot), 0.0};

    const Mat id = Mat::Identity(state::dim, state::dim);
    const Vec zero = Vec::Zero(state::dim);
    auto toward = [&](const Hyperplane& h, const char* name, std::vector<HalfSpace> side, int target) {
        return Transition{name, h, std::move(side), id, zero, target};
    };
    const Hyperplane surfaceFromAbove(unit(state::z), p.l);
    const Hyperplane surfaceFromBelow(-unit(state::z), -p.l);
    // f_t - force >= 0 before the threshold is reached
    const Hyperplane forceThreshold(-delayedForce, delayedForceOffset - p.ft);

    HybridAutomaton ha;
    ha.clockIndex = state::clock;
    ha.locations.resize(4);
    ha.locations[loc::freeMotion] = {"L1", assemble({freeA1, impA2, impB1, noOffset}, p.d2), {above},
                                     {toward(surfaceFromAbove, "L1->L2", {movingDown}, loc::contact)}};
    ha.locations[loc::contact] = {"L2", assemble({contactA1, impA2, impB1, contactOffset}, p.d2), {forceBelow, below},
                                  {toward(surfaceFromBelow, "L2->L1", {movingUp}, loc::freeMotion),
                                   toward(forceThreshold, "L2->L3", {}, loc::reaction)}};
    ha.locations[loc::reaction] = {"L3", assemble({contactA1, reactA2, zeroB, contactOffset}, p.d2), {below},
                                   {toward(surfaceFromBelow, "L3->L4", {movingUp}, loc::reactionFree)}};
    ha.locations[loc::reactionFree] = {"L4", assemble({freeA1, reactA2, zeroB, noOffset}, p.d2), {above},
                                       {toward(surfaceFromAbove, "L4->L3", {movingDown}, loc::reaction)}};
    ha.validate();
    return ha;
}

Vec desiredState(const TrajectorySpec& spec, double t) {
    const double v = spec.impactSpeed;
    const double t1 = spec.impactTime;
    const double a1 = v / t1;
    const double t2 = spec.decelerationTime();
    const double a2 = v / t2;
    Vec out(3);
    if (t <= 0.0) {
        out << spec.startPosition(), 0.0, -a1;
    } else if (t < t1) {
        out << spec.startPosition() - 0.5 * a1 * t * t, -a1 * t, -a1;
    } else if (t < t1 + t2) {
        const double s = t - t1;
        out << -v * s + 0.5 * a2 * s * s, -v + a2 * s, a2;
    } else {
        out << spec.stopPosition, 0.0, 0.0;
    }
    return out;
}

std::vector<Vec> generateTrajectory(const TrajectorySpec& spec) {
    spec.validate();
    const auto count = std::size_t(std::llround(spec.horizon * spec.sampleRate)) + 1;
    std::vector<Vec> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(desiredState(spec, double(k) / spec.sampleRate));
    return out;
}

Zonotope buildInputUncertainty() {
    Mat g = Mat::Zero(3, 1);
    g(0, 0) = 5e-5;
    return {Vec::Zero(3), g};
}

InputModel buildInputModel(const TrajectorySpec& spec, const ContactParams& p) {
    InputModel im;
    im.samples = generateTrajectory(spec);
    im.sampleInterval = 1.0 / spec.sampleRate;
    im.inputDelay = p.d1;
    im.uncertainty = buildInputUncertainty();
    return im;
}

Zonotope buildInitialSet(const std::vector<Vec>& samples) {
    if (samples.empty()) throw std::invalid_argument("empty trajectory");
    const Vec& u0 = samples.front();
    Vec c(state::dim);
    c << u0(0), u0(1), u0(0), u0(1), 0.0;
    Vec r(state::dim);
    r << 1e-4, 2e-3, 1e-4, 2e-3, 0.0;
    return Zonotope::fromInterval(IntervalVector::fromCenterRadius(c, r));
}

Mat forceRow(const ContactParams& p) {
    Mat row = Mat::Zero(1, state::dim);
    row(0, state::z) = -p.ke;
    row(0, state::zDot) = -p.de;
    return row;
}

double forceOffset(const ContactParams& p) { return p.ke * p.l; }

bool isContactLocation(int location) { return location == loc::contact || location == loc::reaction; }

Interval forceFromState(const Zonotope& z, const ContactParams& p, int location) {
    if (!isContactLocation(location)) return {0.0, 0.0};
    const Interval f = linearMap(forceRow(p), z).project(Vec::Ones(1));
    return {f.lo + forceOffset(p), f.hi + forceOffset(p)};
}

double forceFromState(const Vec& x, const ContactParams& p, int location) {
    if (!isContactLocation(location)) return 0.0;
    return (forceRow(p) * x)(0) + forceOffset(p);
}

std::string toString(Verdict v) { return v == Verdict::Safe ? "SAFE" : "NOT_VERIFIED"; }

SafetyReport unsafeCheck(const ReachResult& result, const ContactParams& p, const ForceLimits& limits) {
    SafetyReport report;
    for (const auto& rec : result.intersections) {
        if (rec.transitionName != "L1->L2" || !rec.set) continue;
        const double t = rec.set->lower()(state::clock);
        if (!report.contactStart || t < *report.contactStart) report.contactStart = t;
    }
    const std::size_t n = result.segments.size();
    report.segmentViolates.assign(n, false);
    report.subtreeSafe.assign(n, false);
    const double boundary = report.contactStart ? *report.contactStart + limits.window : 0.0;
    std::vector<double> peak(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        for (const auto& e : result.segments[s].entries) {
            const Interval f = forceFromState(e.timeIntervalSet, p, e.location);
            peak[s] = std::max(peak[s], f.hi);
            const double limit = e.clock.hi <= boundary ? limits.transient : limits.quasiStatic;
            if (f.hi >= limit) report.segmentViolates[s] = true;
        }
    }
    // children are created after their parent, so a reverse sweep sees them first.
    // Subsumed segments are covered by their ancestor's subtree; failed ones certify nothing.
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t s = n; s-- > 0;) {
        const Segment& seg = result.segments[s];
        bool ok = !report.segmentViolates[s] && !seg.failed;
        double bound = seg.failed ? inf : peak[s];
        for (const auto& group : seg.childGroups) {
            bool any = false;
            double best = inf;
            for (int c : group) {
                any = any || report.subtreeSafe[std::size_t(c)];
                best = std::min(best, peak[std::size_t(c)]);
            }
            ok = ok && any;
            if (!group.empty()) bound = std::max(bound, best);
        }
        report.subtreeSafe[s] = ok;
        peak[s] = bound;
    }
    report.peakForce = n > 0 ? peak[0] : 0.0;
    report.verdict = n > 0 && report.subtreeSafe[0] ? Verdict::Safe : Verdict::NotVerified;
    return report;
}

}  // namespace hyreach
