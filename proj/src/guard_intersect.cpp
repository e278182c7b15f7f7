#include "hyreach/guard_intersect.hpp"

#include <cmath>
#include <limits>

namespace hyreach {

namespace {

const char* const kStage = "guard-intersect";

std::optional<IntervalVector> unionBox(const std::optional<IntervalVector>& a, const std::optional<IntervalVector>& b) {
    if (!a) return b;
    if (!b) return a;
    return a->hull(*b);
}

std::optional<IntervalVector> sliceAndPrune(const Zonotope& z, const Hyperplane& guard,
                                            const std::vector<HalfSpace>& prune) {
    return pruneWithInvariant(intersectHyperplane(ConstrainedZonotope(z), guard), prune);
}

// A coarse stepper that tolerates long horizons by splitting them.
Zonotope coarseEnclosure(const AffineFlow& flow, const Zonotope& r, const Zonotope& u, double horizon) {
    for (int pieces = 1; pieces <= 1024; pieces *= 2) {
        try {
            LinearStepper st(flow, horizon / pieces);
            Zonotope cur = r;
            std::optional<IntervalVector> hull;
            for (int k = 0; k < pieces; ++k) {
                StepResult s = st.step(cur, u);
                hull = unionBox(hull, intervalHull(s.timeIntervalSet));
                cur = reduceOrder(s.timePointSet, 20.0);
            }
            return Zonotope::fromInterval(*hull);
        } catch (const ReachError&) {
        }
    }
    throw ReachError(kStage, "mapping: no stable step for the abstraction-error pass");
}

// x0 + t (A x0 + B u + b) + E over x0 in R, u in U, t in [0, ts], unsliced.
Zonotope mappingSet(const Zonotope& r, const AffineFlow& flow, const Hyperplane& guard, const Zonotope& u, double ts) {
    requireSameDim(r.dim(), flow.stateDim(), "intersectMapping state");
    requireSameDim(u.dim(), flow.inputDim(), "intersectMapping input");
    if (!(ts > 0.0)) throw ReachError(kStage, "mapping: horizon must be positive");
    const Eigen::Index n = r.dim();
    const Vec& c = guard.normal();

    const Vec fc = flow.A * r.center() + flow.B * u.center() + flow.b;
    const Mat ag = flow.A * r.generators();
    const Mat bg = flow.B * u.generators();
    const double speedCenter = c.dot(fc);
    const double speedRadius = (c.transpose() * ag).cwiseAbs().sum() + (c.transpose() * bg).cwiseAbs().sum();
    if (speedCenter + speedRadius >= 0.0) {
        throw ReachError(kStage, "mapping inapplicable: guard-normal speed is not strictly toward the guard");
    }

    // t = h (1 + tau); products tau*beta become independent generators
    const double h = 0.5 * ts;
    const Eigen::Index p = r.numGenerators();
    const Eigen::Index q = u.numGenerators();
    Mat g(n, 2 * p + 2 * q + 1);
    g << r.generators() + h * ag, h * bg, h * fc, h * ag, h * bg;
    Zonotope mapped(r.center() + h * fc, g);

    // x(t) - x0 - int f(x0, u) = int_0^t A (x(s) - x0) ds, with x(s) - x0 in s * F_H
    Zonotope hullSet = coarseEnclosure(flow, r, u, ts);
    IntervalVector fh = intervalHull(
        translate(minkowskiSum(linearMap(flow.A, hullSet), linearMap(flow.B, u)), flow.b));
    const double k = 0.5 * ts * ts;
    const Vec mid = k * (flow.A * fh.center());
    const Vec rad = k * (flow.A.cwiseAbs() * fh.radius());
    IntervalVector e((mid - rad).cwiseMin(0.0), (mid + rad).cwiseMax(0.0));
    return minkowskiSum(mapped, Zonotope::fromInterval(e));
}

double supDistance(const Zonotope& z, const Hyperplane& guard) {
    return z.project(guard.normal()).hi - guard.offset();
}

double rDeltaTarget(const IntersectionTuning& t, double coarseStep) {
    return t.rDeltaTarget > 0.0 ? t.rDeltaTarget : coarseStep;
}

}  // namespace

std::string toString(IntersectionMethod m) {
    switch (m) {
        case IntersectionMethod::Geometric: return "geometric";
        case IntersectionMethod::Mapping: return "mapping";
        case IntersectionMethod::Scaling: return "scaling";
        case IntersectionMethod::Tsm: return "tsm";
        case IntersectionMethod::Trinal: return "trinal";
    }
    return "unknown";
}

IntersectionMethod parseMethod(const std::string& name) {
    for (auto m : {IntersectionMethod::Geometric, IntersectionMethod::Mapping, IntersectionMethod::Scaling,
                   IntersectionMethod::Tsm, IntersectionMethod::Trinal}) {
        if (toString(m) == name) return m;
    }
    throw std::invalid_argument("unknown intersection method '" + name + "'");
}

std::vector<HalfSpace> IntersectionJob::pruneSet() const {
    std::vector<HalfSpace> out = invariant;
    out.insert(out.end(), transition.sideConditions.begin(), transition.sideConditions.end());
    return out;
}

double measureDelta(const Zonotope& x, const Hyperplane& guard, const AffineFlow& flow, const Vec& uCenter) {
    const double speed = std::abs(guard.normal().dot(flow.eval(x.center(), uCenter)));
    if (speed == 0.0) throw ReachError(kStage, "r-delta undefined: zero guard-normal speed");
    const Interval s = x.project(guard.normal());
    return s.width() / speed;
}

double measureVolRatio(const Zonotope& x, const Zonotope& rh, const AffineFlow& flow, const Vec& uCenter) {
    requireSameDim(x.dim(), rh.dim(), "measureVolRatio");
    const Vec v = flow.eval(x.center(), uCenter);
    const double vv = v.squaredNorm();
    if (vv == 0.0) throw ReachError(kStage, "r-v undefined: zero flow at the set center");
    const Mat proj = Mat::Identity(x.dim(), x.dim()) - v * v.transpose() / vv;
    const Vec wx = intervalHull(linearMap(proj, x)).width();
    const Vec wr = intervalHull(linearMap(proj, rh)).width();
    double logNum = 0.0, logDen = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < wx.size(); ++i) {
        if (wx(i) < 1e-12 || wr(i) < 1e-12) continue;
        logNum += std::log(wx(i));
        logDen += std::log(wr(i));
        ++count;
    }
    if (count == 0) throw ReachError(kStage, "r-v undefined: reference projection is flat");
    return std::exp((logNum - logDen) / count);
}

double intersectionMeasure(const IntervalVector& box, const Hyperplane& guard) {
    Eigen::Index skip = 0;
    guard.normal().cwiseAbs().maxCoeff(&skip);
    const Vec w = box.width();
    double logSum = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (i == skip) continue;
        if (w(i) <= 0.0) return 0.0;
        logSum += std::log(w(i));
        ++count;
    }
    return count == 0 ? 0.0 : std::exp(logSum / count);
}

std::optional<IntervalVector> intersectGeometric(const std::vector<Zonotope>& hitSets, const Hyperplane& guard,
                                                 const std::vector<HalfSpace>& prune) {
    std::optional<IntervalVector> out;
    for (const auto& p : hitSets) out = unionBox(out, sliceAndPrune(p, guard, prune));
    return out;
}

std::optional<IntervalVector> intersectMapping(const Zonotope& rStart, const AffineFlow& flow, const Hyperplane& guard,
                                               const Zonotope& u, double ts) {
    return czIntervalHull(intersectHyperplane(ConstrainedZonotope(mappingSet(rStart, flow, guard, u, ts)), guard));
}

FlatResult reachUntilFlat(const QuadraticFlow& qf, const Zonotope& rh, const Hyperplane& guard,
                          const IntersectionTuning& tuning, const InputModel& inputs, int clockIndex,
                          double coarseStep) {
    const AffineFlow& f = qf.baseFlow;
    const double target = rDeltaTarget(tuning, coarseStep);
    auto centerInput = [&](const Zonotope& z) { return unifyInputs(inputs, z, clockIndex, coarseStep).center(); };

    FlatResult out{rh, 0, true};
    if (measureDelta(rh, guard, f, centerInput(rh)) <= target) return out;

    // the scaled flow is strongly nonlinear across the set, so the step adapts:
    // halve when the remainder iteration fails, grow back after a few successes
    const double hMax = tuning.scaledStepFraction * coarseStep;
    const double hMin = hMax / 4096.0;
    double h = hMax;
    int streak = 0;
    Zonotope r = rh;
    for (int k = 1; k <= tuning.maxScaledSteps; ++k) {
        const Interval clk = clockProjection(r, clockIndex);
        std::optional<StepResult> step;
        while (!step) {
            // true time advanced in one scaled step is at most h * sup g
            double ahead = 1.5 * h * std::max(qf.scaleGain * supDistance(r, guard), 0.0) + 1e-12;
            double behind = 0.0;
            try {
                for (int attempt = 0; attempt < 8 && !step; ++attempt) {
                    Zonotope u = inputsOverWindow(inputs, clk.lo - behind, clk.hi + ahead);
                    StepResult s = reachQuadraticStep(qf, r, u, h);
                    const Interval reached = clockProjection(s.timeIntervalSet, clockIndex);
                    if (reached.hi <= clk.hi + ahead + 1e-15 && reached.lo >= clk.lo - behind - 1e-15) {
                        step = std::move(s);
                    } else {
                        ahead = std::max(ahead, 2.0 * (reached.hi - clk.hi));
                        behind = std::max(behind, 2.0 * (clk.lo - reached.lo));
                    }
                }
                if (!step) throw ReachError(kStage, "scaling phase: input window did not settle");
            } catch (const ReachError&) {
                if (h / 2.0 < hMin) throw;
                h /= 2.0;
                streak = 0;
            }
        }
        if (++streak >= 4 && h < hMax) {
            h = std::min(2.0 * h, hMax);
            streak = 0;
        }
        r = reduceOrder(step->timePointSet, tuning.maxOrder);
        out.set = r;
        out.steps = k;
        const Vec uc = centerInput(r);
        if (measureDelta(r, guard, f, uc) <= target) {
            out.stoppedByDelta = true;
            return out;
        }
        if (measureVolRatio(r, rh, f, uc) >= tuning.rVolLimit) {
            out.stoppedByDelta = false;
            return out;
        }
    }
    throw ReachError(kStage, "scaling phase did not flatten within the step cap");
}

Crossing refineCrossing(const AffineFlow& flow, const Transition& tr, const Zonotope& rsh,
                        const std::vector<HalfSpace>& invariant, double fineDt, const InputModel& inputs,
                        int clockIndex, int maxSteps, double maxOrder) {
    LinearStepper stepper(flow, fineDt);
    Crossing out;
    Zonotope r = rsh;
    int first = -1;
    for (int k = 0; k < maxSteps; ++k) {
        StepResult s = stepper.step(r, unifyInputs(inputs, r, clockIndex, fineDt));
        Zonotope ti = reduceOrder(s.timeIntervalSet, maxOrder);
        if (touchesGuard(ti, tr)) {
            if (first < 0) {
                first = k;
                out.start = r;
            }
            out.fineSets.push_back(ti);
        } else if (first >= 0) {
            out.ts = (k - first) * fineDt;
            break;
        }
        r = reduceOrder(s.timePointSet, maxOrder);
        if (!intersectsAll(r, invariant)) {
            if (first < 0) throw ReachError(kStage, "refinement left the invariant without touching the guard");
            out.ts = (k + 1 - first) * fineDt;
            break;
        }
        if (k + 1 == maxSteps) throw ReachError(kStage, "refinement did not finish crossing within the step cap");
    }
    const Interval a = clockProjection(out.fineSets.front(), clockIndex);
    const Interval b = clockProjection(out.fineSets.back(), clockIndex);
    out.clockWindow = {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
    return out;
}

namespace {

struct ScaledCrossing {
    Crossing crossing;
    int scaledSteps = 0;
};

ScaledCrossing scaleAndRefine(const IntersectionJob& job) {
    const Hyperplane& guard = job.transition.guard;
    const double rho0 = supDistance(job.preHitSet, guard);
    if (!(rho0 > 0.0)) throw ReachError(kStage, "scaling: pre-hit set does not lie on the approach side");
    QuadraticFlow qf{job.flow, guard.normal(), guard.offset(), job.tuning.ks / rho0};
    FlatResult flat = reachUntilFlat(qf, job.preHitSet, guard, job.tuning, *job.inputs, job.clockIndex, job.stepSize);
    const double fineDt = job.stepSize / job.tuning.refineFactor;
    Crossing c = refineCrossing(job.flow, job.transition, flat.set, job.invariant, fineDt, *job.inputs,
                                job.clockIndex, job.tuning.maxFineSteps, job.tuning.maxOrder);
    return {std::move(c), flat.steps};
}

}  // namespace

std::optional<IntervalVector> intersectTsm(const IntersectionJob& job, IntersectionOutcome* diag) {
    ScaledCrossing sc = scaleAndRefine(job);
    const Crossing& c = sc.crossing;
    // every state of the start set crosses within [0, Ts] of its own clock
    const Interval startClock = clockProjection(c.start, job.clockIndex);
    const double lo = std::min(c.clockWindow.lo, startClock.lo);
    const double hi = std::max(c.clockWindow.hi, startClock.hi + c.ts);
    Zonotope u = inputsOverWindow(*job.inputs, lo, hi);
    if (diag) {
        diag->scaledSteps = sc.scaledSteps;
        diag->ts = c.ts;
    }
    return sliceAndPrune(mappingSet(c.start, job.flow, job.transition.guard, u, c.ts), job.transition.guard,
                         job.pruneSet());
}

std::optional<IntervalVector> intersectScaling(const IntersectionJob& job, IntersectionOutcome* diag) {
    ScaledCrossing sc = scaleAndRefine(job);
    if (diag) {
        diag->scaledSteps = sc.scaledSteps;
        diag->ts = sc.crossing.ts;
    }
    std::optional<IntervalVector> out;
    const auto prune = job.pruneSet();
    for (const auto& p : sc.crossing.fineSets) out = unionBox(out, pruneWithInvariant(p, prune));
    return out;
}

std::optional<IntervalVector> intersectMappingJob(const IntersectionJob& job) {
    const double ts = double(job.hitSets.size()) * job.stepSize;
    const Interval a = clockProjection(job.preHitSet, job.clockIndex);
    const Interval b = clockProjection(job.hitSets.back(), job.clockIndex);
    Zonotope u = inputsOverWindow(*job.inputs, std::min(a.lo, b.lo), std::max(b.hi, a.hi + ts));
    return sliceAndPrune(mappingSet(job.preHitSet, job.flow, job.transition.guard, u, ts), job.transition.guard,
                         job.pruneSet());
}

IntersectionOutcome intersectTrinal(const IntersectionJob& job) {
    IntersectionOutcome out;
    out.method = IntersectionMethod::Trinal;
    out.geometric = intersectGeometric(job.hitSets, job.transition.guard, job.pruneSet());
    try {
        out.tsm = intersectTsm(job, &out);
    } catch (const ReachError& e) {
        out.tsmFailed = true;
        out.note = e.what();
    }
    if (out.tsmFailed) {
        out.set = out.geometric;
        return out;
    }
    if (!out.geometric || !out.tsm) {
        // one enclosure proves the transition unreachable
        out.set = std::nullopt;
        return out;
    }
    out.set = out.geometric->intersect(*out.tsm, 1e-8);
    if (!out.set) throw ReachError(kStage, "trinal: geometric and TSM enclosures are disjoint");
    return out;
}

IntersectionOutcome intersect(const IntersectionJob& job, IntersectionMethod method) {
    if (job.hitSets.empty()) throw std::invalid_argument("intersection job without hit sets");
    if (!job.inputs) throw std::invalid_argument("intersection job without input model");
    IntersectionOutcome out;
    out.method = method;
    switch (method) {
        case IntersectionMethod::Geometric:
            out.set = intersectGeometric(job.hitSets, job.transition.guard, job.pruneSet());
            break;
        case IntersectionMethod::Mapping:
            out.set = intersectMappingJob(job);
            break;
        case IntersectionMethod::Scaling:
            out.set = intersectScaling(job, &out);
            break;
        case IntersectionMethod::Tsm:
            out.set = intersectTsm(job, &out);
            break;
        case IntersectionMethod::Trinal:
            return intersectTrinal(job);
    }
    return out;
}

}  // namespace hyreach
