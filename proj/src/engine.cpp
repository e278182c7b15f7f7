#include "hyreach/engine.hpp"

#include <chrono>
#include <cmath>
#include <algorithm>
#include <deque>
#include <functional>

namespace hyreach {

namespace {

const char* const kStage = "hybrid-core";

struct Pending {
    int parent = -1;
    int group = -1;
    int location = -1;
    int depth = 0;
    bool synced = false;
    Zonotope initial;
    std::vector<ReachEntry> prefix;
    int subsumedBy = -1;
};

double seconds(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

std::vector<std::vector<int>> ReachResult::leafPaths() const {
    std::vector<std::vector<int>> out;
    if (segments.empty()) return out;
    // expand(node) = every path through the subtree rooted at node; groups multiply
    std::function<std::vector<std::vector<int>>(int)> expand = [&](int id) {
        std::vector<std::vector<int>> acc{{id}};
        for (const auto& group : segments[std::size_t(id)].childGroups) {
            std::vector<std::vector<int>> options;
            for (int child : group) {
                auto sub = expand(child);
                options.insert(options.end(), sub.begin(), sub.end());
            }
            if (options.empty()) continue;
            std::vector<std::vector<int>> next;
            for (const auto& a : acc)
                for (const auto& o : options) {
                    auto joined = a;
                    joined.insert(joined.end(), o.begin(), o.end());
                    next.push_back(std::move(joined));
                }
            acc = std::move(next);
        }
        return acc;
    };
    return expand(0);
}

Zonotope syncSlice(const std::vector<Zonotope>& sets, double tL, int clockIndex) {
    if (sets.empty()) throw ReachError(kStage, "sync: nothing to slice");
    const Eigen::Index n = sets.front().dim();
    const Hyperplane clockPlane(Vec::Unit(n, clockIndex), tL);
    std::optional<IntervalVector> box;
    for (const auto& s : sets) {
        if (!clockProjection(s, clockIndex).contains(tL, 1e-12)) continue;
        auto h = czIntervalHull(intersectHyperplane(ConstrainedZonotope(s), clockPlane));
        if (!h) continue;
        box = box ? box->hull(*h) : *h;
    }
    if (!box) throw ReachError(kStage, "sync: no reachable set meets the synchronization time");
    Vec lo = box->lower(), hi = box->upper();
    lo(clockIndex) = tL;
    hi(clockIndex) = tL;
    return Zonotope::fromInterval({lo, hi});
}

std::optional<SyncResult> syncTime(const HybridAutomaton& ha, int location, const Zonotope& initial,
                                   const InputModel& im, double stepSize, double maxOrder) {
    const Location& loc = ha.locations.at(std::size_t(location));
    const Interval clk = clockProjection(initial, ha.clockIndex);
    const double width = clk.width();
    if (width <= 0.0) return SyncResult{initial, {}};
    const int steps = std::max(1, int(std::ceil(width / stepSize - 1e-9)));
    LinearStepper stepper(loc.flow, width / steps);

    SyncResult out;
    std::vector<Zonotope> sets;
    Zonotope r = initial;
    for (int k = 0; k < steps; ++k) {
        StepResult s = stepper.step(r, unifyInputs(im, r, ha.clockIndex, stepper.stepSize()));
        Zonotope ti = reduceOrder(s.timeIntervalSet, maxOrder);
        for (const auto& tr : loc.transitions) {
            if (touchesGuard(ti, tr)) return std::nullopt;
        }
        r = reduceOrder(s.timePointSet, maxOrder);
        if (!intersectsAll(r, loc.invariant)) return std::nullopt;
        out.entries.push_back({location, ti, Zonotope(), clockProjection(ti, ha.clockIndex)});
        sets.push_back(std::move(ti));
    }
    out.set = syncSlice(sets, clk.hi, ha.clockIndex);
    return out;
}

std::vector<GuardHitRun> detectGuardHits(const std::vector<Zonotope>& sets, const std::vector<Transition>& transitions,
                                         int maxHitSteps) {
    std::vector<GuardHitRun> runs;
    for (std::size_t j = 0; j < transitions.size(); ++j) {
        std::optional<GuardHitRun> active;
        for (std::size_t k = 0; k < sets.size(); ++k) {
            if (touchesGuard(sets[k], transitions[j])) {
                if (!active) active = GuardHitRun{int(j), k, {}};
                active->steps.push_back(k);
                if (int(active->steps.size()) > maxHitSteps) {
                    throw ReachError(kStage, "guard hit run of transition " + transitions[j].name +
                                                 " exceeds maxHitSteps");
                }
            } else if (active) {
                runs.push_back(std::move(*active));
                active.reset();
            }
        }
        if (active) runs.push_back(std::move(*active));
    }
    std::stable_sort(runs.begin(), runs.end(),
                     [](const GuardHitRun& a, const GuardHitRun& b) { return a.firstStep < b.firstStep; });
    return runs;
}

namespace {

// The zonotope is its own interval hull when no generator couples two axes.
std::optional<IntervalVector> exactBox(const Zonotope& z) {
    const Mat& g = z.generators();
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
        if ((g.col(j).array() != 0.0).count() > 1) return std::nullopt;
    }
    return intervalHull(z);
}

bool boxContains(const IntervalVector& outer, const IntervalVector& inner) {
    for (Eigen::Index i = 0; i < inner.dim(); ++i) {
        const double tol = 1e-12 * (1.0 + std::abs(outer.lower()(i)) + std::abs(outer.upper()(i)));
        if (inner.lower()(i) < outer.lower()(i) - tol || inner.upper()(i) > outer.upper()(i) + tol) return false;
    }
    return true;
}

// Initial boxes of the same-location visits on the path to the root
// (subsumed visits excluded).
struct Ancestor {
    int id = -1;
    IntervalVector box;
};
std::vector<Ancestor> sameLocationAncestors(const std::vector<Segment>& segs, int from, int location) {
    std::vector<Ancestor> out;
    for (int a = from; a >= 0; a = segs[std::size_t(a)].parent) {
        const Segment& s = segs[std::size_t(a)];
        if (s.location != location || s.subsumedBy >= 0) continue;
        if (auto box = exactBox(s.initialSet)) out.push_back({a, *box});
    }
    return out;
}

struct ChildPlan {
    int transition = -1;
    IntervalVector box;
    std::vector<std::size_t> records;
};

// A segment completes when it did not fail and every child group has a
// completed alternative.
std::vector<bool> completion(const std::vector<Segment>& segs) {
    std::vector<bool> done(segs.size(), false);
    for (std::size_t s = segs.size(); s-- > 0;) {
        bool ok = !segs[s].failed;
        for (const auto& group : segs[s].childGroups) {
            bool any = false;
            for (int c : group) any = any || done[std::size_t(c)];
            ok = ok && any;
        }
        done[s] = ok;
    }
    return done;
}

ReachResult explore(const HybridAutomaton& ha, const Zonotope& x0, int startLocation, const InputModel& im,
                    const EngineOptions& options, double dt) {
    const auto started = std::chrono::steady_clock::now();
    const double syncThreshold = options.syncThreshold < 0.0 ? 2.0 * dt : options.syncThreshold;
    const int clockIndex = ha.clockIndex;

    ReachResult result;
    std::deque<Pending> queue;
    queue.push_back({-1, -1, startLocation, 0, false, x0, {}});

    while (!queue.empty()) {
        Pending job = std::move(queue.front());
        queue.pop_front();
        if (int(result.segments.size()) >= options.maxSegments)
            throw ReachError(kStage, "branch cap exceeded (maxSegments)");

        const int id = int(result.segments.size());
        result.segments.push_back({});
        {
            Segment& seg = result.segments.back();
            seg.id = id;
            seg.parent = job.parent;
            seg.location = job.location;
            seg.depth = job.depth;
            seg.synced = job.synced;
            seg.initialSet = job.initial;
            seg.entries = std::move(job.prefix);
            if (job.parent >= 0) result.segments[std::size_t(job.parent)].childGroups[std::size_t(job.group)].push_back(id);
        }
        if (job.subsumedBy >= 0) {
            result.segments[std::size_t(id)].subsumedBy = job.subsumedBy;
            continue;
        }

        const Location& loc = ha.locations[std::size_t(job.location)];
        std::vector<IntersectionRecord> records;
        std::vector<ChildPlan> plans;
        try {
            std::vector<Zonotope> starts;  // time-point set at the start of each step
            std::vector<Zonotope> intervals;
            std::vector<ReachEntry> entries;
            bool left = false;
            if (!intersectsAll(job.initial, loc.invariant)) {
                left = true;
            } else {
                LinearStepper stepper(loc.flow, dt);
                Zonotope r = job.initial;
                while (clockProjection(r, clockIndex).lo < options.tEnd - 1e-12) {
                    StepResult s = stepper.step(r, unifyInputs(im, r, clockIndex, dt));
                    starts.push_back(r);
                    intervals.push_back(reduceOrder(s.timeIntervalSet, options.maxOrder));
                    r = reduceOrder(s.timePointSet, options.maxOrder);

                    ReachEntry e;
                    e.location = job.location;
                    e.timeIntervalSet = reduceOrder(intervals.back(), options.storeOrder);
                    e.clock = clockProjection(intervals.back(), clockIndex);
                    if (options.keepTimePointSets) e.timePointSet = reduceOrder(r, options.storeOrder);
                    entries.push_back(std::move(e));

                    if (!intersectsAll(r, loc.invariant)) {
                        left = true;
                        break;
                    }
                }
            }
            {
                Segment& seg = result.segments[std::size_t(id)];
                seg.entries.insert(seg.entries.end(), std::make_move_iterator(entries.begin()),
                                   std::make_move_iterator(entries.end()));
                seg.leftInvariant = left;
            }

            for (const GuardHitRun& run : detectGuardHits(intervals, loc.transitions, options.maxHitSteps)) {
                const Transition& tr = loc.transitions[std::size_t(run.transition)];
                IntersectionJob ij;
                ij.flow = loc.flow;
                ij.transition = tr;
                ij.invariant = loc.invariant;
                for (std::size_t k : run.steps) ij.hitSets.push_back(intervals[k]);
                ij.preHitSet = starts[run.firstStep];
                ij.inputs = &im;
                ij.clockIndex = clockIndex;
                ij.stepSize = dt;
                ij.tuning = options.tuning;

                IntersectionRecord rec;
                rec.segment = id;
                rec.location = job.location;
                rec.transition = run.transition;
                rec.transitionName = tr.name;
                rec.order = job.depth + 1;
                rec.method = options.method;
                rec.hitSteps = int(run.steps.size());
                rec.hitWindow = {clockProjection(ij.hitSets.front(), clockIndex).lo,
                                 clockProjection(ij.hitSets.back(), clockIndex).hi};
                if (rec.hitWindow.lo >= options.tEnd) continue;

                const auto t0 = std::chrono::steady_clock::now();
                IntersectionOutcome outcome;
                try {
                    outcome = intersect(ij, options.method);
                } catch (const ReachError& e) {
                    throw ReachError(e.stage(), "transition " + tr.name + ": " + e.what());
                }
                rec.wallSeconds = seconds(t0);
                rec.set = outcome.set;
                rec.tsmFailed = outcome.tsmFailed;
                rec.note = outcome.note;
                rec.scaledSteps = outcome.scaledSteps;
                if (outcome.set) rec.measure = intersectionMeasure(*outcome.set, tr.guard);
                if (outcome.geometric) rec.measureGeometric = intersectionMeasure(*outcome.geometric, tr.guard);
                if (outcome.tsm) rec.measureTsm = intersectionMeasure(*outcome.tsm, tr.guard);

                if (outcome.set) {
                    if (job.depth + 1 > options.maxJumps) throw ReachError(kStage, "jump depth exceeds maxJumps");
                    // separate runs of one transition feed a single child (hull of their boxes)
                    auto plan = std::find_if(plans.begin(), plans.end(),
                                             [&](const ChildPlan& c) { return c.transition == run.transition; });
                    if (plan == plans.end()) {
                        plans.push_back({run.transition, *outcome.set, {}});
                        plan = std::prev(plans.end());
                    } else {
                        plan->box = plan->box.hull(*outcome.set);
                    }
                    plan->records.push_back(records.size());
                }
                records.push_back(std::move(rec));
            }
        } catch (const ReachError& e) {
            Segment& seg = result.segments[std::size_t(id)];
            seg.failed = true;
            seg.failure = e.what();
            for (auto& rec : records) result.intersections.push_back(std::move(rec));
            continue;
        }

        for (const ChildPlan& plan : plans) {
            const Transition& tr = loc.transitions[std::size_t(plan.transition)];
            Segment& seg = result.segments[std::size_t(id)];
            const int group = int(seg.childGroups.size());
            seg.childGroups.emplace_back();
            for (std::size_t r : plan.records) records[r].childGroup = group;
            // states past the horizon are never needed
            Vec lo = plan.box.lower(), hi = plan.box.upper();
            hi(clockIndex) = std::max(lo(clockIndex), std::min(hi(clockIndex), options.tEnd));
            Zonotope child = applyJump(tr, Zonotope::fromInterval({lo, hi}));

            // a child inside the initial box of an earlier visit to the same
            // location adds no new behaviour
            if (auto box = exactBox(child)) {
                int subsumer = -1;
                for (const auto& a : sameLocationAncestors(result.segments, id, tr.target)) {
                    if (boxContains(a.box, *box)) {
                        subsumer = a.id;
                        break;
                    }
                }
                if (subsumer >= 0) {
                    queue.push_back({id, group, tr.target, job.depth + 1, false, child, {}, subsumer});
                    continue;
                }
            }

            std::optional<SyncResult> sync;
            const bool wantSync = options.syncMode != SyncMode::UnsyncedOnly &&
                                  clockProjection(child, clockIndex).width() > syncThreshold;
            if (wantSync) {
                try {
                    sync = syncTime(ha, tr.target, child, im, dt, options.maxOrder);
                } catch (const ReachError&) {
                    sync.reset();
                }
            }
            if (sync) {
                queue.push_back({id, group, tr.target, job.depth + 1, true, sync->set, sync->entries});
            }
            if (!sync || options.syncMode != SyncMode::SyncedOnly) {
                queue.push_back({id, group, tr.target, job.depth + 1, false, child, {}});
            }
        }
        for (auto& rec : records) result.intersections.push_back(std::move(rec));
    }
    result.wallSeconds = seconds(started);

    const std::vector<bool> done = completion(result.segments);
    if (!done.front()) {
        std::string why = "incomplete";
        for (const auto& seg : result.segments) {
            if (seg.failed) {
                why = "segment " + std::to_string(seg.id) + " (" + ha.locations[std::size_t(seg.location)].name +
                      "): " + seg.failure;
                break;
            }
        }
        throw ReachError(kStage, "no complete branch: " + why);
    }
    result.stepSize = dt;
    return result;
}

}  // namespace

ReachResult runAutomaton(const HybridAutomaton& ha, const Zonotope& x0, int startLocation, const InputModel& im,
                         const EngineOptions& options) {
    ha.validate();
    im.validate();
    if (startLocation < 0 || startLocation >= int(ha.locations.size()))
        throw std::invalid_argument("start location out of range");
    requireSameDim(x0.dim(), ha.stateDim(), "initial set");
    if (!intersectsAll(x0, ha.locations[std::size_t(startLocation)].invariant))
        throw ReachError(kStage, "initial set lies outside the start invariant");
    if (!(options.stepSize > 0.0)) throw std::invalid_argument("step size must be positive");

    const auto started = std::chrono::steady_clock::now();
    double dt = options.stepSize;
    for (int level = 0;; ++level) {
        try {
            ReachResult result = explore(ha, x0, startLocation, im, options, dt);
            result.refinements = level;
            result.wallSeconds = seconds(started);
            return result;
        } catch (const ReachError& e) {
            // a run that cannot be completed is repeated with half the step
            if (level >= options.maxRefinements || e.stage() != kStage) throw;
            dt /= 2.0;
        }
    }
}

}  // namespace hyreach
