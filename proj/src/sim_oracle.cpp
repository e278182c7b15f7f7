#include "hyreach/sim_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hyreach {

namespace {

const char* const kStage = "sim-oracle";

Vec rk4(const AffineFlow& f, const Vec& x, const Vec& u, double h) {
    const Vec k1 = f.eval(x, u);
    const Vec k2 = f.eval(x + 0.5 * h * k1, u);
    const Vec k3 = f.eval(x + 0.5 * h * k2, u);
    const Vec k4 = f.eval(x + h * k3, u);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// First time after t at which the delayed zero-order-hold sample changes.
double nextSwitch(const InputModel& im, double t) {
    const double k = std::floor((t - im.inputDelay) / im.sampleInterval + 1e-9) + 1.0;
    return k * im.sampleInterval + im.inputDelay;
}

bool sideConditionsHold(const Transition& tr, const Vec& x) {
    for (const auto& h : tr.sideConditions) {
        if (!h.contains(x, 1e-12)) return false;
    }
    return true;
}

struct GuardEvent {
    int transition = -1;
    double time = 0.0;
    Vec state;
};

// Event on [t, t + h] for transition tr, if its guard function changes sign.
std::optional<GuardEvent> locateCrossing(const AffineFlow& f, const Transition& tr, int index, double t, const Vec& x,
                                       const Vec& u, double h, const Vec& xEnd, double tol) {
    const Hyperplane& g = tr.guard;
    if (!(g.signedDistance(x) > 0.0) || g.signedDistance(xEnd) > 0.0) return std::nullopt;
    double a = 0.0;
    double b = h;
    Vec xb = xEnd;
    while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        Vec xm = rk4(f, x, u, mid);
        if (g.signedDistance(xm) > 0.0) {
            a = mid;
        } else {
            b = mid;
            xb = std::move(xm);
        }
    }
    return GuardEvent{index, t + b, std::move(xb)};
}

}  // namespace

SimTrace simulateTrajectory(const HybridAutomaton& ha, const Vec& x0, int startLocation, const InputModel& im,
                            const Vec& w, const SimOptions& options) {
    if (startLocation < 0 || startLocation >= int(ha.locations.size()))
        throw std::invalid_argument("start location out of range");
    requireSameDim(x0.size(), ha.stateDim(), "simulateTrajectory state");
    requireSameDim(w.size(), im.dim(), "simulateTrajectory disturbance");
    if (!(options.dtSim > 0.0) || !(options.recordInterval > 0.0) || !(options.eventTolerance > 0.0))
        throw std::invalid_argument("simulation steps and tolerances must be positive");

    SimTrace trace;
    int location = startLocation;
    Vec x = x0;
    double t = ha.clockIndex >= 0 ? x0(ha.clockIndex) : 0.0;
    long k = long(std::ceil(t / options.recordInterval - 1e-9));
    auto recordTime = [&](long i) { return double(i) * options.recordInterval; };
    auto record = [&]() {
        trace.times.push_back(t);
        trace.states.push_back(x);
        trace.locations.push_back(location);
        ++k;
    };
    if (std::abs(recordTime(k) - t) <= 1e-12) record();

    while (t < options.tEnd - 1e-15) {
        const double next = recordTime(k);
        double tb = std::min({t + options.dtSim, nextSwitch(im, t), options.tEnd});
        const bool onRecord = next <= tb + 1e-15;
        if (onRecord) tb = next;
        const double h = tb - t;
        const Location& loc = ha.locations[std::size_t(location)];
        const Vec u = im.delayedAt(t + 0.5 * h) + w;
        Vec xn = rk4(loc.flow, x, u, h);

        std::optional<GuardEvent> event;
        std::vector<GuardEvent> crossings;
        for (std::size_t j = 0; j < loc.transitions.size(); ++j) {
            if (auto c = locateCrossing(loc.flow, loc.transitions[j], int(j), t, x, u, h, xn, options.eventTolerance))
                crossings.push_back(std::move(*c));
        }
        std::stable_sort(crossings.begin(), crossings.end(),
                         [](const GuardEvent& a, const GuardEvent& b) { return a.time < b.time; });
        for (auto& c : crossings) {
            if (sideConditionsHold(loc.transitions[std::size_t(c.transition)], c.state)) {
                event = std::move(c);
                break;
            }
        }
        if (event) {
            const Transition& tr = loc.transitions[std::size_t(event->transition)];
            x = tr.jumpMatrix * event->state + tr.jumpOffset;
            t = event->time;
            trace.events.push_back({t, location, tr.target, tr.name});
            location = tr.target;
            if (int(trace.events.size()) > options.maxJumps)
                throw ReachError(kStage, "event chattering: more than maxJumps transitions");
            if (std::abs(recordTime(k) - t) <= 1e-12) record();
            continue;
        }
        x = std::move(xn);
        t = tb;
        if (onRecord) record();
    }
    return trace;
}

std::uint64_t trajectorySeed(std::uint64_t master, std::uint64_t i) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (i + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Vec samplePoint(const IntervalVector& box, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vec x(box.dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x(i) = box.lower()(i) + unit(rng) * (box.upper()(i) - box.lower()(i));
    }
    return x;
}

Vec sampleZonotope(const Zonotope& z, std::uint64_t seed) {
    const Eigen::Index p = z.numGenerators();
    if (p == 0) return z.center();
    const Vec beta = samplePoint({Vec::Constant(p, -1.0), Vec::Constant(p, 1.0)}, seed);
    return z.center() + z.generators() * beta;
}

SimTrace simulateTrajectory(const HybridAutomaton& ha, const Vec& x0, int startLocation, const InputModel& im,
                            std::uint64_t seed, const SimOptions& options) {
    return simulateTrajectory(ha, x0, startLocation, im, sampleZonotope(im.uncertainty, seed), options);
}

EntryIndex::EntryIndex(const ReachResult& result) {
    double lo = std::numeric_limits<double>::infinity();
    double step = result.stepSize > 0.0 ? result.stepSize : 0.0;
    for (const auto& seg : result.segments) {
        for (const auto& e : seg.entries) {
            items_.push_back({&e, intervalHull(e.timeIntervalSet)});
            lo = std::min(lo, e.clock.lo);
            if (step == 0.0) step = e.clock.width();
        }
    }
    if (items_.empty()) return;
    t0_ = lo;
    width_ = step > 0.0 ? step : 1.0;
    // sets spanning many buckets are kept aside and always checked
    constexpr double kWide = 8.0;
    for (std::size_t i = 0; i < items_.size(); ++i) {
        const Interval& c = items_[i].entry->clock;
        if (c.width() > kWide * width_) {
            wide_.push_back(i);
            continue;
        }
        const auto first = std::size_t(std::max(0.0, std::floor((c.lo - t0_) / width_)));
        const auto last = std::size_t(std::max(0.0, std::floor((c.hi - t0_) / width_)));
        if (buckets_.size() <= last) buckets_.resize(last + 1);
        for (std::size_t b = first; b <= last; ++b) buckets_[b].push_back(i);
    }
}

bool EntryIndex::check(const Item& item, double t, const Vec& x, double tol) const {
    if (!item.entry->clock.contains(t, 1e-12)) return false;
    if (!item.box.contains(x, tol)) return false;
    return containsPoint(item.entry->timeIntervalSet, x, tol);
}

bool EntryIndex::covers(double t, const Vec& x, double tol) const {
    if (items_.empty()) return false;
    const double pos = std::floor((t - t0_) / width_);
    if (pos >= 0.0) {
        // neighbours absorb rounding at bucket edges
        const auto b = std::size_t(pos);
        for (std::size_t q = b == 0 ? 0 : b - 1; q <= b + 1 && q < buckets_.size(); ++q) {
            for (std::size_t i : buckets_[q]) {
                if (check(items_[i], t, x, tol)) return true;
            }
        }
    }
    for (std::size_t i : wide_) {
        if (check(items_[i], t, x, tol)) return true;
    }
    return false;
}

namespace {

struct SampleOutcome {
    long checked = 0;
    bool simError = false;
    std::vector<ContainmentViolation> violations;
};

SampleOutcome checkSample(const HybridAutomaton& ha, const IntervalVector& x0Box, int startLocation,
                          const InputModel& im, const EntryIndex& index, const SimOptions& sim,
                          const ContainmentOptions& options, int i) {
    SampleOutcome out;
    const std::uint64_t seed = trajectorySeed(options.seed, std::uint64_t(i));
    const Vec x0 = samplePoint(x0Box, trajectorySeed(seed, 0));
    const Vec w = sampleZonotope(im.uncertainty, trajectorySeed(seed, 1));
    SimTrace trace;
    try {
        trace = simulateTrajectory(ha, x0, startLocation, im, w, sim);
    } catch (const ReachError&) {
        out.simError = true;
        return out;
    }
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        ++out.checked;
        if (!index.covers(trace.times[k], trace.states[k], options.tolerance)) {
            out.violations.push_back({i, trace.times[k], trace.locations[k], trace.states[k]});
        }
    }
    return out;
}

SimOptions simOptionsFor(const ReachResult& result, const EngineOptions& engine, const ContainmentOptions& options) {
    SimOptions sim;
    const double step = result.stepSize > 0.0 ? result.stepSize : engine.stepSize;
    sim.recordInterval = step;
    sim.dtSim = options.dtSim > 0.0 ? options.dtSim : step / 20.0;
    sim.tEnd = engine.tEnd;
    sim.maxJumps = options.maxJumps;
    return sim;
}

ContainmentReport merge(std::vector<SampleOutcome>& outcomes) {
    ContainmentReport report;
    report.samples = int(outcomes.size());
    for (auto& o : outcomes) {
        report.checkedPoints += o.checked;
        report.simulationErrors += o.simError ? 1 : 0;
        for (auto& v : o.violations) report.violations.push_back(std::move(v));
    }
    return report;
}

}  // namespace

ContainmentReport containmentTest(const HybridAutomaton& ha, const IntervalVector& x0Box, int startLocation,
                                  const InputModel& im, const ReachResult& result, const EngineOptions& engine,
                                  const ContainmentOptions& options) {
    const EntryIndex index(result);
    const SimOptions sim = simOptionsFor(result, engine, options);
    std::vector<SampleOutcome> outcomes(std::size_t(std::max(0, options.samples)));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < options.samples; ++i) {
        outcomes[std::size_t(i)] = checkSample(ha, x0Box, startLocation, im, index, sim, options, i);
    }
    return merge(outcomes);
}

ContainmentReport containmentTestSerial(const HybridAutomaton& ha, const IntervalVector& x0Box, int startLocation,
                                        const InputModel& im, const ReachResult& result, const EngineOptions& engine,
                                        const ContainmentOptions& options) {
    const EntryIndex index(result);
    const SimOptions sim = simOptionsFor(result, engine, options);
    std::vector<SampleOutcome> outcomes(std::size_t(std::max(0, options.samples)));
    for (int i = 0; i < options.samples; ++i) {
        outcomes[std::size_t(i)] = checkSample(ha, x0Box, startLocation, im, index, sim, options, i);
    }
    return merge(outcomes);
}

}  // namespace hyreach
