#pragma once

#include "hyreach/engine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hyreach {

struct SimEvent {
    double time = 0.0;
    int from = -1;
    int to = -1;
    std::string transition;
};

/// Point trajectory sampled on the record grid; locations[i] is the location
/// active at times[i] (after any jump at that instant).
struct SimTrace {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<int> locations;
    std::vector<SimEvent> events;
};

struct SimOptions {
    double dtSim = 6.5e-4 / 20.0;
    double tEnd = 0.8;
    double recordInterval = 6.5e-4;  // states are stored at multiples of this
    double eventTolerance = 1e-10;
    int maxJumps = 12;
};

/// Fixed-step RK4 of the location flows under the zero-order-hold delayed
/// input plus the constant disturbance w. Steps are cut at input switches so
/// the integrand stays smooth. Guard crossings are found by a sign change of
/// normal'x - offset and bisected to eventTolerance; the event is placed at
/// the first bracket point on or past the guard.
SimTrace simulateTrajectory(const HybridAutomaton& ha, const Vec& x0, int startLocation, const InputModel& im,
                            const Vec& w, const SimOptions& options);

/// Same with w drawn uniformly from the input uncertainty set.
SimTrace simulateTrajectory(const HybridAutomaton& ha, const Vec& x0, int startLocation, const InputModel& im,
                            std::uint64_t seed, const SimOptions& options);

/// Seed of trajectory i under a master seed (splitmix64).
std::uint64_t trajectorySeed(std::uint64_t master, std::uint64_t i);

/// Uniform point of the box / of the zonotope's generator cube image.
Vec samplePoint(const IntervalVector& box, std::uint64_t seed);
Vec sampleZonotope(const Zonotope& z, std::uint64_t seed);

struct ContainmentOptions {
    int samples = 1000;
    std::uint64_t seed = 1;
    double dtSim = 0.0;  // 0: reach step / 20
    double tolerance = 1e-9;
    int maxJumps = 12;
};

struct ContainmentViolation {
    int sample = -1;
    double time = 0.0;
    int location = -1;
    Vec state;
};

struct ContainmentReport {
    int samples = 0;
    long checkedPoints = 0;
    std::vector<ContainmentViolation> violations;
    int simulationErrors = 0;

    bool passed() const { return violations.empty() && simulationErrors == 0; }
};

/// Lookup of stored time-interval sets by clock.
class EntryIndex {
public:
    explicit EntryIndex(const ReachResult& result);

    /// True when x lies in some entry whose clock interval covers t.
    bool covers(double t, const Vec& x, double tol) const;

private:
    struct Item {
        const ReachEntry* entry;
        IntervalVector box;
    };
    std::vector<Item> items_;
    std::vector<std::vector<std::size_t>> buckets_;
    std::vector<std::size_t> wide_;
    double t0_ = 0.0;
    double width_ = 1.0;

    bool check(const Item& item, double t, const Vec& x, double tol) const;
};

/// Simulates samples trajectories from uniform points of x0Box (one constant
/// disturbance per trajectory) and checks every record-grid state against the
/// reachable sets. Trajectories run in parallel.
ContainmentReport containmentTest(const HybridAutomaton& ha, const IntervalVector& x0Box, int startLocation,
                                  const InputModel& im, const ReachResult& result, const EngineOptions& engine,
                                  const ContainmentOptions& options);

/// Serial reference of containmentTest; identical report.
ContainmentReport containmentTestSerial(const HybridAutomaton& ha, const IntervalVector& x0Box, int startLocation,
                                        const InputModel& im, const ReachResult& result, const EngineOptions& engine,
                                        const ContainmentOptions& options);

}  // namespace hyreach
