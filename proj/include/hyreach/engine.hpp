#pragma once

#include "hyreach/guard_intersect.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hyreach {

enum class SyncMode { Both, SyncedOnly, UnsyncedOnly };

struct EngineOptions {
    double stepSize = 6.5e-4;
    double tEnd = 0.8;
    IntersectionMethod method = IntersectionMethod::Trinal;
    IntersectionTuning tuning;
    double syncThreshold = -1.0;  // < 0 means two coarse steps
    SyncMode syncMode = SyncMode::Both;
    int maxJumps = 12;
    int maxHitSteps = 2000;
    int maxSegments = 512;
    // times the whole run is repeated with a halved step when no branch completes
    int maxRefinements = 2;
    double maxOrder = 20.0;
    // stored time-interval sets are reduced further; interval hulls are unaffected
    double storeOrder = 10.0;
    bool keepTimePointSets = false;
};

struct ReachEntry {
    int location = -1;
    Zonotope timeIntervalSet;
    Zonotope timePointSet;  // empty unless requested
    Interval clock;
};

struct IntersectionRecord {
    int segment = -1;         // source segment
    int location = -1;
    int transition = -1;      // index within the source location
    std::string transitionName;
    int order = 0;            // 1 for the first intersection along a branch
    IntersectionMethod method = IntersectionMethod::Geometric;
    std::optional<IntervalVector> set;
    double measure = 0.0;
    std::optional<double> measureGeometric;
    std::optional<double> measureTsm;
    bool tsmFailed = false;
    std::string note;
    Interval hitWindow;       // clock span of the hit sets
    int hitSteps = 0;
    int scaledSteps = 0;
    double wallSeconds = 0.0;
    int childGroup = -1;      // index into the source segment's groups
};

/// One visit of a location. Child groups are separate transitions (all must
/// be safe); the alternatives inside a group are the synced and unsynced
/// continuations of the same transition (either may certify safety).
struct Segment {
    int id = -1;
    int parent = -1;
    int location = -1;
    int depth = 0;  // number of jumps before this visit
    bool synced = false;
    Zonotope initialSet;
    std::vector<ReachEntry> entries;
    std::vector<std::vector<int>> childGroups;
    bool leftInvariant = false;
    int subsumedBy = -1;  // same-location ancestor whose initial set contains this one; not propagated
    bool failed = false;  // propagation or an intersection threw; no children
    std::string failure;
};

struct ReachResult {
    std::vector<Segment> segments;
    std::vector<IntersectionRecord> intersections;
    double wallSeconds = 0.0;
    double stepSize = 0.0;  // step of the completed run
    int refinements = 0;    // halvings of the requested step

    /// Root-to-leaf segment paths, one per combination of alternatives.
    std::vector<std::vector<int>> leafPaths() const;
};

/// Time-point states at clock t_l: propagate I for t_l - t_h in N steps and
/// slice every time-interval set with {t = t_l}. Returns nullopt when the
/// propagation touches a guard or leaves the invariant (sync not applicable).
struct SyncResult {
    Zonotope set;
    std::vector<ReachEntry> entries;
};
std::optional<SyncResult> syncTime(const HybridAutomaton& ha, int location, const Zonotope& initial,
                                   const InputModel& im, double stepSize, double maxOrder);

/// Slices sets with {t = tL} and returns the union box with the clock pinned.
Zonotope syncSlice(const std::vector<Zonotope>& sets, double tL, int clockIndex);

struct GuardHitRun {
    int transition = -1;
    std::size_t firstStep = 0;
    std::vector<std::size_t> steps;
};

/// Maximal runs of consecutive sets touching each transition's guard (with its
/// side conditions). Throws ReachError when a run exceeds maxHitSteps.
std::vector<GuardHitRun> detectGuardHits(const std::vector<Zonotope>& sets, const std::vector<Transition>& transitions,
                                         int maxHitSteps);

ReachResult runAutomaton(const HybridAutomaton& ha, const Zonotope& x0, int startLocation, const InputModel& im,
                         const EngineOptions& options);

}  // namespace hyreach
