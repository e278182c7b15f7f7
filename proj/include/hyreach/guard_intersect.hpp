#pragma once

#include "hyreach/automaton.hpp"
#include "hyreach/reach_quadratic.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hyreach {

enum class IntersectionMethod { Geometric, Mapping, Scaling, Tsm, Trinal };

std::string toString(IntersectionMethod m);
IntersectionMethod parseMethod(const std::string& name);

struct IntersectionTuning {
    double ks = 1.0;
    double rDeltaTarget = 0.0;   // <= 0 means one coarse step
    double rVolLimit = 2.0;
    int refineFactor = 8;
    double scaledStepFraction = 0.25;
    int maxScaledSteps = 2000;
    int maxFineSteps = 20000;
    double maxOrder = 20.0;
};

/// Everything a guard intersection needs. The input model must outlive the job.
struct IntersectionJob {
    AffineFlow flow;
    Transition transition;
    std::vector<HalfSpace> invariant;  // source location
    std::vector<Zonotope> hitSets;     // time-interval sets touching the guard
    Zonotope preHitSet;                // time-point set before the first hit
    const InputModel* inputs = nullptr;
    int clockIndex = -1;
    double stepSize = 0.0;
    IntersectionTuning tuning;

    /// Invariant plus the transition's side conditions.
    std::vector<HalfSpace> pruneSet() const;
};

/// Crossing-time estimate delta / |c' f(center, u_c)| with delta the extent of
/// X along the (unit) guard normal.
double measureDelta(const Zonotope& x, const Hyperplane& guard, const AffineFlow& flow, const Vec& uCenter);

/// Expansion of X relative to R_h, measured on the projection orthogonal to
/// the flow at X's center. Axes where either projection is flat (< 1e-12) are
/// dropped from both products and the root is taken over the remaining count.
double measureVolRatio(const Zonotope& x, const Zonotope& rh, const AffineFlow& flow, const Vec& uCenter);

/// Geometric mean of the box widths over every axis except the one the guard
/// normal is most aligned with (sliced sets are flat along it).
double intersectionMeasure(const IntervalVector& box, const Hyperplane& guard);

/// Union of the boxed slices P_i cap G, each restricted to the prune set.
std::optional<IntervalVector> intersectGeometric(const std::vector<Zonotope>& hitSets, const Hyperplane& guard,
                                                 const std::vector<HalfSpace>& prune = {});

/// Constant-flow abstraction x0 + t (A x0 + B u + b) + E for t in [0, Ts],
/// sliced by the guard. Throws ReachError when some state of R_start does not
/// move strictly toward the guard.
std::optional<IntervalVector> intersectMapping(const Zonotope& rStart, const AffineFlow& flow, const Hyperplane& guard,
                                               const Zonotope& u, double ts);

struct FlatResult {
    Zonotope set;
    int steps = 0;
    bool stoppedByDelta = true;
};

/// Scaled-dynamics propagation from R_h until r^delta <= target or
/// r^v >= limit.
FlatResult reachUntilFlat(const QuadraticFlow& qf, const Zonotope& rh, const Hyperplane& guard,
                          const IntersectionTuning& tuning, const InputModel& inputs, int clockIndex,
                          double coarseStep);

struct Crossing {
    std::vector<Zonotope> fineSets;  // fine time-interval sets touching the guard
    Zonotope start;                  // time-point set at the first touching fine step
    double ts = 0.0;                 // first touching step until the set leaves the invariant
    Interval clockWindow;
};

/// Original dynamics from the flattened set with step fineDt until the
/// time-point set leaves the invariant (or stops touching the guard).
Crossing refineCrossing(const AffineFlow& flow, const Transition& tr, const Zonotope& rsh,
                        const std::vector<HalfSpace>& invariant, double fineDt, const InputModel& inputs,
                        int clockIndex, int maxSteps, double maxOrder);

struct IntersectionOutcome {
    std::optional<IntervalVector> set;  // nullopt: transition unreachable
    IntersectionMethod method = IntersectionMethod::Geometric;
    std::optional<IntervalVector> geometric;
    std::optional<IntervalVector> tsm;
    bool tsmFailed = false;
    std::string note;
    int scaledSteps = 0;
    double ts = 0.0;
};

std::optional<IntervalVector> intersectTsm(const IntersectionJob& job, IntersectionOutcome* diag = nullptr);
std::optional<IntervalVector> intersectScaling(const IntersectionJob& job, IntersectionOutcome* diag = nullptr);
std::optional<IntervalVector> intersectMappingJob(const IntersectionJob& job);
IntersectionOutcome intersectTrinal(const IntersectionJob& job);

/// Runs the selected method; pruning with the invariant and side conditions
/// is part of every method.
IntersectionOutcome intersect(const IntersectionJob& job, IntersectionMethod method);

}  // namespace hyreach
