#pragma once

#include "hyreach/contact_model.hpp"
#include "hyreach/sim_oracle.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace hyreach {

/// One verification case. Scenario files are flat "key = value" text; see
/// scenarioKeys() for the accepted keys. Lines starting with '#' are comments.
struct Scenario {
    ContactParams params = ContactParams::forMass(4.5);
    TrajectorySpec trajectory;
    IntersectionMethod method = IntersectionMethod::Trinal;
    IntersectionTuning tuning;
    double stepSize = 6.5e-4;
    double maxOrder = 20.0;
    double syncThreshold = -1.0;  // < 0: two steps
    SyncMode syncMode = SyncMode::Both;
    int maxJumps = 12;
    int maxRefinements = 2;
    ForceLimits limits;
    std::string outputDir = "out";
    std::uint64_t seed = 1;

    EngineOptions engineOptions() const;
    void validate() const;
};

/// Key, meaning pairs in file order.
const std::vector<std::pair<std::string, std::string>>& scenarioKeys();

/// Parses scenario text. "m" selects the tabulated damping for that mass
/// unless "dt" is given too. Throws std::invalid_argument with a line number.
Scenario parseScenario(std::istream& in);
Scenario loadScenario(const std::string& path);
std::string formatScenario(const Scenario& s);

std::string toString(SyncMode mode);
SyncMode parseSyncMode(const std::string& name);

struct ScenarioResult {
    Scenario scenario;
    ReachResult reach;
    SafetyReport safety;
    double wallSeconds = 0.0;  // reachability and verdict, no I/O
};

/// Reachability plus the force check. ReachError and std::invalid_argument
/// propagate with their stage tags.
ScenarioResult runScenario(const Scenario& s);

/// Simulation containment check of a finished run, sampling the box of the
/// scenario's initial set. serial selects the reference loop.
ContainmentReport checkContainment(const ScenarioResult& r, ContainmentOptions options, bool serial = false);

struct GridCell {
    double mass = 0.0;
    double speed = 0.0;
    IntersectionMethod method = IntersectionMethod::Trinal;
    bool failed = false;
    std::string error;
    Verdict verdict = Verdict::NotVerified;
    double peakForce = 0.0;
    int segments = 0;
    double stepSize = 0.0;
    int refinements = 0;
    double wallSeconds = 0.0;
    // first recorded intersection of each order along the unsynced chain (nullopt: not reached)
    std::optional<double> measure2, measure3;
    std::optional<double> seconds2, seconds3;
};

/// Called with each completed cell run, possibly from several threads at once.
/// An exception marks the cell failed.
using CellSink = std::function<void(const ScenarioResult&)>;

/// Scenario per (mass, speed) pair from base; cells run in parallel and the
/// table comes back in (mass, speed) order.
std::vector<GridCell> runGrid(const Scenario& base, const std::vector<double>& masses,
                              const std::vector<double>& speeds, IntersectionMethod method,
                              const CellSink& sink = {});
std::vector<GridCell> runGridSerial(const Scenario& base, const std::vector<double>& masses,
                                    const std::vector<double>& speeds, IntersectionMethod method,
                                    const CellSink& sink = {});
GridCell summarizeCell(double mass, double speed, IntersectionMethod method, const ScenarioResult& r);

/// Grid table as CSV; measures scaled by 1e3.
void writeGridCsv(std::ostream& out, const std::vector<GridCell>& cells);

inline const std::vector<double> kGridMasses{1.5, 4.5, 8.0};
inline const std::vector<double> kGridSpeeds{0.1, 0.2, 0.35, 0.45, 0.55};

/// Scenario with the standard contact parameters for the given mass and impact speed.
Scenario gridScenario(const Scenario& base, double mass, double speed, IntersectionMethod method);

// ---- export

/// Columns of the envelope CSV, one row per stored time-interval set:
/// t_lo,t_hi,location,branch,synced, then <state>_lo,<state>_hi for
/// z,zdot,zhat,zhatdot,clock, then force_lo,force_hi. branch is the segment
/// id; force is 0 outside the contact locations.
const std::string& envelopeHeader();
void writeEnvelopeCsv(std::ostream& out, const ScenarioResult& r);

/// Scenario echo, verdict, intersection records, seed and version as JSON.
void writeMetadataJson(std::ostream& out, const ScenarioResult& r);

/// Line-oriented set dump:
///   hyreach-dump 1
///   dim <n>
///   set <segment> <index> <location> <synced> <clock_lo> <clock_hi> <generators>
///   c <n values>
///   g <n values>      (one line per generator)
/// Numbers use 17 significant digits.
void writeDump(std::ostream& out, const ReachResult& r);

struct DumpedSet {
    int segment = -1;
    int index = -1;
    int location = -1;
    bool synced = false;
    Interval clock;
    Zonotope set;
};
std::vector<DumpedSet> readDump(std::istream& in);

/// Writes envelope.csv, run.json and, when requested, sets.dump into dir.
void exportRun(const ScenarioResult& r, const std::string& dir, bool dump);

/// Decimal form with 17 significant digits; parses back to the same double.
std::string formatNumber(double x);

inline constexpr const char* kVersion = "1.0.0";

}  // namespace hyreach
