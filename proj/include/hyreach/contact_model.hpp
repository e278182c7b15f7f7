#pragma once

#include "hyreach/engine.hpp"

namespace hyreach {

/// State layout x = [z, z', z_hat, z_hat', t]; z_hat are the Pade-delayed
/// copies seen by the controller, t is the clock.
namespace state {
inline constexpr int z = 0;
inline constexpr int zDot = 1;
inline constexpr int zHat = 2;
inline constexpr int zHatDot = 3;
inline constexpr int clock = 4;
inline constexpr int dim = 5;
}  // namespace state

/// Location indices of the contact-task automaton.
namespace loc {
inline constexpr int freeMotion = 0;     // impedance control, no contact
inline constexpr int contact = 1;        // impedance control, contact
inline constexpr int reaction = 2;       // reaction strategy, contact
inline constexpr int reactionFree = 3;   // reaction strategy, no contact
}  // namespace loc

struct ContactParams {
    double m = 4.5;
    double kt = 1000.0;
    double dt = 135.0;
    double dr = 380.0;
    double ft = 100.0;
    double ke = 75000.0;
    double de = 0.0;
    double l = 0.0;
    double d1 = 0.0013;
    double d2 = 0.0019;

    /// Tabulated values for m in {1.5, 4.5, 8}; other masses use critical damping.
    static ContactParams forMass(double m);
    static double criticalDamping(double m, double kt) { return 2.0 * std::sqrt(m * kt); }
    void validate() const;
};

struct TrajectorySpec {
    double impactTime = 0.1;
    double impactSpeed = 0.55;
    double stopPosition = -0.06;
    double sampleRate = 1000.0;
    double horizon = 0.8;

    double startPosition() const { return 0.5 * impactSpeed * impactTime; }
    double decelerationTime() const { return 2.0 * -stopPosition / impactSpeed; }
    void validate() const;
};

struct ForceLimits {
    double transient = 280.0;
    double quasiStatic = 120.0;
    double window = 0.5;
};

HybridAutomaton buildAutomaton(const ContactParams& p);

/// Desired [z_d, z_d', z_d''] at time t of the two-segment profile.
Vec desiredState(const TrajectorySpec& spec, double t);
/// Samples at sampleRate covering [0, horizon].
std::vector<Vec> generateTrajectory(const TrajectorySpec& spec);
Zonotope buildInputUncertainty();
InputModel buildInputModel(const TrajectorySpec& spec, const ContactParams& p);
Zonotope buildInitialSet(const std::vector<Vec>& samples);

/// Contact force row and offset: f = row * x + offset on contact locations.
Mat forceRow(const ContactParams& p);
double forceOffset(const ContactParams& p);
bool isContactLocation(int location);
Interval forceFromState(const Zonotope& z, const ContactParams& p, int location);
double forceFromState(const Vec& x, const ContactParams& p, int location);

enum class Verdict { Safe, NotVerified };
std::string toString(Verdict v);

struct SafetyReport {
    Verdict verdict = Verdict::NotVerified;
    std::optional<double> contactStart;
    double peakForce = 0.0;               // certified bound: best alternative per group, max along the tree
    std::vector<bool> segmentViolates;    // own entries only
    std::vector<bool> subtreeSafe;
};

SafetyReport unsafeCheck(const ReachResult& result, const ContactParams& p, const ForceLimits& limits);

}  // namespace hyreach
