#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace hyreach {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised when operands disagree on dimension.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure inside a reachability stage (step size too large,
/// linearization domain exceeded, inconsistent intersection, ...). The tag
/// names the stage so callers can report where a run failed.
class ReachError : public std::runtime_error {
public:
    ReachError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

inline void requireSameDim(Eigen::Index a, Eigen::Index b, const char* op) {
    if (a != b) {
        throw DimensionError(std::string(op) + ": dimension mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}

// Tolerance for emptiness tests and hyperplane normalization.
inline constexpr double kSetTol = 1e-9;

}  // namespace hyreach
