#pragma once

#include "hyreach/constrained_zonotope.hpp"
#include "hyreach/zonotope.hpp"

#include <functional>
#include <vector>

namespace hyreach {

/// x' = A x + B u + b
struct AffineFlow {
    Mat A;
    Mat B;
    Vec b;

    AffineFlow() = default;
    AffineFlow(Mat a, Mat bm, Vec offset);

    Eigen::Index stateDim() const { return A.rows(); }
    Eigen::Index inputDim() const { return B.cols(); }
    Vec eval(const Vec& x, const Vec& u) const { return A * x + B * u + b; }
};

struct StepResult {
    Zonotope timePointSet;
    Zonotope timeIntervalSet;
    double stepSize = 0.0;
};

struct MatrixExponential {
    Mat value;
    // ||e^{At} - value||_inf <= remainderRadius (truncation only)
    double remainderRadius = 0.0;
    int order = 0;
    int squarings = 0;
};

/// Taylor series with scaling and squaring; the order grows from minOrder
/// until the truncation tail of the scaled argument is below 1e-20.
MatrixExponential matrixExponential(const Mat& a, double t, int minOrder = 10);

/// Diagonal similarity d (powers of two) such that diag(d)^-1 A diag(d) has
/// balanced row and column norms. Zero rows/columns keep scale 1.
Vec balanceScaling(const Mat& a);

/// Precomputed one-step operator for a fixed flow and step size.
///
/// Time-point set:   e^{A dt} R  +  Gamma (B u_c + b)  +  Gamma B G_U  +  box(input variation)
/// Time-interval set: enclose(R, R') + box(F R) + box(F_u (B u_c + b))
/// with Gamma = int_0^dt e^{As} ds. F and F_u bound the deviation of e^{At}
/// from its linear interpolation on [0, dt]; their Taylor terms are summed in
/// balanced coordinates so the tail bound stays small for stiff contact flows.
class LinearStepper {
public:
    LinearStepper(AffineFlow flow, double dt);

    const AffineFlow& flow() const { return flow_; }
    double stepSize() const { return dt_; }
    const Mat& transition() const { return phi_; }
    const Mat& inputIntegral() const { return gamma_; }
    int taylorOrder() const { return order_; }

    /// One step from R with the input confined to U for the whole step.
    StepResult step(const Zonotope& r, const Zonotope& u) const;

    /// Componentwise radius enclosing { int_0^dt e^{As} v beta(s) ds - Gamma v beta_avg } over
    /// every measurable beta with values in [-1,1].
    Vec inputVariationRadius(const Vec& v) const;

private:
    AffineFlow flow_;
    double dt_;
    Mat phi_;
    Mat gamma_;
    double expRemainder_ = 0.0;
    double gammaRemainder_ = 0.0;
    Vec scale_;              // balancing diagonal d
    int order_ = 10;
    double tail_ = 0.0;      // entrywise bound of the truncated Taylor tail (balanced)
    Mat curvCenter_, curvRadius_;     // F
    Mat inCurvCenter_, inCurvRadius_; // F_u
    std::vector<Mat> variationTerms_; // weighted powers for the input variation
};

StepResult propagateStep(const AffineFlow& flow, const Zonotope& r, const Zonotope& u, double dt);

/// True when z meets every half-space jointly (an empty list is the full space).
bool intersectsAll(const Zonotope& z, const std::vector<HalfSpace>& constraints);

struct LinearReachOptions {
    double maxOrder = 20.0;
};

struct AffineReachSequence {
    std::vector<StepResult> steps;
    bool leftInvariant = false;
};

using InputProvider = std::function<Zonotope(const Zonotope& current, double dt)>;

/// Propagates until the time-point set no longer intersects the invariant or
/// the elapsed time reaches tEnd (the last step is shortened to land on tEnd).
AffineReachSequence reachAffineUntil(const AffineFlow& flow, const Zonotope& r0, const InputProvider& inputs,
                                     const std::vector<HalfSpace>& invariant, double dt, double tEnd,
                                     const LinearReachOptions& options = {});

}  // namespace hyreach
