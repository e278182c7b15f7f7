#include "hyreach/reach_linear.hpp"

#include <cmath>
#include <optional>

namespace hyreach {

namespace {

double infNorm(const Mat& m) { return m.rows() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff(); }

// Bound on sum_{i > order} nu^i / i! (geometric tail after the first term).
double taylorTail(double nu, int order) {
    double term = 1.0;
    for (int i = 1; i <= order + 1; ++i) term *= nu / i;
    const double ratio = nu / (order + 2);
    if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
    return term / (1.0 - ratio);
}

// Minimum of theta^k - theta over [0,1].
double sagittaLow(int k) {
    const double kk = k;
    return std::pow(kk, -kk / (kk - 1.0)) - std::pow(kk, -1.0 / (kk - 1.0));
}

Zonotope boxZonotope(const Vec& center, const Vec& radius) {
    Eigen::Index n = center.size();
    Mat g = Mat::Zero(n, n);
    Eigen::Index cols = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (radius(i) > 0.0) g(i, cols++) = radius(i);
    }
    return {center, g.leftCols(cols)};
}

}  // namespace

AffineFlow::AffineFlow(Mat a, Mat bm, Vec offset) : A(std::move(a)), B(std::move(bm)), b(std::move(offset)) {
    requireSameDim(A.rows(), A.cols(), "AffineFlow: A square");
    requireSameDim(B.rows(), A.rows(), "AffineFlow: B rows");
    requireSameDim(b.size(), A.rows(), "AffineFlow: b length");
}

MatrixExponential matrixExponential(const Mat& a, double t, int minOrder) {
    requireSameDim(a.rows(), a.cols(), "matrixExponential");
    if (t < 0.0) throw std::invalid_argument("matrixExponential: negative time");
    const Eigen::Index n = a.rows();
    MatrixExponential out;
    Mat m = a * t;
    double nu = infNorm(m);
    int s = 0;
    while (nu > 0.5) {
        nu *= 0.5;
        ++s;
    }
    m /= std::ldexp(1.0, s);

    int order = std::max(minOrder, 1);
    while (taylorTail(nu, order) > 1e-20 && order < 40) ++order;
    double rem = taylorTail(nu, order);

    // Horner evaluation of sum_{i<=order} m^i / i!
    Mat value = Mat::Identity(n, n);
    for (int i = order; i >= 1; --i) value = Mat::Identity(n, n) + (m * value) / double(i);

    for (int k = 0; k < s; ++k) {
        double norm = infNorm(value);
        rem = 2.0 * norm * rem + rem * rem;
        value = value * value;
    }
    if (rem > 1e-6) throw ReachError("reach-linear", "matrix exponential remainder too large; reduce the step size");
    out.value = std::move(value);
    out.remainderRadius = rem;
    out.order = order;
    out.squarings = s;
    return out;
}

Vec balanceScaling(const Mat& a) {
    const Eigen::Index n = a.rows();
    Mat m = a;
    Vec d = Vec::Ones(n);
    bool changed = true;
    for (int sweep = 0; changed && sweep < 100; ++sweep) {
        changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = m.col(i).cwiseAbs().sum() - std::abs(m(i, i));
            double r = m.row(i).cwiseAbs().sum() - std::abs(m(i, i));
            if (c == 0.0 || r == 0.0) continue;
            const double total = c + r;
            double f = 1.0;
            while (c < r / 2.0) {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while (c >= r * 2.0) {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if (c + r < 0.95 * total) {
                d(i) *= f;
                m.col(i) *= f;
                m.row(i) /= f;
                changed = true;
            }
        }
    }
    return d;
}

LinearStepper::LinearStepper(AffineFlow flow, double dt) : flow_(std::move(flow)), dt_(dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("LinearStepper: step size must be positive");
    const Eigen::Index n = flow_.stateDim();

    auto expm = matrixExponential(flow_.A, dt_);
    phi_ = expm.value;
    Mat aug = Mat::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = flow_.A;
    aug.topRightCorner(n, n) = Mat::Identity(n, n);
    auto expAug = matrixExponential(aug, dt_);
    gamma_ = expAug.value.topRightCorner(n, n);
    expRemainder_ = expm.remainderRadius;
    gammaRemainder_ = expAug.remainderRadius;

    scale_ = balanceScaling(flow_.A);
    Mat ab = scale_.cwiseInverse().asDiagonal() * flow_.A * scale_.asDiagonal();
    Mat adt = ab * dt_;
    const double nu = infNorm(adt);
    order_ = 10;
    while (taylorTail(nu, order_) > 1e-13 && order_ < 60) ++order_;
    tail_ = taylorTail(nu, order_);
    if (tail_ > 1e-9) throw ReachError("reach-linear", "Taylor tail does not converge; reduce the step size");

    curvCenter_ = Mat::Zero(n, n);
    curvRadius_ = Mat::Constant(n, n, tail_);
    inCurvCenter_ = Mat::Zero(n, n);
    inCurvRadius_ = Mat::Constant(n, n, dt_ * tail_);
    variationTerms_.clear();

    Mat term = Mat::Identity(n, n);
    for (int i = 1; i <= order_; ++i) {
        term = term * adt / double(i);  // (A dt)^i / i!
        if (i >= 2) {
            double lo = sagittaLow(i);
            curvCenter_ += 0.5 * lo * term;
            curvRadius_ += 0.5 * std::abs(lo) * term.cwiseAbs();
        }
        double loIn = sagittaLow(i + 1) / double(i + 1);
        inCurvCenter_ += 0.5 * dt_ * loIn * term;
        inCurvRadius_ += 0.5 * dt_ * std::abs(loIn) * term.cwiseAbs();

        const double ai = std::pow(1.0 / (i + 1.0), 1.0 / i);
        variationTerms_.push_back((2.0 * ai * i / ((i + 1.0) * (i + 1.0))) * term);
    }
}

Vec LinearStepper::inputVariationRadius(const Vec& v) const {
    Vec vb = v.cwiseQuotient(scale_);
    Vec rho = Vec::Constant(v.size(), tail_ * vb.cwiseAbs().maxCoeff());
    for (const auto& w : variationTerms_) rho += (w * vb).cwiseAbs();
    return dt_ * scale_.cwiseProduct(rho);
}

StepResult LinearStepper::step(const Zonotope& r, const Zonotope& u) const {
    const Eigen::Index n = flow_.stateDim();
    requireSameDim(r.dim(), n, "LinearStepper::step state");
    requireSameDim(u.dim(), flow_.inputDim(), "LinearStepper::step input");

    const Vec w = flow_.B * u.center() + flow_.b;
    const Mat gin = flow_.B * u.generators();

    Vec rho = Vec::Zero(n);
    for (Eigen::Index j = 0; j < gin.cols(); ++j) rho += inputVariationRadius(gin.col(j));
    // truncation of the exponential and its integral
    const IntervalVector hullR = intervalHull(r);
    const double stateMag = (hullR.center().cwiseAbs() + hullR.radius()).maxCoeff();
    const double inputMag = w.cwiseAbs().maxCoeff() + (gin.cols() ? gin.cwiseAbs().rowwise().sum().maxCoeff() : 0.0);
    rho.array() += expRemainder_ * stateMag * n + gammaRemainder_ * inputMag * n;

    Mat gNext(n, r.numGenerators() + gin.cols());
    gNext << phi_ * r.generators(), gamma_ * gin;
    Zonotope next(phi_ * r.center() + gamma_ * w, gNext);
    next = minkowskiSum(next, boxZonotope(Vec::Zero(n), rho));

    // sagitta of the homogeneous solution, in balanced coordinates
    const Vec cb = hullR.center().cwiseQuotient(scale_);
    const Vec rb = hullR.radius().cwiseQuotient(scale_);
    Vec curvC = curvCenter_ * cb;
    Vec curvR = curvCenter_.cwiseAbs() * rb + curvRadius_ * (cb.cwiseAbs() + rb);

    // sagitta of the particular solution over the whole input set
    const Vec wb = w.cwiseQuotient(scale_);
    const Vec wr = (gin.cols() ? Vec(gin.cwiseAbs().rowwise().sum()) : Vec::Zero(n)).cwiseQuotient(scale_);
    curvC += inCurvCenter_ * wb;
    curvR += inCurvCenter_.cwiseAbs() * wr + inCurvRadius_ * (wb.cwiseAbs() + wr);

    Zonotope curvature = boxZonotope(scale_.cwiseProduct(curvC), scale_.cwiseProduct(curvR));
    Zonotope interval = minkowskiSum(encloseHull(r, next), curvature);
    return {std::move(next), std::move(interval), dt_};
}

StepResult propagateStep(const AffineFlow& flow, const Zonotope& r, const Zonotope& u, double dt) {
    return LinearStepper(flow, dt).step(r, u);
}

bool intersectsAll(const Zonotope& z, const std::vector<HalfSpace>& constraints) {
    for (const auto& h : constraints) {
        if (z.project(h.normal).lo > h.bound + kSetTol) return false;
    }
    if (constraints.size() <= 1) return true;
    std::optional<ConstrainedZonotope> cz = ConstrainedZonotope(z);
    for (const auto& h : constraints) {
        cz = intersectHalfSpace(*cz, h);
        if (!cz) return false;
    }
    return !cz->isEmpty();
}

AffineReachSequence reachAffineUntil(const AffineFlow& flow, const Zonotope& r0, const InputProvider& inputs,
                                     const std::vector<HalfSpace>& invariant, double dt, double tEnd,
                                     const LinearReachOptions& options) {
    AffineReachSequence out;
    if (!intersectsAll(r0, invariant)) {
        out.leftInvariant = true;
        return out;
    }
    LinearStepper stepper(flow, dt);
    std::optional<LinearStepper> lastStepper;
    Zonotope r = r0;
    double elapsed = 0.0;
    while (elapsed < tEnd - 1e-12 * std::max(1.0, tEnd)) {
        const double h = std::min(dt, tEnd - elapsed);
        const LinearStepper* active = &stepper;
        if (h < dt * (1.0 - 1e-12)) {
            lastStepper.emplace(flow, h);
            active = &*lastStepper;
        }
        StepResult s = active->step(r, inputs(r, h));
        s.timePointSet = reduceOrder(s.timePointSet, options.maxOrder);
        s.timeIntervalSet = reduceOrder(s.timeIntervalSet, options.maxOrder);
        r = s.timePointSet;
        out.steps.push_back(std::move(s));
        elapsed += h;
        if (!intersectsAll(r, invariant)) {
            out.leftInvariant = true;
            break;
        }
    }
    return out;
}

}  // namespace hyreach
