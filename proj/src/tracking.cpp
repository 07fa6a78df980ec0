#include "jetvo/tracking.hpp"

#include <cmath>
#include <limits>

#include <Eigen/LU>

namespace jetvo {

const char* to_string(FeatureStatus s) {
    switch (s) {
        case FeatureStatus::Active: return "Active";
        case FeatureStatus::BorderInvalid: return "BorderInvalid";
        case FeatureStatus::EpipoleDegenerate: return "EpipoleDegenerate";
        case FeatureStatus::IllConditioned: return "IllConditioned";
    }
    return "?";
}

FeatureStatus feature_status_from_string(const std::string& s) {
    if (s == "Active") return FeatureStatus::Active;
    if (s == "BorderInvalid") return FeatureStatus::BorderInvalid;
    if (s == "EpipoleDegenerate") return FeatureStatus::EpipoleDegenerate;
    if (s == "IllConditioned") return FeatureStatus::IllConditioned;
    throw ParseError("unknown feature status '" + s + "'");
}

double condition_2x2(const Mat2& a) {
    const double tr = a.trace();
    const double det = a.determinant();
    const double mid = tr / 2.0;
    const double s = std::sqrt(std::max(mid * mid - det, 0.0));
    const double lmax = mid + s;
    const double lmin = mid - s;
    if (lmin <= 0.0) return std::numeric_limits<double>::infinity();
    return lmax / lmin;
}

Mat2 sqrt_spd_2x2(const Mat2& a) {
    // (A + sqrt(det) I) / sqrt(trace + 2 sqrt(det)) squares to A by Cayley-Hamilton
    const double s = std::sqrt(std::max(a.determinant(), 0.0));
    const double tau = a.trace() + 2.0 * s;
    if (tau <= 0.0) throw IllConditioned("sqrt_spd_2x2: matrix not positive definite");
    return (a + s * Mat2::Identity()) / std::sqrt(tau);
}

Vec2 lk_step(const Mat2& a, const Vec2& b) {
    const Mat2 ar = regularize_patch_matrix(a);
    if (condition_2x2(ar) > kConditionLimit) throw IllConditioned("lk_step: patch matrix too ill-conditioned");
    const double det = ar.determinant();
    Mat2 ainv;
    ainv << ar(1, 1), -ar(0, 1), -ar(1, 0), ar(0, 0);
    ainv /= det;
    return -(ainv * b);
}

StepStatus solve_bordered(const Mat2& a_reg, const Mat2& a_inv, const Vec2& a_inv_b, const Vec2& b,
                          const Vec2& h, double g, ConstrainedStep& out) {
    if (h.norm() < 1e-12) return StepStatus::EpipoleDegenerate;
    // eliminate v = -A^-1 (b + lambda h) in h.v = -g
    const double hAh = h.dot(a_inv * h);
    if (!(hAh > 0.0) || !std::isfinite(hAh)) return StepStatus::IllConditioned;
    const double lambda = (g - h.dot(a_inv_b)) / hAh;
    out.v = -a_inv_b - lambda * (a_inv * h);
    out.lambda = lambda;
    out.kkt_residual = (a_reg * out.v + b + lambda * h).norm();
    return StepStatus::Ok;
}

StepStatus try_lk_step_constrained(const Mat2& a, const Vec2& b, const Vec2& x_k, const Vec2& y_k,
                                   const FundamentalMatrix& F, ConstrainedStep& out) {
    const Mat2 ar = regularize_patch_matrix(a);
    if (condition_2x2(ar) > kConditionLimit) return StepStatus::IllConditioned;
    const double det = ar.determinant();
    Mat2 ainv;
    ainv << ar(1, 1), -ar(0, 1), -ar(1, 0), ar(0, 0);
    ainv /= det;
    const Vec2 h = F.constraint_normal(x_k);
    const double g = F.bilinear(y_k, x_k);
    return solve_bordered(ar, ainv, ainv * b, b, h, g, out);
}

ConstrainedStep lk_step_constrained(const Mat2& a, const Vec2& b, const Vec2& x_k, const Vec2& y_k,
                                    const FundamentalMatrix& F) {
    ConstrainedStep out;
    switch (try_lk_step_constrained(a, b, x_k, y_k, F, out)) {
        case StepStatus::Ok: return out;
        case StepStatus::EpipoleDegenerate:
            throw EpipoleDegenerate("lk_step_constrained: feature at the epipole");
        case StepStatus::IllConditioned:
            throw IllConditioned("lk_step_constrained: bordered system near-singular");
    }
    return out;
}

ConstrainedStep displacement_f(const MotionParams& p, const CameraIntrinsics& K, const PatchSystem& patch,
                               const Vec2& x_k, const Vec2& y_k) {
    const FundamentalMatrix F = fundamental_matrix(p, K);
    return lk_step_constrained(patch.a, patch.b, x_k, y_k, F);
}

Mat25 jacobian_f(const MotionParams& p, const CameraIntrinsics& K, const PatchSystem& patch,
                 const Vec2& x_k, const Vec2& y_k, double step) {
    Mat25 J;
    const Vec5 p0 = p.vec();
    for (int i = 0; i < 5; ++i) {
        Vec5 lo = p0, hi = p0;
        lo[i] -= step;
        hi[i] += step;
        const Vec2 f_lo = displacement_f(MotionParams::from_vec(lo), K, patch, x_k, y_k).v;
        const Vec2 f_hi = displacement_f(MotionParams::from_vec(hi), K, patch, x_k, y_k).v;
        J.col(i) = (f_hi - f_lo) / (2.0 * step);
    }
    return J;
}

}  // namespace jetvo
