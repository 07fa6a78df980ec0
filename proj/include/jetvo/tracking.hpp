#pragma once

#include <string>
#include <vector>

#include "jetvo/image.hpp"

namespace jetvo {

enum class FeatureStatus { Active, BorderInvalid, EpipoleDegenerate, IllConditioned };

const char* to_string(FeatureStatus s);
FeatureStatus feature_status_from_string(const std::string& s);

/// One feature pair: x in the first image, y in the second.
struct Correspondence {
    Vec2 x = Vec2::Zero();
    Vec2 y = Vec2::Zero();
    FeatureStatus status = FeatureStatus::Active;

    bool active() const { return status == FeatureStatus::Active; }
};

/// Result of one epipolar-constrained displacement solve.
struct ConstrainedStep {
    Vec2 v = Vec2::Zero();
    double lambda = 0.0;
    double kkt_residual = 0.0;  // ||A v + b + lambda h||, A the regularized matrix
};

enum class StepStatus { Ok, EpipoleDegenerate, IllConditioned };

// condition-number cap for the regularized 2x2 patch matrix
inline constexpr double kConditionLimit = 1e8;

/// Condition number of a symmetric PSD 2x2 (ratio of eigenvalues).
double condition_2x2(const Mat2& a);

/// Symmetric PSD square root of a symmetric positive definite 2x2.
Mat2 sqrt_spd_2x2(const Mat2& a);

/// Unconstrained Lucas-Kanade step v = -A^-1 b (A regularized internally).
/// Throws IllConditioned above the condition cap.
Vec2 lk_step(const Mat2& a, const Vec2& b);

/// Core bordered solve with caller-precomputed pieces. a_inv and a_inv_b must
/// come from the same regularized matrix a_reg; h = F'(x;1) and
/// g = (y;1)^T F (x;1) define the linearized epipolar constraint h.v = -g.
StepStatus solve_bordered(const Mat2& a_reg, const Mat2& a_inv, const Vec2& a_inv_b, const Vec2& b,
                          const Vec2& h, double g, ConstrainedStep& out);

/// Throwing wrapper: minimizes v^T A v + 2 v^T b subject to the epipolar
/// constraint of (x_k, y_k) under F.
ConstrainedStep lk_step_constrained(const Mat2& a, const Vec2& b, const Vec2& x_k, const Vec2& y_k,
                                    const FundamentalMatrix& F);

/// Non-throwing variant for batch loops.
StepStatus try_lk_step_constrained(const Mat2& a, const Vec2& b, const Vec2& x_k, const Vec2& y_k,
                                   const FundamentalMatrix& F, ConstrainedStep& out);

/// v_opt = f_k(p): fundamental_matrix followed by the constrained solve.
ConstrainedStep displacement_f(const MotionParams& p, const CameraIntrinsics& K, const PatchSystem& patch,
                               const Vec2& x_k, const Vec2& y_k);

/// d f_k / d p by central finite differences, one column per parameter.
Mat25 jacobian_f(const MotionParams& p, const CameraIntrinsics& K, const PatchSystem& patch,
                 const Vec2& x_k, const Vec2& y_k, double step = 1e-6);

}  // namespace jetvo
