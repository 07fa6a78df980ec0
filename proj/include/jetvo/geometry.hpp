#pragma once

#include <Eigen/Dense>

#include "jetvo/errors.hpp"

namespace jetvo {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using Mat25 = Eigen::Matrix<double, 2, 5>;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Minimal unscaled relative pose: three rotation angles plus the polar
/// coordinates of the unit translation direction.
///
/// Conventions (pinned project-wide):
///   R = Rz(phi) * Ry(psi) * Rx(theta)
///   t = (cos(beta) sin(alpha), sin(beta), cos(beta) cos(alpha))
/// so (alpha, beta) = (0, 0) is forward motion along the optical axis. The
/// pair (R, t) enters the fundamental matrix as F = K^-T [t]x R K^-1 with the
/// constraint (y;1)^T F (x;1) = 0, x in the first image, y in the second.
struct MotionParams {
    double theta = 0.0;  // pitch, about x
    double psi = 0.0;    // yaw, about y
    double phi = 0.0;    // roll, about z
    double alpha = 0.0;  // translation azimuth
    double beta = 0.0;   // translation elevation

    Vec5 vec() const {
        Vec5 v;
        v << theta, psi, phi, alpha, beta;
        return v;
    }
    static MotionParams from_vec(const Vec5& v) { return {v[0], v[1], v[2], v[3], v[4]}; }
    MotionParams wrapped() const;
};

struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;

    Mat3 matrix() const;
    Mat3 inverse() const;  // analytic, K is upper triangular
    Vec2 project(const Vec3& X) const { return {fx * X.x() / X.z() + cx, fy * X.y() / X.z() + cy}; }
    Vec3 ray(const Vec2& px) const { return {(px.x() - cx) / fx, (px.y() - cy) / fy, 1.0}; }
};

/// Rank-2 fundamental matrix, stored with Frobenius norm 1 and sign fixed so
/// the largest-magnitude entry is positive.
struct FundamentalMatrix {
    Mat3 m = Mat3::Zero();

    Mat23 top2() const { return m.topRows<2>(); }
    /// F' * (x;1): gradient of the epipolar constraint w.r.t. y.
    Vec2 constraint_normal(const Vec2& x) const {
        return {m(0, 0) * x.x() + m(0, 1) * x.y() + m(0, 2),
                m(1, 0) * x.x() + m(1, 1) * x.y() + m(1, 2)};
    }
    /// (y;1)^T F (x;1), the homogeneous bilinear form.
    double bilinear(const Vec2& y, const Vec2& x) const;
};

struct EpipolarLine {
    Vec3 l = Vec3::Zero();
    bool degenerate = false;  // ||(l0,l1)|| below 1e-12
};

Mat3 rotation_x(double a);
Mat3 rotation_y(double a);
Mat3 rotation_z(double a);

/// R = Rz(phi) * Ry(psi) * Rx(theta). Total function.
Mat3 rotation_from_angles(const MotionParams& p);

/// Inverse of rotation_from_angles: (theta, psi, phi) from an orthonormal R.
/// Gimbal-locked at |cos(psi)| ~ 0; there roll is absorbed into pitch.
void angles_from_rotation(const Mat3& R, double& theta, double& psi, double& phi);

/// Unit translation direction from its polar angles.
Vec3 translation_from_polar(double alpha, double beta);

/// Inverse of translation_from_polar on the hemisphere beta in (-pi/2, pi/2).
void polar_from_translation(const Vec3& t, double& alpha, double& beta);

/// F = K^-T [t]x R K^-1, Frobenius-normalized, sign-fixed.
FundamentalMatrix fundamental_matrix(const MotionParams& p, const CameraIntrinsics& K);

/// Same from an explicit (R, t); throws DegenerateTranslation when ||t||
/// underflows (guards callers that pass unnormalized translations).
FundamentalMatrix fundamental_from_rt(const Mat3& R, const Vec3& t, const CameraIntrinsics& K);

/// l = F (x;1). Degeneracy (x at the epipole) is flagged, never thrown.
EpipolarLine epipolar_line(const FundamentalMatrix& F, const Vec2& x);

/// Signed distance of y to the epipolar line of x. Throws DegenerateLine.
double point_line_distance(const Vec2& y, const Vec2& x, const FundamentalMatrix& F);

/// Closest point on l to y. Throws DegenerateLine.
Vec2 project_to_line(const Vec2& y, const EpipolarLine& l);

/// Rodrigues angle of R_gt * R_est^T, in [0, pi]. Throws NotARotation when
/// either input is off the rotation manifold by more than 1e-6.
double rodrigues_angle(const Mat3& R_est, const Mat3& R_gt);

/// Angle between two direction vectors, in [0, pi]. Throws ZeroVector.
double intersection_angle(const Vec3& t_est, const Vec3& t_gt);

}  // namespace jetvo
