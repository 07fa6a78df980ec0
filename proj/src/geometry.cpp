#include "jetvo/geometry.hpp"

#include <cmath>

#include <Eigen/LU>

namespace jetvo {

double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * M_PI);
    if (a > M_PI) a -= 2.0 * M_PI;
    if (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

MotionParams MotionParams::wrapped() const {
    return {wrap_angle(theta), wrap_angle(psi), wrap_angle(phi), wrap_angle(alpha), wrap_angle(beta)};
}

Mat3 CameraIntrinsics::matrix() const {
    Mat3 K;
    K << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return K;
}

Mat3 CameraIntrinsics::inverse() const {
    Mat3 Ki;
    Ki << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
    return Ki;
}

double FundamentalMatrix::bilinear(const Vec2& y, const Vec2& x) const {
    const Vec3 lx = m * Vec3(x.x(), x.y(), 1.0);
    return y.x() * lx[0] + y.y() * lx[1] + lx[2];
}

Mat3 rotation_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 R;
    R << 1, 0, 0, 0, c, -s, 0, s, c;
    return R;
}

Mat3 rotation_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 R;
    R << c, 0, s, 0, 1, 0, -s, 0, c;
    return R;
}

Mat3 rotation_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 R;
    R << c, -s, 0, s, c, 0, 0, 0, 1;
    return R;
}

Mat3 rotation_from_angles(const MotionParams& p) {
    return rotation_z(p.phi) * rotation_y(p.psi) * rotation_x(p.theta);
}

void angles_from_rotation(const Mat3& R, double& theta, double& psi, double& phi) {
    // R = Rz(phi) Ry(psi) Rx(theta); R(2,0) = -sin(psi)
    const double spsi = -R(2, 0);
    psi = std::asin(std::clamp(spsi, -1.0, 1.0));
    if (std::abs(std::cos(psi)) > 1e-9) {
        theta = std::atan2(R(2, 1), R(2, 2));
        phi = std::atan2(R(1, 0), R(0, 0));
    } else {
        // gimbal lock: only theta +/- phi observable, put it all in theta
        theta = std::atan2(-R(0, 1), R(1, 1));
        phi = 0.0;
    }
}

Vec3 translation_from_polar(double alpha, double beta) {
    const double cb = std::cos(beta);
    return {cb * std::sin(alpha), std::sin(beta), cb * std::cos(alpha)};
}

void polar_from_translation(const Vec3& t, double& alpha, double& beta) {
    const double n = t.norm();
    if (n < 1e-12) throw ZeroVector("polar_from_translation: zero direction");
    const Vec3 u = t / n;
    beta = std::asin(std::clamp(u.y(), -1.0, 1.0));
    alpha = (std::abs(u.x()) + std::abs(u.z()) < 1e-15) ? 0.0 : std::atan2(u.x(), u.z());
}

namespace {

Mat3 skew(const Vec3& v) {
    Mat3 S;
    S << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return S;
}

FundamentalMatrix normalize_f(Mat3 F) {
    F /= F.norm();
    // sign fixed so the largest-magnitude entry is positive
    int r = 0, c = 0;
    F.cwiseAbs().maxCoeff(&r, &c);
    if (F(r, c) < 0.0) F = -F;
    FundamentalMatrix out;
    out.m = F;
    return out;
}

}  // namespace

FundamentalMatrix fundamental_matrix(const MotionParams& p, const CameraIntrinsics& K) {
    const Mat3 R = rotation_from_angles(p);
    const Vec3 t = translation_from_polar(p.alpha, p.beta);
    const Mat3 Ki = K.inverse();
    return normalize_f(Ki.transpose() * skew(t) * R * Ki);
}

FundamentalMatrix fundamental_from_rt(const Mat3& R, const Vec3& t, const CameraIntrinsics& K) {
    if (t.norm() < 1e-12) throw DegenerateTranslation("fundamental_from_rt: ||t|| underflows");
    const Mat3 Ki = K.inverse();
    return normalize_f(Ki.transpose() * skew(t) * R * Ki);
}

EpipolarLine epipolar_line(const FundamentalMatrix& F, const Vec2& x) {
    EpipolarLine line;
    line.l = F.m * Vec3(x.x(), x.y(), 1.0);
    line.degenerate = line.l.head<2>().norm() < 1e-12;
    return line;
}

double point_line_distance(const Vec2& y, const Vec2& x, const FundamentalMatrix& F) {
    const EpipolarLine line = epipolar_line(F, x);
    if (line.degenerate) throw DegenerateLine("point_line_distance: epipolar line degenerate");
    const double num = y.x() * line.l[0] + y.y() * line.l[1] + line.l[2];
    return num / line.l.head<2>().norm();
}

Vec2 project_to_line(const Vec2& y, const EpipolarLine& line) {
    if (line.degenerate) throw DegenerateLine("project_to_line: line degenerate");
    const double l0 = line.l[0], l1 = line.l[1], l2 = line.l[2];
    const double s = l0 * l0 + l1 * l1;
    return {(y.x() * l1 * l1 - y.y() * l0 * l1 - l0 * l2) / s,
            (-y.x() * l0 * l1 + y.y() * l0 * l0 - l1 * l2) / s};
}

namespace {

void check_rotation(const Mat3& R, const char* who) {
    if ((R * R.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6 ||
        std::abs(R.determinant() - 1.0) > 1e-6) {
        throw NotARotation(std::string(who) + ": input is not a rotation matrix");
    }
}

}  // namespace

double rodrigues_angle(const Mat3& R_est, const Mat3& R_gt) {
    check_rotation(R_est, "rodrigues_angle");
    check_rotation(R_gt, "rodrigues_angle");
    const Mat3 R_rel = R_gt * R_est.transpose();
    const double c = std::clamp((R_rel.trace() - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c);
}

double intersection_angle(const Vec3& t_est, const Vec3& t_gt) {
    const double ne = t_est.norm(), ng = t_gt.norm();
    if (ne < 1e-12 || ng < 1e-12) throw ZeroVector("intersection_angle: zero direction");
    return std::acos(std::clamp(t_est.dot(t_gt) / (ne * ng), -1.0, 1.0));
}

}  // namespace jetvo
