#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "jetvo/geometry.hpp"
#include "jetvo/random.hpp"

using namespace jetvo;

namespace {

MotionParams random_pose(Rng& rng, double rot = 0.5, double trans = 1.0) {
    return {rng.uniform(-rot, rot), rng.uniform(-rot, rot), rng.uniform(-rot, rot),
            rng.uniform(-trans, trans), rng.uniform(-trans, trans)};
}

const CameraIntrinsics kKitti{718.856, 718.856, 607.19, 185.22};

// textbook re-computation of K^-T [t]x R K^-1 with explicit loops, no Eigen
// products; the independent oracle for fundamental_matrix
Mat3 fundamental_by_hand(const MotionParams& p, const CameraIntrinsics& K) {
    const double ct = std::cos(p.theta), st = std::sin(p.theta);
    const double cp = std::cos(p.psi), sp = std::sin(p.psi);
    const double cf = std::cos(p.phi), sf = std::sin(p.phi);
    // Rz * Ry * Rx expanded element-wise
    double R[3][3] = {{cf * cp, -sf * ct + cf * sp * st, sf * st + cf * sp * ct},
                      {sf * cp, cf * ct + sf * sp * st, -cf * st + sf * sp * ct},
                      {-sp, cp * st, cp * ct}};
    const double tx = std::cos(p.beta) * std::sin(p.alpha);
    const double ty = std::sin(p.beta);
    const double tz = std::cos(p.beta) * std::cos(p.alpha);
    double Tx[3][3] = {{0, -tz, ty}, {tz, 0, -tx}, {-ty, tx, 0}};
    double Ki[3][3] = {{1.0 / K.fx, 0, -K.cx / K.fx}, {0, 1.0 / K.fy, -K.cy / K.fy}, {0, 0, 1}};

    auto matmul = [](const double A[3][3], const double B[3][3], double C[3][3]) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                C[i][j] = 0;
                for (int k = 0; k < 3; ++k) C[i][j] += A[i][k] * B[k][j];
            }
    };
    double KiT[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) KiT[i][j] = Ki[j][i];
    double M1[3][3], M2[3][3], M3[3][3];
    matmul(Tx, R, M1);
    matmul(KiT, M1, M2);
    matmul(M2, Ki, M3);
    Mat3 F;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) F(i, j) = M3[i][j];
    return F;
}

}  // namespace

TEST_CASE("rotation_from_angles basics") {
    CHECK((rotation_from_angles({0, 0, 0, 0, 0}) - Mat3::Identity()).norm() == doctest::Approx(0.0));

    // quarter turn about x maps (0,1,0) to (0,0,1)
    const Mat3 R = rotation_from_angles({M_PI / 2, 0, 0, 0, 0});
    CHECK((R * Vec3(0, 1, 0) - Vec3(0, 0, 1)).norm() < 1e-12);

    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const Mat3 Rr = rotation_from_angles(random_pose(rng, M_PI));
        CHECK((Rr * Rr.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(Rr.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("angles_from_rotation round trip") {
    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        const MotionParams p = random_pose(rng, 1.2);
        const Mat3 R = rotation_from_angles(p);
        double th, ps, ph;
        angles_from_rotation(R, th, ps, ph);
        CHECK(th == doctest::Approx(p.theta).epsilon(1e-10));
        CHECK(ps == doctest::Approx(p.psi).epsilon(1e-10));
        CHECK(ph == doctest::Approx(p.phi).epsilon(1e-10));
    }
}

TEST_CASE("translation_from_polar conventions and round trip") {
    CHECK((translation_from_polar(0, 0) - Vec3(0, 0, 1)).norm() < 1e-15);
    CHECK((translation_from_polar(M_PI / 2, 0) - Vec3(1, 0, 0)).norm() < 1e-15);

    Rng rng(13);
    for (int i = 0; i < 500; ++i) {
        const double alpha = rng.uniform(-M_PI + 1e-3, M_PI - 1e-3);
        const double beta = rng.uniform(-M_PI / 2 + 1e-3, M_PI / 2 - 1e-3);
        const Vec3 t = translation_from_polar(alpha, beta);
        CHECK(t.norm() == doctest::Approx(1.0).epsilon(1e-14));
        double a2, b2;
        polar_from_translation(t, a2, b2);
        CHECK(a2 == doctest::Approx(alpha).epsilon(1e-12));
        CHECK(b2 == doctest::Approx(beta).epsilon(1e-12));
    }
}

TEST_CASE("fundamental matrix of pure forward motion is the skew of t") {
    const CameraIntrinsics K{1, 1, 0, 0};
    const FundamentalMatrix F = fundamental_matrix({0, 0, 0, 0, 0}, K);
    Mat3 expected;
    expected << 0, -1, 0, 1, 0, 0, 0, 0, 0;
    expected /= expected.norm();
    CHECK((F.m - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("fundamental matrix is rank 2 and Frobenius-normalized") {
    Rng rng(14);
    for (int i = 0; i < 100; ++i) {
        const FundamentalMatrix F = fundamental_matrix(random_pose(rng), kKitti);
        CHECK(F.m.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(F.m.determinant()) < 1e-9);
    }
}

TEST_CASE("fundamental matrix matches element-wise textbook recomputation") {
    const MotionParams p{0.0, 0.01, 0.0, 0.02, 0.005};  // small yaw, near-forward translation
    const FundamentalMatrix F = fundamental_matrix(p, kKitti);
    Mat3 ref = fundamental_by_hand(p, kKitti);
    ref /= ref.norm();
    int r, c;
    ref.cwiseAbs().maxCoeff(&r, &c);
    if (ref(r, c) < 0) ref = -ref;
    CHECK((F.m - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fundamental matrix invariant under translation scaling") {
    Rng rng(15);
    for (int i = 0; i < 50; ++i) {
        const MotionParams p = random_pose(rng);
        const Mat3 R = rotation_from_angles(p);
        const Vec3 t = translation_from_polar(p.alpha, p.beta);
        const FundamentalMatrix F1 = fundamental_from_rt(R, t, kKitti);
        const FundamentalMatrix F2 = fundamental_from_rt(R, 2.0 * t, kKitti);
        CHECK((F1.m - F2.m).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(fundamental_from_rt(Mat3::Identity(), Vec3::Zero(), kKitti), DegenerateTranslation);
}

TEST_CASE("ground-truth epipolar conformity from exact projections") {
    // correspondences generated by projecting 3D points through (R, t) satisfy
    // (y;1)^T F (x;1) = 0 by construction
    Rng rng(16);
    for (int i = 0; i < 50; ++i) {
        const MotionParams p = random_pose(rng, 0.1, 0.3);
        const Mat3 R_rel = rotation_from_angles(p);
        const Vec3 t_dir = translation_from_polar(p.alpha, p.beta);
        const double baseline = rng.uniform(0.2, 2.0);
        // camera 2 pose in camera-1 coordinates (see scene renderer conventions)
        const Mat3 R2 = R_rel.transpose();
        const Vec3 c2 = baseline * (R_rel.transpose() * t_dir);

        const FundamentalMatrix F = fundamental_matrix(p, kKitti);
        for (int k = 0; k < 20; ++k) {
            const Vec3 X(rng.uniform(-10, 10), rng.uniform(-3, 3), rng.uniform(8, 40));
            const Vec2 x = kKitti.project(X);
            const Vec3 X2 = R2.transpose() * (X - c2);
            if (X2.z() < 1.0) continue;
            const Vec2 y = kKitti.project(X2);
            CHECK(std::abs(F.bilinear(y, x)) < 1e-6);
            if (!epipolar_line(F, x).degenerate) CHECK(std::abs(point_line_distance(y, x, F)) < 1e-6);
        }
    }
}

TEST_CASE("epipolar lines: radial flow and the epipole") {
    const CameraIntrinsics K{1, 1, 0, 0};
    const FundamentalMatrix F = fundamental_matrix({0, 0, 0, 0, 0}, K);

    const EpipolarLine l = epipolar_line(F, {1, 0});
    CHECK_FALSE(l.degenerate);
    // line y = 0 up to scale: l ~ (0, c, 0)
    CHECK(std::abs(l.l[0]) < 1e-14);
    CHECK(std::abs(l.l[2]) < 1e-14);
    CHECK(std::abs(l.l[1]) > 1e-3);

    CHECK(epipolar_line(F, {0, 0}).degenerate);  // the epipole
}

TEST_CASE("second epipole lies on every epipolar line") {
    Rng rng(17);
    for (int i = 0; i < 50; ++i) {
        const FundamentalMatrix F = fundamental_matrix(random_pose(rng), kKitti);
        // e' is the left null vector: F^T e' = 0
        Eigen::JacobiSVD<Mat3> svd(F.m, Eigen::ComputeFullU);
        const Vec3 e = svd.matrixU().col(2);
        for (int k = 0; k < 10; ++k) {
            const Vec2 x(rng.uniform(0, 1200), rng.uniform(0, 370));
            const EpipolarLine l = epipolar_line(F, x);
            if (l.degenerate) continue;
            CHECK(std::abs(l.l.dot(e)) < 1e-9);
        }
    }
}

TEST_CASE("point_line_distance basics and grid oracle") {
    const CameraIntrinsics K{1, 1, 0, 0};
    const FundamentalMatrix F = fundamental_matrix({0, 0, 0, 0, 0}, K);
    // line through (1,0) is y = 0; point (3,4) is 4 away
    CHECK(std::abs(std::abs(point_line_distance({3, 4}, {1, 0}, F)) - 4.0) < 1e-12);

    Rng rng(18);
    for (int i = 0; i < 20; ++i) {
        const FundamentalMatrix Fr = fundamental_matrix(random_pose(rng), kKitti);
        const Vec2 x(rng.uniform(100, 1100), rng.uniform(50, 330));
        const Vec2 y(rng.uniform(100, 1100), rng.uniform(50, 330));
        const EpipolarLine l = epipolar_line(Fr, x);
        if (l.degenerate) continue;
        const double d = std::abs(point_line_distance(y, x, Fr));

        // grid-search oracle: walk along the line, find the closest sample
        const Vec2 dir = Vec2(-l.l[1], l.l[0]).normalized();
        const Vec2 foot = project_to_line(y, l);
        double best = 1e30;
        for (int s = -2000; s <= 2000; ++s) {
            const Vec2 z = foot + dir * (s * 0.001);
            best = std::min(best, (y - z).norm());
        }
        CHECK(d == doctest::Approx(best).epsilon(1e-3));

        // distance of a point on the line is zero
        CHECK(std::abs(point_line_distance(foot, x, Fr)) < 1e-9);
    }
}

TEST_CASE("project_to_line closed form") {
    EpipolarLine l;
    l.l = Vec3(0, 1, 0);  // y = 0
    CHECK((project_to_line({3, 4}, l) - Vec2(3, 0)).norm() < 1e-15);
    CHECK((project_to_line({3, 0}, l) - Vec2(3, 0)).norm() < 1e-15);  // already on line

    Rng rng(19);
    for (int i = 0; i < 100; ++i) {
        EpipolarLine lr;
        lr.l = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-50, 50));
        if (lr.l.head<2>().norm() < 1e-3) continue;
        const Vec2 y(rng.uniform(-100, 100), rng.uniform(-100, 100));
        const Vec2 yo = project_to_line(y, lr);
        // on the line
        CHECK(std::abs(lr.l[0] * yo.x() + lr.l[1] * yo.y() + lr.l[2]) < 1e-9 * (1.0 + lr.l.norm()));
        // correction parallel to the line normal
        const Vec2 diff = y - yo;
        CHECK(std::abs(diff.x() * lr.l[1] - diff.y() * lr.l[0]) < 1e-9);
        // idempotent
        CHECK((project_to_line(yo, lr) - yo).norm() < 1e-12);

        // grid-search oracle within 1e-3 px
        const Vec2 dir = Vec2(-lr.l[1], lr.l[0]).normalized();
        double best = 1e30;
        Vec2 best_z;
        for (int s = -4000; s <= 4000; ++s) {
            const Vec2 z = yo + dir * (s * 0.0005);
            const double dd = (y - z).norm();
            if (dd < best) {
                best = dd;
                best_z = z;
            }
        }
        CHECK((best_z - yo).norm() < 1e-3);
    }

    EpipolarLine bad;
    bad.l = Vec3(0, 0, 1);
    bad.degenerate = true;
    CHECK_THROWS_AS(project_to_line({0, 0}, bad), DegenerateLine);
}

TEST_CASE("rodrigues_angle definition, symmetry, composition") {
    const Mat3 I = Mat3::Identity();
    CHECK(rodrigues_angle(I, I) == doctest::Approx(0.0));
    CHECK(rodrigues_angle(rotation_x(0.1), I) == doctest::Approx(0.1).epsilon(1e-12));

    Rng rng(20);
    for (int i = 0; i < 100; ++i) {
        const Mat3 R1 = rotation_from_angles(random_pose(rng, M_PI / 2));
        const Mat3 R2 = rotation_from_angles(random_pose(rng, M_PI / 2));
        CHECK(rodrigues_angle(R1, R2) == doctest::Approx(rodrigues_angle(R2, R1)).epsilon(1e-12));

        const double eps = rng.uniform(-0.5, 0.5);
        CHECK(rodrigues_angle(R1, R1 * rotation_x(eps)) == doctest::Approx(std::abs(eps)).epsilon(1e-9));
    }

    Mat3 bad = Mat3::Identity();
    bad(0, 0) = 1.1;
    CHECK_THROWS_AS(rodrigues_angle(bad, I), NotARotation);
}

TEST_CASE("intersection_angle") {
    CHECK(intersection_angle({0, 0, 1}, {0, 0, 2}) == doctest::Approx(0.0));
    CHECK(intersection_angle({1, 0, 0}, {0, 1, 0}) == doctest::Approx(M_PI / 2));
    CHECK(intersection_angle({0, 0, 1}, {0, 0, -1}) == doctest::Approx(M_PI));
    CHECK_THROWS_AS(intersection_angle(Vec3::Zero(), {0, 0, 1}), ZeroVector);
}

TEST_CASE("wrap_angle") {
    CHECK(wrap_angle(0.0) == doctest::Approx(0.0));
    CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(3 * M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(2.5 * M_PI) == doctest::Approx(0.5 * M_PI));
}
