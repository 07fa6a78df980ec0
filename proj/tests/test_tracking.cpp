#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "jetvo/random.hpp"
#include "jetvo/tracking.hpp"

using namespace jetvo;

namespace {

const CameraIntrinsics kKitti{718.856, 718.856, 607.19, 185.22};

Mat2 random_spd(Rng& rng, double scale = 50.0, double min_eig = 1.0) {
    const double angle = rng.uniform(0.0, M_PI);
    const double l1 = rng.uniform(min_eig, scale);
    const double l2 = rng.uniform(min_eig, scale);
    Mat2 Q;
    Q << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    Mat2 D = Mat2::Zero();
    D(0, 0) = l1;
    D(1, 1) = l2;
    return Q * D * Q.transpose();
}

MotionParams random_pose(Rng& rng, double rot = 0.3, double trans = 0.8) {
    return {rng.uniform(-rot, rot), rng.uniform(-rot, rot), rng.uniform(-rot, rot),
            rng.uniform(-trans, trans), rng.uniform(-trans, trans)};
}

double quad(const Mat2& a, const Vec2& b, const Vec2& v) { return v.dot(a * v) + 2.0 * v.dot(b); }

double rel_diff(const Mat25& a, const Mat25& b) {
    return (a - b).norm() / (b.norm() + 1e-12);
}

}  // namespace

TEST_CASE("sqrt_spd_2x2 and condition_2x2") {
    Rng rng(40);
    for (int i = 0; i < 200; ++i) {
        const Mat2 a = random_spd(rng, 100.0, 0.01);
        const Mat2 s = sqrt_spd_2x2(a);
        CHECK((s * s - a).cwiseAbs().maxCoeff() < 1e-9 * (1.0 + a.norm()));
        CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
    Mat2 d = Mat2::Zero();
    d(0, 0) = 9.0;
    d(1, 1) = 1.0;
    CHECK(condition_2x2(d) == doctest::Approx(9.0));
    CHECK(std::isinf(condition_2x2(Mat2::Zero())));
}

TEST_CASE("lk_step basics and grid oracle") {
    CHECK(lk_step(Mat2::Identity() * 3.0, Vec2::Zero()).norm() == doctest::Approx(0.0));

    const Vec2 v = lk_step(Mat2::Identity(), {1.0, 2.0});
    CHECK(v.x() == doctest::Approx(-1.0).epsilon(1e-5));
    CHECK(v.y() == doctest::Approx(-2.0).epsilon(1e-5));

    Rng rng(41);
    for (int i = 0; i < 20; ++i) {
        const Mat2 a = random_spd(rng);
        const Vec2 b(rng.uniform(-20, 20), rng.uniform(-20, 20));
        const Vec2 vs = lk_step(a, b);
        // grid search over displacements: the solver must match the argmin
        double best = 1e300;
        Vec2 best_v;
        for (int gx = -400; gx <= 400; ++gx)
            for (int gy = -400; gy <= 400; ++gy) {
                const Vec2 g(gx * 0.01 + vs.x(), gy * 0.01 + vs.y());
                const double q = quad(a, b, g);
                if (q < best) {
                    best = q;
                    best_v = g;
                }
            }
        CHECK((vs - best_v).norm() <= 0.011);
    }

    CHECK_THROWS_AS(lk_step(Mat2::Zero(), Vec2(1, 1)), IllConditioned);
}

TEST_CASE("constrained step: inactive constraint gives lambda 0") {
    Rng rng(42);
    for (int i = 0; i < 50; ++i) {
        const Mat2 a = random_spd(rng);
        const MotionParams p = random_pose(rng);
        const FundamentalMatrix F = fundamental_matrix(p, kKitti);
        const Vec2 x(rng.uniform(100, 1100), rng.uniform(40, 330));
        if (epipolar_line(F, x).degenerate) continue;

        // place y so the unconstrained optimum y + lk_step lands exactly on
        // the epipolar line: then the constraint is inactive
        const Vec2 b(rng.uniform(-20, 20), rng.uniform(-20, 20));
        const Vec2 v_u = lk_step(a, b);
        const Vec2 z = project_to_line(Vec2(rng.uniform(100, 1100), rng.uniform(40, 330)),
                                       epipolar_line(F, x));
        const Vec2 y = z - v_u;

        const ConstrainedStep step = lk_step_constrained(a, b, x, y, F);
        const Vec2 h = F.constraint_normal(x);
        CHECK(std::abs(step.lambda) * h.norm() < 1e-10 * (1.0 + b.norm()));
        CHECK((step.v - v_u).norm() < 1e-10 * (1.0 + v_u.norm()));
    }
}

TEST_CASE("constrained step with identity A is the closest-point projection") {
    Rng rng(43);
    for (int i = 0; i < 50; ++i) {
        const MotionParams p = random_pose(rng);
        const FundamentalMatrix F = fundamental_matrix(p, kKitti);
        const Vec2 x(rng.uniform(100, 1100), rng.uniform(40, 330));
        const EpipolarLine line = epipolar_line(F, x);
        if (line.degenerate) continue;
        const Vec2 y(rng.uniform(100, 1100), rng.uniform(40, 330));
        const Vec2 b(rng.uniform(-5, 5), rng.uniform(-5, 5));

        const ConstrainedStep step = lk_step_constrained(Mat2::Identity(), b, x, y, F);
        // minimizing v^T A_reg v + 2 v^T b over the line equals projecting
        // y - b/(1+eps) with A_reg = (1+eps) I, eps = 1e-6
        const Vec2 expected = project_to_line(y - b / (1.0 + 1e-6), line);
        CHECK((y + step.v - expected).norm() < 1e-8);
        CHECK((y + step.v - project_to_line(y - b, line)).norm() < 1e-4 * (1.0 + b.norm()));
    }
}

TEST_CASE("constrained step KKT suite with line-sweep optimality oracle") {
    Rng rng(44);
    int tested = 0;
    for (int i = 0; i < 300; ++i) {
        const Mat2 a = random_spd(rng, 80.0, 0.5);
        const Vec2 b(rng.uniform(-30, 30), rng.uniform(-30, 30));
        const MotionParams p = random_pose(rng);
        const FundamentalMatrix F = fundamental_matrix(p, kKitti);
        const Vec2 x(rng.uniform(100, 1100), rng.uniform(40, 330));
        const Vec2 y(rng.uniform(100, 1100), rng.uniform(40, 330));
        const EpipolarLine line = epipolar_line(F, x);
        if (line.degenerate) continue;
        ++tested;

        const ConstrainedStep step = lk_step_constrained(a, b, x, y, F);
        const Mat2 ar = regularize_patch_matrix(a);
        const Vec2 h = F.constraint_normal(x);

        // KKT stationarity
        CHECK((ar * step.v + b + step.lambda * h).norm() <= 1e-8 * (b.norm() + 1.0));
        CHECK(step.kkt_residual <= 1e-8 * (b.norm() + 1.0));
        // primal feasibility in the homogeneous bilinear form
        CHECK(std::abs(F.bilinear(y + step.v, x)) <= 1e-9);

        // optimality against a 1D sweep along the constraint line
        const Vec2 dir = Vec2(-h.y(), h.x()).normalized();
        const double q_opt = quad(ar, b, step.v);
        for (int s = -500; s <= 500; ++s) {
            const Vec2 v_alt = step.v + dir * (s * 0.01);
            CHECK(quad(ar, b, v_alt) >= q_opt - 1e-7 * (1.0 + std::abs(q_opt)));
        }
    }
    CHECK(tested > 250);
}

TEST_CASE("constrained step degeneracies") {
    FundamentalMatrix F;  // zero matrix: every line degenerate
    CHECK_THROWS_AS(lk_step_constrained(Mat2::Identity(), Vec2(1, 1), {0, 0}, {1, 1}, F), EpipoleDegenerate);

    const FundamentalMatrix Ff = fundamental_matrix({0, 0, 0, 0, 0}, CameraIntrinsics{1, 1, 0, 0});
    CHECK_THROWS_AS(lk_step_constrained(Mat2::Zero(), Vec2(1, 1), {1, 0}, {1, 1}, Ff), IllConditioned);

    ConstrainedStep out;
    CHECK(try_lk_step_constrained(Mat2::Identity(), Vec2(1, 1), {0, 0}, {1, 1}, F, out) ==
          StepStatus::EpipoleDegenerate);
}

TEST_CASE("displacement_f composes its constituents") {
    Rng rng(45);
    for (int i = 0; i < 30; ++i) {
        PatchSystem ps;
        ps.a = random_spd(rng);
        ps.b = Vec2(rng.uniform(-10, 10), rng.uniform(-10, 10));
        ps.valid = true;
        const MotionParams p = random_pose(rng);
        const Vec2 x(rng.uniform(100, 1100), rng.uniform(40, 330));
        const Vec2 y(rng.uniform(100, 1100), rng.uniform(40, 330));

        const FundamentalMatrix F = fundamental_matrix(p, kKitti);
        if (epipolar_line(F, x).degenerate) continue;
        const ConstrainedStep manual = lk_step_constrained(ps.a, ps.b, x, y, F);
        const ConstrainedStep composed = displacement_f(p, kKitti, ps, x, y);
        CHECK((manual.v - composed.v).norm() == doctest::Approx(0.0));
        CHECK(manual.lambda == doctest::Approx(composed.lambda));
    }
}

TEST_CASE("displacement_f: perfectly aligned ground truth gives zero step") {
    // b = 0 (photometric optimum at y) and y exactly on the epipolar line
    Rng rng(46);
    for (int i = 0; i < 30; ++i) {
        const MotionParams p = random_pose(rng);
        const FundamentalMatrix F = fundamental_matrix(p, kKitti);
        const Vec2 x(rng.uniform(100, 1100), rng.uniform(40, 330));
        const EpipolarLine line = epipolar_line(F, x);
        if (line.degenerate) continue;
        PatchSystem ps;
        ps.a = random_spd(rng);
        ps.b = Vec2::Zero();
        ps.valid = true;
        const Vec2 y = project_to_line(Vec2(rng.uniform(100, 1100), rng.uniform(40, 330)), line);
        const ConstrainedStep step = displacement_f(p, kKitti, ps, x, y);
        CHECK(step.v.norm() < 1e-8);
    }
}

TEST_CASE("displacement_f invariant to pose changes that fix the epipolar line") {
    // with A = eps*I and b = 0 the step depends on p only through g = (y;1)F(x;1);
    // for x=(1,0), y=(2,0) under forward motion, yaw and azimuth keep both on
    // the line y=0, so those Jacobian columns vanish
    const CameraIntrinsics K{1, 1, 0, 0};
    PatchSystem ps;
    ps.a = 1e-3 * Mat2::Identity();
    ps.b = Vec2::Zero();
    ps.valid = true;
    const Vec2 x(1.0, 0.0), y(2.0, 0.0);
    const MotionParams p0{0, 0, 0, 0, 0};

    for (const double eps : {1e-4, -1e-4, 3e-4}) {
        CHECK(displacement_f({0, eps, 0, 0, 0}, K, ps, x, y).v.norm() < 1e-12);  // yaw
        CHECK(displacement_f({0, 0, 0, eps, 0}, K, ps, x, y).v.norm() < 1e-12);  // azimuth
    }
    const Mat25 J = jacobian_f(p0, K, ps, x, y, 1e-6);
    CHECK(J.col(1).norm() < 1e-9);  // psi
    CHECK(J.col(3).norm() < 1e-9);  // alpha
    CHECK(J.col(0).norm() > 1e-3);  // theta moves the line
}

TEST_CASE("jacobian_f: step stability and 5-point-stencil oracle") {
    Rng rng(47);
    for (int i = 0; i < 25; ++i) {
        PatchSystem ps;
        ps.a = random_spd(rng);
        ps.b = Vec2(rng.uniform(-10, 10), rng.uniform(-10, 10));
        ps.valid = true;
        const MotionParams p = random_pose(rng);
        const Vec2 x(rng.uniform(100, 1100), rng.uniform(40, 330));
        const Vec2 y(rng.uniform(100, 1100), rng.uniform(40, 330));
        if (epipolar_line(fundamental_matrix(p, kKitti), x).degenerate) continue;

        const Mat25 J1 = jacobian_f(p, kKitti, ps, x, y, 1e-5);
        const Mat25 J2 = jacobian_f(p, kKitti, ps, x, y, 5e-6);
        CHECK(rel_diff(J1, J2) < 1e-4);

        // independent higher-order stencil
        Mat25 J5;
        const double h = 1e-4;
        for (int c = 0; c < 5; ++c) {
            Vec5 pv = p.vec();
            auto f = [&](double delta) {
                Vec5 q = pv;
                q[c] += delta;
                return displacement_f(MotionParams::from_vec(q), kKitti, ps, x, y).v;
            };
            J5.col(c) = (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h);
        }
        CHECK(rel_diff(jacobian_f(p, kKitti, ps, x, y), J5) < 1e-4);
    }
}
