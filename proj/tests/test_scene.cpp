#include <doctest.h>

#include <cmath>

#include "jetvo/scene.hpp"

using namespace jetvo;

namespace {

SceneConfig small_driving() {
    SceneConfig cfg;
    cfg.width = 320;
    cfg.height = 240;
    cfg.intrinsics = {300.0, 300.0, 159.5, 119.5};
    cfg.feature_count = 60;
    cfg.feature_min_distance = 8.0;
    return cfg;
}

}  // namespace

TEST_CASE("identity motion renders identical frames with zero displacement") {
    SceneConfig cfg = small_driving();
    cfg.baseline = 0.0;
    cfg.gt_pose = {0, 0, 0, 0, 0};
    const SyntheticScene scene = render_scene(cfg, 5);
    REQUIRE(scene.frames.first.width == cfg.width);
    for (size_t i = 0; i < scene.frames.first.data.size(); ++i)
        CHECK(scene.frames.first.data[i] == scene.frames.second.data[i]);
    for (const auto& c : scene.gt_correspondences) CHECK((c.y - c.x).norm() < 1e-9);
}

TEST_CASE("pure forward motion produces radial ground-truth flow") {
    SceneConfig cfg = small_driving();
    cfg.gt_pose = {0, 0, 0, 0, 0};
    cfg.baseline = 1.0;
    const SyntheticScene scene = render_scene(cfg, 6);
    REQUIRE(scene.gt_correspondences.size() >= 10);

    const Vec2 pp(cfg.intrinsics.cx, cfg.intrinsics.cy);
    int checked = 0;
    for (size_t k = 0; k < scene.gt_correspondences.size() && checked < 10; ++k) {
        const auto& c = scene.gt_correspondences[k];
        const Vec2 flow = c.y - c.x;
        if (flow.norm() < 0.2) continue;
        const Vec2 radial = c.x - pp;
        if (radial.norm() < 20.0) continue;
        // flow parallel to the radial direction, pointing outward
        const double cross = flow.x() * radial.y() - flow.y() * radial.x();
        CHECK(std::abs(cross) <= 1e-6 * flow.norm() * radial.norm());
        CHECK(flow.dot(radial) > 0.0);
        ++checked;
    }
    CHECK(checked == 10);
}

TEST_CASE("ground-truth correspondences satisfy the epipolar constraint") {
    SceneConfig cfg = small_driving();
    cfg.gt_pose = {0.002, -0.004, 0.001, 0.03, -0.01};
    const SyntheticScene scene = render_scene(cfg, 7);
    REQUIRE(scene.gt_correspondences.size() >= 30);
    const FundamentalMatrix F = fundamental_matrix(scene.gt_pose, cfg.intrinsics);
    for (const auto& c : scene.gt_correspondences) {
        CHECK(std::abs(point_line_distance(c.y, c.x, F)) < 1e-9);
    }
}

TEST_CASE("ground-truth point matches an independent homography evaluation") {
    SceneConfig cfg = small_driving();
    cfg.gt_pose = {0.001, 0.003, -0.002, 0.05, 0.01};
    const SyntheticScene scene = render_scene(cfg, 8);

    // H = K (R_rel + t_rel n^T / d) K^-1 maps first-image to second-image
    // pixels for points on the plane n.X = d
    const Mat3 R_rel = scene.cam2_rotation.transpose();
    const Vec3 t_rel = -(scene.cam2_rotation.transpose() * scene.cam2_center);
    const Mat3 K = cfg.intrinsics.matrix();
    const Mat3 Ki = cfg.intrinsics.inverse();

    int checked = 0;
    for (const auto& c : scene.gt_correspondences) {
        Vec2 y;
        int plane_id = -1;
        REQUIRE(scene.ground_truth_point(c.x, y, &plane_id));
        const auto& pl = scene.planes[plane_id];
        const Mat3 H = K * (R_rel + t_rel * pl.normal.transpose() / pl.distance) * Ki;
        const Vec3 yh = H * Vec3(c.x.x(), c.x.y(), 1.0);
        const Vec2 y_homography(yh.x() / yh.z(), yh.y() / yh.z());
        CHECK((y_homography - c.y).norm() < 1e-9);
        if (++checked >= 10) break;
    }
    CHECK(checked == 10);
}

TEST_CASE("renderer floor: photometric error at ground truth is small") {
    SceneConfig cfg = small_driving();
    cfg.gt_pose = {0.001, -0.002, 0.0005, 0.02, 0.005};
    const SyntheticScene scene = render_scene(cfg, 9);
    const WeightKernel W = gaussian_kernel(9, 2.0);
    double total = 0.0;
    int n = 0;
    for (const auto& c : scene.gt_correspondences) {
        total += wssd(scene.frames.first, scene.frames.second, c.x, c.y - c.x, W);
        ++n;
    }
    REQUIRE(n > 0);
    const double floor = total / n;
    CHECK(floor >= 0.0);
    CHECK(floor < 50.0);  // resampling and perspective mismatch only
    MESSAGE("renderer floor SSD = ", floor);
}

TEST_CASE("room layout renders and yields features") {
    SceneConfig cfg;
    cfg.layout = SceneLayout::Room;
    cfg.width = 320;
    cfg.height = 240;
    cfg.intrinsics = {300.0, 300.0, 159.5, 119.5};
    cfg.baseline = 0.1;
    cfg.feature_count = 50;
    cfg.gt_pose = {0.01, -0.02, 0.005, 0.4, 0.2};
    const SyntheticScene scene = render_scene(cfg, 10);
    CHECK(scene.gt_correspondences.size() >= 40);
    const FundamentalMatrix F = fundamental_matrix(scene.gt_pose, cfg.intrinsics);
    for (const auto& c : scene.gt_correspondences)
        CHECK(std::abs(point_line_distance(c.y, c.x, F)) < 1e-9);
}

TEST_CASE("select_features on degenerate images") {
    const Image flat(64, 64, 100.0);
    const FeatureSelection none = select_features(flat, 10, 5.0, 6);
    CHECK(none.points.empty());
    CHECK(none.insufficient);

    Image dot(64, 64, 0.0);
    dot.at(31, 33) = 255.0;
    const FeatureSelection one = select_features(dot, 5, 5.0, 6);
    REQUIRE_FALSE(one.points.empty());
    CHECK((one.points[0] - Vec2(31, 33)).norm() <= 2.0);
}

TEST_CASE("selected features have well-conditioned patch systems") {
    SceneConfig cfg = small_driving();
    cfg.gt_pose = {0, 0.001, 0, 0.01, 0};
    const SyntheticScene scene = render_scene(cfg, 11);
    const WeightKernel W = gaussian_kernel(9, 2.0);
    for (const auto& c : scene.gt_correspondences) {
        const PatchSystem ps =
            patch_system(scene.frames.first, scene.frames.first, c.x, c.x, W);
        REQUIRE(ps.valid);
        CHECK(condition_2x2(ps.a_regularized()) <= kConditionLimit);
    }
}

TEST_CASE("feature selection respects spacing and determinism") {
    SceneConfig cfg = small_driving();
    cfg.gt_pose = {0, 0, 0, 0, 0};
    const SyntheticScene scene = render_scene(cfg, 12);
    const FeatureSelection a = select_features(scene.frames.first, 50, 10.0, 8);
    const FeatureSelection b = select_features(scene.frames.first, 50, 10.0, 8);
    REQUIRE(a.points.size() == b.points.size());
    for (size_t i = 0; i < a.points.size(); ++i) CHECK((a.points[i] - b.points[i]).norm() == 0.0);
    for (size_t i = 0; i < a.points.size(); ++i)
        for (size_t j = i + 1; j < a.points.size(); ++j)
            CHECK((a.points[i] - a.points[j]).norm() >= 10.0);
}

TEST_CASE("camera behind a plane is rejected") {
    SceneConfig cfg = small_driving();
    cfg.gt_pose = {0, 0, 0, 0, M_PI / 2 - 0.01};  // y points down: this dives into the ground
    cfg.baseline = 5.0;                            // below the ground plane
    CHECK_THROWS_AS(render_scene(cfg, 13), BadSceneGeometry);
}
