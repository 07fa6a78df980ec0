#include "jetvo/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jetvo/random.hpp"

namespace jetvo {

namespace {

// hashed lattice value in [-1, 1]
inline double lattice_value(std::uint64_t seed, long ix, long iy) {
    std::uint64_t h = splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(ix) +
                                         0xC2B2AE3D27D4EB4FULL * static_cast<std::uint64_t>(iy)));
    return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

// C2 value noise: quintic-faded bilinear blend of the lattice
double value_noise(std::uint64_t seed, double u, double v) {
    const double fu = std::floor(u), fv = std::floor(v);
    const long iu = static_cast<long>(fu), iv = static_cast<long>(fv);
    double tu = u - fu, tv = v - fv;
    tu = tu * tu * tu * (tu * (tu * 6.0 - 15.0) + 10.0);
    tv = tv * tv * tv * (tv * (tv * 6.0 - 15.0) + 10.0);
    const double v00 = lattice_value(seed, iu, iv), v10 = lattice_value(seed, iu + 1, iv);
    const double v01 = lattice_value(seed, iu, iv + 1), v11 = lattice_value(seed, iu + 1, iv + 1);
    return (1.0 - tv) * ((1.0 - tu) * v00 + tu * v10) + tv * ((1.0 - tu) * v01 + tu * v11);
}

}  // namespace

double ScenePlane::texture(double u, double v, double px_per_unit, double psf_sigma) const {
    double g = base;
    for (const auto& o : octaves) {
        // value noise concentrates its energy near wavelength ~ 2.5 cells
        const double k_screen = 2.0 * M_PI / (2.5 * o.cell * px_per_unit);
        const double att = std::exp(-0.5 * k_screen * k_screen * psf_sigma * psf_sigma);
        if (att < 1e-4) continue;
        g += att * o.amp * value_noise(o.seed, u / o.cell, v / o.cell);
    }
    return g;
}

namespace {

struct Camera {
    Mat3 rotation = Mat3::Identity();  // camera-to-world
    Vec3 center = Vec3::Zero();
};

// nearest positive ray-plane intersection; returns plane index or -1
int intersect(const std::vector<ScenePlane>& planes, const Camera& cam, const Vec3& ray_cam,
              Vec3& point, double& depth_out) {
    const Vec3 dir = cam.rotation * ray_cam;
    int best = -1;
    double best_mu = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < planes.size(); ++j) {
        const auto& pl = planes[j];
        const double denom = pl.normal.dot(dir);
        if (std::abs(denom) < 1e-12) continue;
        const double mu = (pl.distance - pl.normal.dot(cam.center)) / denom;
        if (mu > 1e-6 && mu < best_mu) {
            best_mu = mu;
            best = static_cast<int>(j);
        }
    }
    if (best >= 0) {
        point = cam.center + best_mu * dir;
        depth_out = best_mu;
    }
    return best;
}

Image render_view(const std::vector<ScenePlane>& planes, const Camera& cam, int width, int height,
                  const CameraIntrinsics& K, double psf_sigma) {
    Image img(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const Vec3 ray = K.ray(Vec2(x, y));
            const Vec3 dir = cam.rotation * ray;
            Vec3 point;
            double depth = 0.0;
            const int id = intersect(planes, cam, ray, point, depth);
            if (id < 0) throw BadSceneGeometry("render_view: ray escapes the scene");
            const auto& pl = planes[id];
            const Vec3 origin = pl.distance * pl.normal;
            const Vec3 rel = point - origin;
            const double z = (cam.rotation.transpose() * (point - cam.center)).z();
            // grazing incidence stretches the pixel footprint along one axis;
            // the geometric mean approximates the two-axis blur isotropically
            const double grazing = std::sqrt(std::max(std::abs(pl.normal.dot(dir.normalized())), 2.5e-3));
            const double px_per_unit = K.fx * grazing / std::max(z, 1e-6);
            img.at(x, y) = std::clamp(
                pl.texture(pl.tex_u.dot(rel), pl.tex_v.dot(rel), px_per_unit, psf_sigma), 0.0, 255.0);
        }
    }
    return img;
}

void add_octaves(ScenePlane& plane, double ref_depth, const SceneConfig& cfg, Rng& rng) {
    // finest octave sized in screen pixels at ref_depth, each next one twice
    // as coarse; amplitudes grow as cell^exponent so long structure dominates
    // intensity while fine octaves still carry gradient energy
    const double metres_per_px = ref_depth / cfg.intrinsics.fx;
    double cell = cfg.min_wavelength_px / 2.5 * metres_per_px;
    double amp_sum = 0.0;
    for (int o = 0; o < cfg.texture_octaves; ++o) {
        ScenePlane::Octave oct;
        oct.cell = cell;
        oct.amp = std::pow(cell / metres_per_px, cfg.spectrum_exponent) * rng.uniform(0.8, 1.2);
        oct.seed = rng.next_u64();
        plane.octaves.push_back(oct);
        amp_sum += oct.amp;
        cell *= 2.0;
    }
    for (auto& o : plane.octaves) o.amp *= cfg.contrast / amp_sum;
}

std::vector<ScenePlane> build_planes(const SceneConfig& cfg, Rng& rng) {
    std::vector<ScenePlane> planes;
    auto plane = [](const Vec3& n, double d, const Vec3& u, const Vec3& v) {
        ScenePlane p;
        p.normal = n;
        p.distance = d;
        p.tex_u = u;
        p.tex_v = v;
        return p;
    };
    // camera frame: x right, y down, z forward
    if (cfg.layout == SceneLayout::Driving) {
        planes.push_back(plane({0, 1, 0}, 1.5, Vec3::UnitX(), Vec3::UnitZ()));     // ground
        planes.push_back(plane({-1, 0, 0}, 9.0, Vec3::UnitZ(), Vec3::UnitY()));   // left facade
        planes.push_back(plane({1, 0, 0}, 9.0, Vec3::UnitZ(), Vec3::UnitY()));    // right facade
        planes.push_back(plane({0, 0, 1}, 45.0, Vec3::UnitX(), Vec3::UnitY()));   // far wall
        const double ref_depth[] = {10.0, 14.0, 14.0, 45.0};
        for (size_t i = 0; i < planes.size(); ++i) add_octaves(planes[i], ref_depth[i], cfg, rng);
    } else {
        planes.push_back(plane({0, 1, 0}, 1.2, Vec3::UnitX(), Vec3::UnitZ()));    // floor
        planes.push_back(plane({0, -1, 0}, 1.2, Vec3::UnitX(), Vec3::UnitZ()));   // ceiling
        planes.push_back(plane({-1, 0, 0}, 2.5, Vec3::UnitZ(), Vec3::UnitY()));   // left wall
        planes.push_back(plane({1, 0, 0}, 2.5, Vec3::UnitZ(), Vec3::UnitY()));    // right wall
        planes.push_back(plane({0, 0, 1}, 5.0, Vec3::UnitX(), Vec3::UnitY()));    // front wall
        const double ref_depth[] = {2.0, 2.0, 2.5, 2.5, 5.0};
        for (size_t i = 0; i < planes.size(); ++i) add_octaves(planes[i], ref_depth[i], cfg, rng);
    }
    return planes;
}

}  // namespace

FeatureSelection select_features(const Image& image, int n, double min_distance, int border) {
    FeatureSelection sel;
    const int w = image.width, h = image.height;
    if (w < 2 * border + 3 || h < 2 * border + 3) {
        sel.insufficient = true;
        return sel;
    }

    // gradient grids by central differences at integer pixels
    std::vector<double> gx(static_cast<size_t>(w) * h, 0.0), gy(gx);
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            gx[static_cast<size_t>(y) * w + x] = (image.at(x + 1, y) - image.at(x - 1, y)) / 2.0;
            gy[static_cast<size_t>(y) * w + x] = (image.at(x, y + 1) - image.at(x, y - 1)) / 2.0;
        }
    }

    const WeightKernel W = gaussian_kernel(9, 2.0);
    const int r = W.radius();
    const int lo_x = std::max(border, r + 1), hi_x = w - 1 - std::max(border, r + 1);
    const int lo_y = std::max(border, r + 1), hi_y = h - 1 - std::max(border, r + 1);

    struct Candidate {
        double response;
        int x, y;
    };
    std::vector<Candidate> candidates;
    constexpr double kMinResponse = 0.8;  // gray^2/px^2; weaker corners suffer the aperture problem
    for (int y = lo_y; y <= hi_y; ++y) {
        for (int x = lo_x; x <= hi_x; ++x) {
            double axx = 0.0, axy = 0.0, ayy = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                const size_t row = static_cast<size_t>(y + dy) * w + x;
                for (int dx = -r; dx <= r; ++dx) {
                    const double wt = W.at(dx, dy);
                    const double px = gx[row + dx], py = gy[row + dx];
                    axx += wt * px * px;
                    axy += wt * px * py;
                    ayy += wt * py * py;
                }
            }
            const double mid = (axx + ayy) / 2.0;
            const double det = axx * ayy - axy * axy;
            const double lmin = mid - std::sqrt(std::max(mid * mid - det, 0.0));
            if (lmin >= kMinResponse) candidates.push_back({lmin, x, y});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });

    const double d2 = min_distance * min_distance;
    for (const auto& c : candidates) {
        if (static_cast<int>(sel.points.size()) >= n) break;
        bool clear = true;
        for (const auto& p : sel.points) {
            const double dx = p.x() - c.x, dy = p.y() - c.y;
            if (dx * dx + dy * dy < d2) {
                clear = false;
                break;
            }
        }
        if (clear) sel.points.emplace_back(c.x, c.y);
    }
    sel.insufficient = static_cast<int>(sel.points.size()) < n;
    return sel;
}

bool SyntheticScene::ground_truth_point(const Vec2& x, Vec2& y, int* plane_id) const {
    const Camera cam1;
    Vec3 point;
    double depth = 0.0;
    const int id = intersect(planes, cam1, frames.intrinsics.ray(x), point, depth);
    if (plane_id) *plane_id = id;
    if (id < 0) return false;
    const Vec3 in_cam2 = cam2_rotation.transpose() * (point - cam2_center);
    if (in_cam2.z() < 0.1) return false;
    y = frames.intrinsics.project(in_cam2);
    return true;
}

SyntheticScene render_scene(const SceneConfig& config, std::uint64_t seed) {
    SyntheticScene scene;
    scene.gt_pose = config.gt_pose;

    Rng texture_rng(splitmix64(seed ^ 0x74657874ULL));
    scene.planes = build_planes(config, texture_rng);

    // second camera pose from the ground-truth motion: R_rel maps first-camera
    // coordinates to second-camera coordinates, the translation direction
    // points along the camera displacement expressed in the second frame.
    const Mat3 R_rel = rotation_from_angles(config.gt_pose);
    const Vec3 t_dir = translation_from_polar(config.gt_pose.alpha, config.gt_pose.beta);
    Camera cam1;
    Camera cam2;
    cam2.rotation = R_rel.transpose();
    cam2.center = config.baseline * (R_rel.transpose() * t_dir);

    for (const auto& pl : scene.planes) {
        if (pl.normal.dot(cam1.center) >= pl.distance || pl.normal.dot(cam2.center) >= pl.distance)
            throw BadSceneGeometry("render_scene: camera on the wrong side of a plane");
    }

    scene.cam2_rotation = cam2.rotation;
    scene.cam2_center = cam2.center;
    scene.frames.intrinsics = config.intrinsics;
    scene.frames.first =
        render_view(scene.planes, cam1, config.width, config.height, config.intrinsics, config.psf_sigma_px);
    scene.frames.second =
        render_view(scene.planes, cam2, config.width, config.height, config.intrinsics, config.psf_sigma_px);
    if (config.exposure_gain_range > 0.0 || config.exposure_offset_range > 0.0) {
        Rng exp_rng(splitmix64(seed ^ 0x6578706fULL));
        const double gain = 1.0 + exp_rng.uniform(-config.exposure_gain_range, config.exposure_gain_range);
        const double offset = exp_rng.uniform(-config.exposure_offset_range, config.exposure_offset_range);
        for (auto& v : scene.frames.second.data) v = std::clamp(gain * v + offset, 0.0, 255.0);
    }
    if (config.sensor_noise_sigma > 0.0) {
        Rng noise_rng(splitmix64(seed ^ 0x73656e73ULL));
        for (auto* img : {&scene.frames.first, &scene.frames.second}) {
            for (auto& v : img->data)
                v = std::clamp(v + config.sensor_noise_sigma * noise_rng.normal(), 0.0, 255.0);
        }
    }

    // features in the first frame, correspondences by exact reprojection
    const double margin_i = config.kernel_radius + 2.0;
    const double margin_j = config.kernel_radius + 2.0 + config.feature_margin_pad;
    const int border = static_cast<int>(std::ceil(margin_i)) + 1;
    FeatureSelection sel =
        select_features(scene.frames.first, config.feature_count * 3, config.feature_min_distance, border);

    for (const auto& x : sel.points) {
        if (static_cast<int>(scene.gt_correspondences.size()) >= config.feature_count) break;
        Vec2 y;
        int id = -1;
        if (!scene.ground_truth_point(x, y, &id)) continue;
        if (!scene.frames.second.patch_inside(y, config.kernel_radius, margin_j)) continue;
        if (config.single_plane_patches) {
            // reject patches straddling plane seams (their flow is not one homography)
            bool pure = true;
            const double rr = config.kernel_radius + 1.0;
            for (const double sx : {-rr, rr}) {
                for (const double sy : {-rr, rr}) {
                    Vec2 tmp;
                    int corner_id = -1;
                    if (!scene.ground_truth_point(x + Vec2(sx, sy), tmp, &corner_id) || corner_id != id) {
                        pure = false;
                        break;
                    }
                }
                if (!pure) break;
            }
            if (!pure) continue;
        }
        Correspondence c;
        c.x = x;
        c.y = y;
        scene.gt_correspondences.push_back(c);
    }
    scene.insufficient_texture =
        static_cast<int>(scene.gt_correspondences.size()) < config.feature_count;
    return scene;
}

}  // namespace jetvo
