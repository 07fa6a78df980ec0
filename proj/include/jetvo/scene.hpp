#pragma once

#include <cstdint>
#include <vector>

#include "jetvo/tracking.hpp"

namespace jetvo {

/// World plane n.X = d (first-camera frame) carrying a procedural smooth
/// texture: seeded multi-octave value noise over in-plane coordinates. The
/// dense spectrum gives natural-image-like autocorrelation (one dominant
/// matching lobe, no periodic false minima). Rendering applies a Gaussian
/// point-spread filter: each octave is attenuated at its local screen-space
/// frequency, so distant texture blurs out instead of aliasing.
struct ScenePlane {
    Vec3 normal = Vec3::UnitZ();
    double distance = 1.0;
    Vec3 tex_u = Vec3::UnitX();
    Vec3 tex_v = Vec3::UnitY();

    struct Octave {
        double cell;  // lattice spacing, world units
        double amp;
        std::uint64_t seed;
    };
    std::vector<Octave> octaves;
    double base = 128.0;

    /// px_per_unit: screen pixels per world unit at the sampled point;
    /// psf_sigma: blur kernel width in pixels.
    double texture(double u, double v, double px_per_unit, double psf_sigma) const;
};

enum class SceneLayout { Driving, Room };

struct SceneConfig {
    int width = 512;
    int height = 384;
    CameraIntrinsics intrinsics{480.0, 480.0, 255.5, 191.5};
    double baseline = 1.2;  // metres travelled between the two frames
    MotionParams gt_pose;
    SceneLayout layout = SceneLayout::Driving;

    int texture_octaves = 5;
    double contrast = 150.0;           // total texture amplitude, gray levels
    double min_wavelength_px = 10.0;   // finest octave at each plane's reference depth
    double spectrum_exponent = 0.85;   // octave amplitude ~ cell^exponent
    double psf_sigma_px = 1.6;         // camera point-spread width
    double sensor_noise_sigma = 3.0;   // i.i.d. Gaussian gray-level noise per pixel
    double exposure_gain_range = 0.0;  // second frame gain drawn from 1 +/- range
    double exposure_offset_range = 0.0;  // second frame offset, gray levels

    int feature_count = 400;
    double feature_min_distance = 10.0;
    int kernel_radius = 4;          // used for border margins
    double feature_margin_pad = 8.0;  // extra margin so noisy patches stay inside
    bool single_plane_patches = true;
};

struct SyntheticScene {
    FramePair frames;
    MotionParams gt_pose;
    std::vector<Correspondence> gt_correspondences;
    bool insufficient_texture = false;

    // scene description kept for analytic oracles
    std::vector<ScenePlane> planes;
    Mat3 cam2_rotation = Mat3::Identity();  // camera-to-world
    Vec3 cam2_center = Vec3::Zero();

    /// Exact correspondence of a first-image point by ray casting; returns
    /// false when the projection leaves the second camera's front side.
    bool ground_truth_point(const Vec2& x, Vec2& y, int* plane_id = nullptr) const;
};

struct FeatureSelection {
    std::vector<Vec2> points;
    bool insufficient = false;
};

/// Top-N corner responses (min-eigenvalue of the kernel-windowed structure
/// tensor) with greedy non-maximum suppression, deterministic ordering.
FeatureSelection select_features(const Image& image, int n, double min_distance, int border);

/// Renders both frames by exact ray-plane texture evaluation and attaches
/// analytically computed ground-truth correspondences.
SyntheticScene render_scene(const SceneConfig& config, std::uint64_t seed);

}  // namespace jetvo
