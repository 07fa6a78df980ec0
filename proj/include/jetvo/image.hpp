#pragma once

#include <string>
#include <vector>

#include "jetvo/geometry.hpp"

namespace jetvo {

/// Grayscale image, row-major, floating-point intensities in [0, 255].
/// Immutable after construction as far as the library is concerned.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, double fill = 0.0) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }

    bool contains(const Vec2& pt) const {
        return pt.x() >= 0.0 && pt.y() >= 0.0 && pt.x() <= width - 1.0 && pt.y() <= height - 1.0;
    }
    /// True when the whole square patch of given radius around center stays
    /// at least `margin` pixels inside the image.
    bool patch_inside(const Vec2& center, int radius, double margin = 1.0) const {
        return center.x() - radius >= margin && center.y() - radius >= margin &&
               center.x() + radius <= width - 1.0 - margin && center.y() + radius <= height - 1.0 - margin;
    }
};

/// Two grayscale frames sharing one set of intrinsics. `first` holds the
/// feature points x_k, `second` the correspondences y_k.
struct FramePair {
    Image first;
    Image second;
    CameraIntrinsics intrinsics;
};

/// Normalized non-negative patch weights with odd side length.
struct WeightKernel {
    int side = 0;
    std::vector<double> w;  // side*side, sums to 1

    int radius() const { return side / 2; }
    double at(int dx, int dy) const {  // offsets in [-radius, radius]
        return w[static_cast<size_t>(dy + radius()) * side + (dx + radius())];
    }
};

/// Sampled isotropic Gaussian, renormalized to sum 1.
WeightKernel gaussian_kernel(int side, double sigma);

/// A + eps*I with eps = 1e-6 * trace(A)/2; every solve and every
/// factorization downstream uses this matrix, never raw A.
inline Mat2 regularize_patch_matrix(const Mat2& a) {
    const double eps = 1e-6 * a.trace() / 2.0;
    return a + eps * Mat2::Identity();
}

/// Per-feature quadratic model of the weighted SSD in the displacement:
/// Q~(v) = v^T A v + 2 v^T b + c.
struct PatchSystem {
    Mat2 a = Mat2::Zero();
    Vec2 b = Vec2::Zero();
    double c = 0.0;
    int feature = -1;
    bool valid = false;

    Mat2 a_regularized() const { return regularize_patch_matrix(a); }
};

/// Bilinear interpolation at a subpixel position. Throws OutOfBounds outside
/// [0, w-1] x [0, h-1].
double sample_bilinear(const Image& img, const Vec2& pt);

/// Central differences of bilinear samples with unit step. Requires pt at
/// least one pixel inside the border.
Vec2 gradient(const Image& img, const Vec2& pt);

/// Builds (A, b, c) by weighted sums over the kernel support; gradients of J
/// are taken at y_k + offset. Features whose patches leave the valid region
/// come back with valid = false and a zeroed system, never an exception.
PatchSystem patch_system(const Image& I, const Image& J, const Vec2& x_k, const Vec2& y_k,
                         const WeightKernel& W, int feature_index = -1);

/// Exact weighted SSD at displacement v: sum_o W[o] * (I[x_k+o] - J[x_k+v+o])^2.
double wssd(const Image& I, const Image& J, const Vec2& x_k, const Vec2& v, const WeightKernel& W);

/// True when both patches needed by patch_system / wssd at (x_k, x_k+v) are
/// usable (1 px interior margin for gradients and interpolation).
bool patches_in_bounds(const Image& I, const Image& J, const Vec2& x_k, const Vec2& y_k, int radius);

// ---- file I/O (binary PGM P5 maxval 255, and 8/16-bit grayscale PNG) ----

Image load_image(const std::string& path);  // dispatches on magic bytes
Image load_pgm(const std::string& path);
Image load_png(const std::string& path);
void save_pgm(const Image& img, const std::string& path);

}  // namespace jetvo
