#include "jetvo/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>

namespace jetvo {

WeightKernel gaussian_kernel(int side, double sigma) {
    if (side < 3 || side % 2 == 0) throw BadKernelSpec("kernel side must be odd and >= 3");
    if (!(sigma > 0.0)) throw BadKernelSpec("kernel sigma must be positive");
    WeightKernel k;
    k.side = side;
    k.w.resize(static_cast<size_t>(side) * side);
    const int r = side / 2;
    double sum = 0.0;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            k.w[static_cast<size_t>(dy + r) * side + (dx + r)] = v;
            sum += v;
        }
    }
    for (double& v : k.w) v /= sum;
    return k;
}

double sample_bilinear(const Image& img, const Vec2& pt) {
    if (!img.contains(pt)) throw OutOfBounds("sample_bilinear: point outside image");
    int x0 = static_cast<int>(std::floor(pt.x()));
    int y0 = static_cast<int>(std::floor(pt.y()));
    // right/bottom edge: clamp the cell so weights degenerate to the border pixel
    if (x0 > img.width - 2) x0 = img.width - 2;
    if (y0 > img.height - 2) y0 = img.height - 2;
    const double ax = pt.x() - x0;
    const double ay = pt.y() - y0;
    const double v00 = img.at(x0, y0), v10 = img.at(x0 + 1, y0);
    const double v01 = img.at(x0, y0 + 1), v11 = img.at(x0 + 1, y0 + 1);
    return (1.0 - ay) * ((1.0 - ax) * v00 + ax * v10) + ay * ((1.0 - ax) * v01 + ax * v11);
}

Vec2 gradient(const Image& img, const Vec2& pt) {
    if (pt.x() < 1.0 || pt.y() < 1.0 || pt.x() > img.width - 2.0 || pt.y() > img.height - 2.0)
        throw OutOfBounds("gradient: point too close to border");
    const double gx = (sample_bilinear(img, {pt.x() + 1.0, pt.y()}) - sample_bilinear(img, {pt.x() - 1.0, pt.y()})) / 2.0;
    const double gy = (sample_bilinear(img, {pt.x(), pt.y() + 1.0}) - sample_bilinear(img, {pt.x(), pt.y() - 1.0})) / 2.0;
    return {gx, gy};
}

bool patches_in_bounds(const Image& I, const Image& J, const Vec2& x_k, const Vec2& y_k, int radius) {
    return I.patch_inside(x_k, radius, 1.0) && J.patch_inside(y_k, radius, 1.0);
}

PatchSystem patch_system(const Image& I, const Image& J, const Vec2& x_k, const Vec2& y_k,
                         const WeightKernel& W, int feature_index) {
    PatchSystem s;
    s.feature = feature_index;
    const int r = W.radius();
    if (!patches_in_bounds(I, J, x_k, y_k, r)) return s;  // valid stays false, system zeroed

    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            const double w = W.at(dx, dy);
            const Vec2 off(dx, dy);
            const Vec2 g = gradient(J, y_k + off);
            const double diff = sample_bilinear(I, x_k + off) - sample_bilinear(J, y_k + off);
            s.a += w * g * g.transpose();
            s.b -= w * g * diff;
            s.c += w * diff * diff;
        }
    }
    s.valid = true;
    return s;
}

double wssd(const Image& I, const Image& J, const Vec2& x_k, const Vec2& v, const WeightKernel& W) {
    const int r = W.radius();
    if (!I.patch_inside(x_k, r, 0.0) || !J.patch_inside(x_k + v, r, 0.0))
        throw OutOfBounds("wssd: patch outside image");
    double q = 0.0;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            const Vec2 off(dx, dy);
            const double diff = sample_bilinear(I, x_k + off) - sample_bilinear(J, x_k + v + off);
            q += W.at(dx, dy) * diff * diff;
        }
    }
    return q;
}

// ---------------------------------------------------------------- file I/O

namespace {

int pnm_token(std::istream& in) {
    // skips whitespace and '#' comments
    while (true) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = -1;
    in >> value;
    return value;
}

}  // namespace

Image load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '5') throw ParseError(path + ": not a binary PGM (P5)");
    const int w = pnm_token(in);
    const int h = pnm_token(in);
    const int maxval = pnm_token(in);
    if (w < 1 || h < 1) throw ParseError(path + ": bad PGM dimensions");
    if (maxval != 255) throw ParseError(path + ": only maxval 255 supported");
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> raw(static_cast<size_t>(w) * h);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw ParseError(path + ": truncated PGM payload");
    Image img(w, h);
    for (size_t i = 0; i < raw.size(); ++i) img.data[i] = static_cast<double>(raw[i]);
    return img;
}

void save_pgm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.data.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        const double v = std::round(std::clamp(img.data[i], 0.0, 255.0));
        raw[i] = static_cast<unsigned char>(v);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

Image load_png(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw DataError("cannot open " + path);
    png_byte header[8];
    if (std::fread(header, 1, 8, fp) != 8 || png_sig_cmp(header, 0, 8) != 0) {
        std::fclose(fp);
        throw ParseError(path + ": not a PNG file");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw DataError(path + ": libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw ParseError(path + ": corrupt PNG");
    }
    png_init_io(png, fp);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (depth == 16) png_set_strip_16(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    std::vector<png_byte> row(png_get_rowbytes(png, info));
    Image img(w, h);
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < w; ++x) img.at(x, y) = static_cast<double>(row[x]);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}

Image load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    in.close();
    if (magic[0] == 'P' && magic[1] == '5') return load_pgm(path);
    if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P') return load_png(path);
    throw ParseError(path + ": unrecognized image format (want PGM P5 or PNG)");
}

}  // namespace jetvo
