#include "orange/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "orange/error.hpp"

namespace orange {

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
    }
    pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
        pixels_[i] = fill[0];
        pixels_[i + 1] = fill[1];
        pixels_[i + 2] = fill[2];
    }
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 1 || height < 1 ||
        pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
        throw Error(ErrorCode::InvalidArgument, "pixel buffer does not match dimensions");
    }
}

void RgbImage::paste(const RgbImage& src, int x, int y) {
    const int x0 = std::max(0, x);
    const int y0 = std::max(0, y);
    const int x1 = std::min(width_, x + src.width());
    const int y1 = std::min(height_, y + src.height());
    if (x0 >= x1 || y0 >= y1) return;
    const auto row_bytes = static_cast<std::size_t>(x1 - x0) * 3;
    for (int yy = y0; yy < y1; ++yy) {
        std::memcpy(&pixels_[offset(x0, yy)], &src.pixels_[src.offset(x0 - x, yy - y)], row_bytes);
    }
}

namespace {

struct Tap {
    int lo;
    int hi;
    double frac;
};

std::vector<Tap> bilinear_taps(int src, int dst) {
    std::vector<Tap> taps(static_cast<std::size_t>(dst));
    const double scale = static_cast<double>(src) / static_cast<double>(dst);
    for (int i = 0; i < dst; ++i) {
        double s = (static_cast<double>(i) + 0.5) * scale - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(src - 1));
        const int lo = static_cast<int>(std::floor(s));
        const int hi = std::min(lo + 1, src - 1);
        taps[static_cast<std::size_t>(i)] = {lo, hi, s - lo};
    }
    return taps;
}

std::vector<int> nearest_taps(int src, int dst) {
    std::vector<int> taps(static_cast<std::size_t>(dst));
    for (int i = 0; i < dst; ++i) {
        // floor((i + 0.5) * src / dst) in exact integer arithmetic
        const long long s = ((2LL * i + 1) * src) / (2LL * dst);
        taps[static_cast<std::size_t>(i)] = static_cast<int>(std::min<long long>(s, src - 1));
    }
    return taps;
}

}  // namespace

RgbImage resize(const RgbImage& src, int width, int height, Interpolation mode) {
    if (src.empty()) throw Error(ErrorCode::InvalidArgument, "resize of empty image");
    if (width == src.width() && height == src.height()) return src;
    RgbImage out(width, height);
    const auto in = src.bytes();
    auto dst = out.bytes();
    const auto in_stride = static_cast<std::size_t>(src.width()) * 3;

    if (mode == Interpolation::Nearest) {
        const auto xs = nearest_taps(src.width(), width);
        const auto ys = nearest_taps(src.height(), height);
        std::size_t o = 0;
        for (int y = 0; y < height; ++y) {
            const auto* row = &in[static_cast<std::size_t>(ys[static_cast<std::size_t>(y)]) * in_stride];
            for (int x = 0; x < width; ++x) {
                const auto* p = row + static_cast<std::size_t>(xs[static_cast<std::size_t>(x)]) * 3;
                dst[o++] = p[0];
                dst[o++] = p[1];
                dst[o++] = p[2];
            }
        }
        return out;
    }

    const auto xs = bilinear_taps(src.width(), width);
    const auto ys = bilinear_taps(src.height(), height);
    std::size_t o = 0;
    for (int y = 0; y < height; ++y) {
        const auto& ty = ys[static_cast<std::size_t>(y)];
        const auto* r0 = &in[static_cast<std::size_t>(ty.lo) * in_stride];
        const auto* r1 = &in[static_cast<std::size_t>(ty.hi) * in_stride];
        for (int x = 0; x < width; ++x) {
            const auto& tx = xs[static_cast<std::size_t>(x)];
            const auto a = static_cast<std::size_t>(tx.lo) * 3;
            const auto b = static_cast<std::size_t>(tx.hi) * 3;
            for (std::size_t c = 0; c < 3; ++c) {
                const double top = r0[a + c] * (1.0 - tx.frac) + r0[b + c] * tx.frac;
                const double bottom = r1[a + c] * (1.0 - tx.frac) + r1[b + c] * tx.frac;
                const double v = top * (1.0 - ty.frac) + bottom * ty.frac;
                dst[o++] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
            }
        }
    }
    return out;
}

RgbImage read_png(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw Error(ErrorCode::DecodeError, path.string() + ": " + image.message);
    }
    const auto format = image.format;
    const bool ok = (format & PNG_FORMAT_FLAG_COLOR) && !(format & PNG_FORMAT_FLAG_ALPHA) &&
                    !(format & PNG_FORMAT_FLAG_LINEAR) && !(format & PNG_FORMAT_FLAG_COLORMAP);
    if (!ok) {
        png_image_free(&image);
        throw Error(ErrorCode::DecodeError, path.string() + ": not an 8-bit RGB PNG without alpha");
    }
    image.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
        const std::string message = image.message;
        png_image_free(&image);
        throw Error(ErrorCode::DecodeError, path.string() + ": " + message);
    }
    return RgbImage(static_cast<int>(image.width), static_cast<int>(image.height), std::move(pixels));
}

void write_png(const RgbImage& image, const std::filesystem::path& path) {
    png_image out;
    std::memset(&out, 0, sizeof(out));
    out.version = PNG_IMAGE_VERSION;
    out.width = static_cast<png_uint_32>(image.width());
    out.height = static_cast<png_uint_32>(image.height());
    out.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&out, path.c_str(), 0, image.bytes().data(), 0, nullptr)) {
        throw Error(ErrorCode::IoError, path.string() + ": " + out.message);
    }
}

}  // namespace orange
