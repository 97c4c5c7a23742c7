#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace orange {

using Rgb = std::array<std::uint8_t, 3>;

// 8-bit RGB raster, row-major, interleaved channels. Always exactly three
// channels; there is no alpha.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height, Rgb fill = {0, 0, 0});
    RgbImage(int width, int height, std::vector<std::uint8_t> pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return pixels_.empty(); }

    std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }
    std::span<std::uint8_t> bytes() noexcept { return pixels_; }

    Rgb at(int x, int y) const {
        const auto* p = &pixels_[offset(x, y)];
        return {p[0], p[1], p[2]};
    }
    void set(int x, int y, Rgb c) {
        auto* p = &pixels_[offset(x, y)];
        p[0] = c[0];
        p[1] = c[1];
        p[2] = c[2];
    }

    // Copies `src` with its top-left corner at (x, y); clipped to bounds.
    void paste(const RgbImage& src, int x, int y);

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

enum class Interpolation { Bilinear, Nearest };

// Half-pixel-centred resampling (the convention of OpenCV INTER_LINEAR /
// INTER_NEAREST_EXACT without antialiasing). Same-size resize is a copy.
RgbImage resize(const RgbImage& src, int width, int height, Interpolation mode);

// PNG codec limited to 8-bit RGB. Decoding rejects alpha, palette, grey and
// 16-bit images with DecodeError.
RgbImage read_png(const std::filesystem::path& path);
void write_png(const RgbImage& image, const std::filesystem::path& path);

}  // namespace orange
