// Reference computations used by the tests. Everything here is written from
// first principles and shares no code with the library beyond its value types.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "orange/domain.hpp"
#include "orange/image.hpp"

namespace oracle {

// ------------------------------------------------------------ rationals

// Train count for a class of size n at fraction p/q with half-up rounding,
// in exact integer arithmetic: floor(n * p / q + 1/2) = floor((2np + q) / 2q).
inline std::size_t train_count_rational(std::size_t n, std::uint64_t p, std::uint64_t q) {
    return static_cast<std::size_t>((2 * n * p + q) / (2 * q));
}

// ------------------------------------------------------------ metrics

struct ExactMetrics {
    std::array<long double, 3> per_class;
    long double average;
    long double overall;
};

inline ExactMetrics metrics(const std::array<std::array<std::uint64_t, 3>, 3>& counts) {
    ExactMetrics m{};
    std::uint64_t trace = 0, total = 0;
    long double sum = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        std::uint64_t row = 0;
        for (auto v : counts[c]) row += v;
        m.per_class[c] = 100.0L * static_cast<long double>(counts[c][c]) / static_cast<long double>(row);
        sum += m.per_class[c];
        trace += counts[c][c];
        total += row;
    }
    m.average = sum / 3.0L;
    m.overall = 100.0L * static_cast<long double>(trace) / static_cast<long double>(total);
    return m;
}

// ------------------------------------------------------------ cross-entropy

// Mean negative log-likelihood in long double using the direct definition
// log(sum exp(z_j)) - z_t, shifted by the row max only to stay in range.
inline long double cross_entropy(const std::vector<std::vector<double>>& logits, const std::vector<std::size_t>& targets) {
    long double total = 0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        long double mx = logits[i][0];
        for (double z : logits[i]) mx = std::max<long double>(mx, z);
        long double s = 0;
        for (double z : logits[i]) s += std::exp(static_cast<long double>(z) - mx);
        total += std::log(s) + mx - static_cast<long double>(logits[i][targets[i]]);
    }
    return total / static_cast<long double>(logits.size());
}

// ------------------------------------------------------------ images

// 4-connected components of pixels satisfying `in`, by flood fill.
template <typename Pred>
int count_components(const orange::RgbImage& img, Pred in) {
    const int w = img.width(), h = img.height();
    std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
    int components = 0;
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (seen[y * w + x] || !in(img.at(x, y))) continue;
            ++components;
            stack.push_back({x, y});
            seen[y * w + x] = 1;
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                const int nx[4] = {cx - 1, cx + 1, cx, cx};
                const int ny[4] = {cy, cy, cy - 1, cy + 1};
                for (int k = 0; k < 4; ++k) {
                    if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
                    if (seen[ny[k] * w + nx[k]] || !in(img.at(nx[k], ny[k]))) continue;
                    seen[ny[k] * w + nx[k]] = 1;
                    stack.push_back({nx[k], ny[k]});
                }
            }
        }
    }
    return components;
}

inline double luma(const orange::Rgb& c) { return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]; }

// ------------------------------------------------------------ architectures

struct Entry {
    std::string name;
    std::vector<std::size_t> shape;
};
using Manifest = std::vector<Entry>;

inline std::size_t count(const Manifest& m) {
    std::size_t total = 0;
    for (const auto& e : m) {
        total += std::accumulate(e.shape.begin(), e.shape.end(), std::size_t{1}, std::multiplies<>());
    }
    return total;
}

// ResNet-18 trainable parameters from the architecture table: a 7x7/2 stem
// without bias, then stages conv2_x..conv5_x of two basic blocks each, a
// 1x1 projection shortcut where the channel count changes, and a linear head.
inline Manifest resnet18_parameters(std::size_t classes) {
    Manifest m;
    auto conv = [&](const std::string& n, std::size_t out, std::size_t in, std::size_t k) {
        m.push_back({n + ".weight", {out, in, k, k}});
    };
    auto bn = [&](const std::string& n, std::size_t c) {
        m.push_back({n + ".weight", {c}});
        m.push_back({n + ".bias", {c}});
    };
    conv("conv1", 64, 3, 7);
    bn("bn1", 64);
    const std::size_t widths[4] = {64, 128, 256, 512};
    std::size_t in = 64;
    for (int stage = 0; stage < 4; ++stage) {
        const std::size_t out = widths[stage];
        for (int block = 0; block < 2; ++block) {
            const std::string p = "layer" + std::to_string(stage + 1) + "." + std::to_string(block) + ".";
            const std::size_t block_in = block == 0 ? in : out;
            conv(p + "conv1", out, block_in, 3);
            bn(p + "bn1", out);
            conv(p + "conv2", out, out, 3);
            bn(p + "bn2", out);
            if (block == 0 && stage > 0) {
                conv(p + "downsample.0", out, block_in, 1);
                bn(p + "downsample.1", out);
            }
        }
        in = out;
    }
    m.push_back({"fc.weight", {classes, 512}});
    m.push_back({"fc.bias", {classes}});
    return m;
}

inline Manifest resnet18_buffers() {
    Manifest m;
    auto bn = [&](const std::string& n, std::size_t c) {
        m.push_back({n + ".running_mean", {c}});
        m.push_back({n + ".running_var", {c}});
    };
    bn("bn1", 64);
    const std::size_t widths[4] = {64, 128, 256, 512};
    for (int stage = 0; stage < 4; ++stage) {
        for (int block = 0; block < 2; ++block) {
            const std::string p = "layer" + std::to_string(stage + 1) + "." + std::to_string(block) + ".";
            bn(p + "bn1", widths[stage]);
            bn(p + "bn2", widths[stage]);
            if (block == 0 && stage > 0) bn(p + "downsample.1", widths[stage]);
        }
    }
    return m;
}

// SqueezeNet fire configuration (squeeze, expand1x1, expand3x3) and the
// feature-list index of each fire module. v1.1: 3x3/2 stem with 64 maps,
// pools after features 2, 5 and 8. v1.0: 7x7/2 stem with 96 maps, pools
// after features 2, 6 and 11.
inline Manifest squeezenet_parameters(bool v1_1, std::size_t classes) {
    Manifest m;
    auto conv = [&](const std::string& n, std::size_t out, std::size_t in, std::size_t k) {
        m.push_back({n + ".weight", {out, in, k, k}});
        m.push_back({n + ".bias", {out}});
    };
    const std::array<std::array<std::size_t, 3>, 8> fires = {{{16, 64, 64},
                                                              {16, 64, 64},
                                                              {32, 128, 128},
                                                              {32, 128, 128},
                                                              {48, 192, 192},
                                                              {48, 192, 192},
                                                              {64, 256, 256},
                                                              {64, 256, 256}}};
    const std::array<int, 8> index_v11 = {3, 4, 6, 7, 9, 10, 11, 12};
    const std::array<int, 8> index_v10 = {3, 4, 5, 7, 8, 9, 10, 12};
    std::size_t in = v1_1 ? 64 : 96;
    conv("features.0", in, 3, v1_1 ? 3 : 7);
    for (std::size_t f = 0; f < 8; ++f) {
        const std::string p = "features." + std::to_string(v1_1 ? index_v11[f] : index_v10[f]) + ".";
        conv(p + "squeeze", fires[f][0], in, 1);
        conv(p + "expand1x1", fires[f][1], fires[f][0], 1);
        conv(p + "expand3x3", fires[f][2], fires[f][0], 3);
        in = fires[f][1] + fires[f][2];
    }
    conv("classifier.1", classes, 512, 1);
    return m;
}

}  // namespace oracle
