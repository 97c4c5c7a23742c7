#include "orange/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "orange/error.hpp"
#include "orange/rng.hpp"

namespace orange {

namespace {

constexpr Rgb kBackground = {16, 16, 20};
constexpr double kBaseColor[3] = {235.0, 125.0, 20.0};
constexpr double kBlemishColor[3] = {58.0, 34.0, 12.0};
// Boundary modulation of a blemish reaches at most 1 + 0.15 + 0.08 of its
// nominal radius.
constexpr double kMaxIrregularity = 1.23;

struct Blemish {
    double cx, cy;
    double radius, aspect, angle;
    double phase3, phase5;
    double shade;
};

Blemish draw_blemish(Rng& rng, double disc_r, double centre, RealRange radius) {
    Blemish b{};
    b.radius = std::min(rng.uniform(radius.lo, radius.hi), disc_r / 2.0);
    const double reach = std::max(0.0, disc_r - b.radius * kMaxIrregularity - 2.0);
    const double dist = reach * std::sqrt(rng.uniform());
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    b.cx = centre + dist * std::cos(theta);
    b.cy = centre + dist * std::sin(theta);
    b.aspect = rng.uniform(0.6, 1.0);
    b.angle = rng.uniform(0.0, std::numbers::pi);
    b.phase3 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    b.phase5 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    b.shade = rng.uniform(0.8, 1.1);
    return b;
}

void stamp(RgbImage& view, const Blemish& b) {
    const double extent = b.radius * kMaxIrregularity + 1.0;
    const int x0 = std::max(0, static_cast<int>(std::floor(b.cx - extent)));
    const int x1 = std::min(view.width() - 1, static_cast<int>(std::ceil(b.cx + extent)));
    const int y0 = std::max(0, static_cast<int>(std::floor(b.cy - extent)));
    const int y1 = std::min(view.height() - 1, static_cast<int>(std::ceil(b.cy + extent)));
    const double ca = std::cos(b.angle), sa = std::sin(b.angle);
    const Rgb colour = {static_cast<std::uint8_t>(std::clamp(kBlemishColor[0] * b.shade, 0.0, 255.0)),
                        static_cast<std::uint8_t>(std::clamp(kBlemishColor[1] * b.shade, 0.0, 255.0)),
                        static_cast<std::uint8_t>(std::clamp(kBlemishColor[2] * b.shade, 0.0, 255.0))};
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = x + 0.5 - b.cx, dy = y + 0.5 - b.cy;
            const double u = (dx * ca + dy * sa) / b.radius;
            const double w = (-dx * sa + dy * ca) / (b.radius * b.aspect);
            const double alpha = std::atan2(w, u);
            const double bound = 1.0 + 0.15 * std::sin(3.0 * alpha + b.phase3) + 0.08 * std::sin(5.0 * alpha + b.phase5);
            if (u * u + w * w < bound * bound) view.set(x, y, colour);
        }
    }
}

RgbImage render_view(int size, const double tint[3], double rotation, double texture_phase) {
    RgbImage view(size, size, kBackground);
    const double centre = size / 2.0, radius = 0.4 * size;
    const double cr = std::cos(rotation), sr = std::sin(rotation);
    const double freq = 0.35 * 300.0 / size;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double dx = x + 0.5 - centre, dy = y + 0.5 - centre;
            const double d2 = (dx * dx + dy * dy) / (radius * radius);
            if (d2 >= 1.0) continue;
            const double nz = std::sqrt(1.0 - d2);
            const double u = dx * cr + dy * sr, w = -dx * sr + dy * cr;
            const double texture = 0.04 * std::sin(freq * u + texture_phase) * std::sin(freq * w);
            const double intensity = 0.58 + 0.42 * nz + texture;
            Rgb c;
            for (int ch = 0; ch < 3; ++ch) {
                c[static_cast<std::size_t>(ch)] =
                    static_cast<std::uint8_t>(std::clamp(std::floor(tint[ch] * intensity + 0.5), 0.0, 255.0));
            }
            view.set(x, y, c);
        }
    }
    return view;
}

std::string sample_id(std::size_t index, std::size_t total) {
    const std::size_t width = std::max<std::size_t>(4, std::to_string(total > 0 ? total - 1 : 0).size());
    std::string digits = std::to_string(index);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return "s" + digits;
}

}  // namespace

double luminance(const Rgb& c) { return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]; }

void SynthConfig::validate() const {
    if (num_samples < 1) throw Error(ErrorCode::InvalidArgument, "num_samples must be >= 1");
    if (views_per_sample < 1 || views_per_sample > 100) {
        throw Error(ErrorCode::InvalidArgument, "views_per_sample must be in 1..100");
    }
    if (view_size < 16) throw Error(ErrorCode::InvalidArgument, "view_size must be >= 16");
    double total = 0.0;
    for (double m : class_mix) {
        if (!(m >= 0.0)) throw Error(ErrorCode::InvalidArgument, "class_mix entries must be non-negative");
        total += m;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "class_mix must sum to 1");
    for (const auto& r : blemish_count) {
        if (r.lo < 0 || r.hi < r.lo) throw Error(ErrorCode::InvalidArgument, "invalid blemish count range");
    }
    if (!(blemish_radius.lo > 0.0) || blemish_radius.hi < blemish_radius.lo) {
        throw Error(ErrorCode::InvalidArgument, "invalid blemish radius range");
    }
    if (!(single_view_concentration >= 0.0 && single_view_concentration <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "single_view_concentration must be in [0, 1]");
    }
}

ClassCounts apportion(std::size_t num_samples, const std::array<double, kNumGrades>& mix) {
    ClassCounts counts{};
    std::array<double, kNumGrades> remainder{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < kNumGrades; ++c) {
        const double quota = mix[c] * static_cast<double>(num_samples);
        counts[c] = static_cast<std::size_t>(std::floor(quota + 1e-9));
        remainder[c] = quota - static_cast<double>(counts[c]);
        assigned += counts[c];
    }
    std::array<std::size_t, kNumGrades> order{};
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < num_samples; ++k, ++assigned) ++counts[order[k % kNumGrades]];
    return counts;
}

SyntheticDataset generate_detailed(const SynthConfig& config) {
    config.validate();
    const auto counts = apportion(config.num_samples, config.class_mix);
    std::vector<GradeLabel> labels;
    for (std::size_t c = 0; c < kNumGrades; ++c) labels.insert(labels.end(), counts[c], grade_from_index(c));
    Rng label_rng(derive_seed(config.seed, 0));
    shuffle(std::span<GradeLabel>(labels), label_rng);

    const int size = config.view_size;
    const int views = config.views_per_sample;
    const double disc_r = 0.4 * size, centre = size / 2.0;
    const std::uint64_t sample_stream = derive_seed(config.seed, 1);
    const RealRange small_radii{config.blemish_radius.lo,
                                config.blemish_radius.lo + (config.blemish_radius.hi - config.blemish_radius.lo) / 3.0};

    SyntheticDataset out;
    for (std::size_t i = 0; i < config.num_samples; ++i) {
        Rng rng(derive_seed(sample_stream, i));
        const GradeLabel label = labels[i];

        double tint[3];
        for (int ch = 0; ch < 3; ++ch) tint[ch] = kBaseColor[ch] + rng.uniform(-12.0, 12.0);
        const double texture_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

        OrangeSample sample;
        sample.id = sample_id(i, config.num_samples);
        sample.label = label;
        for (int v = 0; v < views; ++v) {
            sample.views.push_back(render_view(size, tint, rng.uniform(0.0, 2.0 * std::numbers::pi), texture_phase));
        }

        const auto& range = config.blemish_count[index_of(label)];
        const int n_blemishes = static_cast<int>(rng.range(range.lo, range.hi));
        std::vector<int> view_order(static_cast<std::size_t>(views));
        std::iota(view_order.begin(), view_order.end(), 0);
        shuffle(std::span<int>(view_order), rng);

        std::vector<int> per_view(static_cast<std::size_t>(views), 0);
        const RealRange radii = label == GradeLabel::Undefined ? small_radii : config.blemish_radius;
        for (int k = 0; k < n_blemishes; ++k) {
            const Blemish b = draw_blemish(rng, disc_r, centre, radii);
            const int home = view_order[static_cast<std::size_t>(k % views)];
            for (int v = 0; v < views; ++v) {
                const bool on_view = v == home || rng.uniform() >= config.single_view_concentration;
                if (!on_view) continue;
                stamp(sample.views[static_cast<std::size_t>(v)], b);
                ++per_view[static_cast<std::size_t>(v)];
            }
        }
        out.dataset.add(std::move(sample));
        out.blemishes_per_view.push_back(std::move(per_view));
    }
    return out;
}

Dataset generate(const SynthConfig& config) { return generate_detailed(config).dataset; }

}  // namespace orange
