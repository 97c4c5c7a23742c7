#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "orange/domain.hpp"

namespace orange {

struct IntRange {
    int lo = 0;
    int hi = 0;
};

struct RealRange {
    double lo = 0.0;
    double hi = 0.0;
};

// Procedural multi-view orange generator.
//
// Each sample is a shaded orange disc (radius 0.4 * view_size) on a dark
// background with a per-sample tint, re-rendered per view under a random
// rotation of a fine peel texture. Blemishes are dark irregular ellipses.
// A sample of class c gets blemish_count[c] blemishes; Undefined draws radii
// from the lower third of blemish_radius, Bad from the whole range. Each
// blemish has one home view (distinct views while there are enough) and is
// additionally stamped on every other view with probability
// 1 - single_view_concentration.
struct SynthConfig {
    std::size_t num_samples = 0;
    int views_per_sample = 8;
    int view_size = 300;
    std::array<double, kNumGrades> class_mix = {111.0 / 452.0, 294.0 / 452.0, 47.0 / 452.0};
    std::array<IntRange, kNumGrades> blemish_count = {IntRange{0, 0}, IntRange{2, 6}, IntRange{1, 2}};
    RealRange blemish_radius = {8.0, 30.0};
    double single_view_concentration = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Skin pixels darker than this are blemish; clean skin never is.
inline constexpr double kBlemishLuminance = 50.0;

double luminance(const Rgb& c);

// Largest-remainder apportionment of num_samples over class_mix; ties go to
// the lower class index.
ClassCounts apportion(std::size_t num_samples, const std::array<double, kNumGrades>& mix);

struct SyntheticDataset {
    Dataset dataset;
    // blemishes_per_view[sample][view]: blemishes stamped on that view.
    std::vector<std::vector<int>> blemishes_per_view;
};

SyntheticDataset generate_detailed(const SynthConfig& config);
Dataset generate(const SynthConfig& config);

}  // namespace orange
