// Published multiview / single-view / scratch scores for the 452-orange
// dataset, and its test-set supports.
#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace reference {

inline constexpr std::array<std::uint64_t, 3> kTestSupport = {33, 88, 14};
inline constexpr std::array<std::uint64_t, 3> kTrainSupport = {78, 206, 33};

struct ScoreRow {
    const char* table;
    const char* model;
    std::array<double, 3> per_class;
    double average;
    double overall;
};

inline constexpr std::array<ScoreRow, 6> kScoreRows = {{
    {"multiview", "ResNet-18", {57.60, 87.50, 21.40}, 55.50, 73.30},
    {"multiview", "SqueezeNet", {72.70, 80.70, 21.40}, 58.30, 72.60},
    {"single view", "ResNet-18", {39.40, 88.60, 7.10}, 45.10, 68.10},
    {"single view", "SqueezeNet", {42.40, 94.30, 0.00}, 45.60, 71.90},
    {"scratch multiview", "ResNet-18", {57.60, 90.90, 0.00}, 49.50, 73.30},
    {"scratch multiview", "SqueezeNet", {0.00, 100.00, 0.00}, 33.30, 65.20},
}};

}  // namespace reference
