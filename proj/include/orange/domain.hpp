#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "orange/image.hpp"

namespace orange {

// Quality grade. The numeric value is the class index used by confusion
// matrices, reports and model outputs.
enum class GradeLabel : int { Good = 0, Bad = 1, Undefined = 2 };

inline constexpr std::size_t kNumGrades = 3;
inline constexpr std::array<GradeLabel, kNumGrades> kAllGrades = {
    GradeLabel::Good, GradeLabel::Bad, GradeLabel::Undefined};

// Accepts good/bad/undefined and bueno/malo/indefinido in any case, with
// surrounding whitespace trimmed. Throws UnknownLabel otherwise.
GradeLabel parse_grade(std::string_view text);

// Canonical English lowercase name.
std::string_view render(GradeLabel label);

// Spanish name, as used in report column headers.
std::string_view spanish_name(GradeLabel label);

constexpr std::size_t index_of(GradeLabel label) { return static_cast<std::size_t>(label); }
GradeLabel grade_from_index(std::size_t index);

struct OrangeSample {
    std::string id;
    std::vector<RgbImage> views;  // acquisition order
    GradeLabel label = GradeLabel::Good;

    friend bool operator==(const OrangeSample&, const OrangeSample&) = default;
};

// Throws InvalidArgument if the sample has no views or an empty view.
void validate_sample(const OrangeSample& sample);

class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<OrangeSample> samples);

    // Appends a sample; throws DuplicateSampleId on id collision.
    void add(OrangeSample sample);

    const std::vector<OrangeSample>& samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    const OrangeSample& operator[](std::size_t i) const { return samples_[i]; }

    auto begin() const { return samples_.begin(); }
    auto end() const { return samples_.end(); }

    friend bool operator==(const Dataset& a, const Dataset& b) { return a.samples_ == b.samples_; }

private:
    std::vector<OrangeSample> samples_;
    std::unordered_set<std::string> ids_;
};

using ClassCounts = std::array<std::size_t, kNumGrades>;

ClassCounts class_counts(const Dataset& dataset);

struct Collage {
    RgbImage pixels;
    std::string source_id;
    int view_count = 0;
};

}  // namespace orange
