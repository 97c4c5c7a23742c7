#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "orange/collage.hpp"
#include "orange/domain.hpp"
#include "orange/model.hpp"

namespace orange {

// counts[true][predicted], class order Good, Bad, Undefined.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, kNumGrades>, kNumGrades> counts{};

    void add(GradeLabel truth, GradeLabel predicted) { ++counts[index_of(truth)][index_of(predicted)]; }
    std::uint64_t row_sum(std::size_t truth) const;
    std::uint64_t trace() const;
    std::uint64_t total() const;

    // Builds a matrix with the given diagonal and supports, putting each
    // row's misclassifications in the next class (cyclically).
    static ConfusionMatrix from_diagonal(const std::array<std::uint64_t, kNumGrades>& correct,
                                         const std::array<std::uint64_t, kNumGrades>& support);

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Percentages. per_class is recall: 100 * counts[c][c] / row_sum(c).
struct Accuracies {
    std::array<double, kNumGrades> per_class{};
    double average = 0.0;  // unweighted mean of per_class
    double overall = 0.0;  // 100 * trace / total
};

// Throws ZeroSupportRow if any class has no samples.
Accuracies metrics_from_confusion(const ConfusionMatrix& confusion);

struct EvalMode {
    std::optional<std::size_t> single_view;  // absent: multiview

    std::string label() const;  // "multiview" / "single_view(i)"
    friend bool operator==(const EvalMode&, const EvalMode&) = default;
};

struct MetricsReport {
    ConfusionMatrix confusion;
    Accuracies accuracy;
    ArchitectureKind model_kind = ArchitectureKind::ResNet18;
    EvalMode mode;
    bool pretrained = false;
};

MetricsReport make_report(const ConfusionMatrix& confusion, ArchitectureKind kind, EvalMode mode, bool pretrained);

// Predicts every sample of test_set (single-view selection first in
// ablation mode) and scores the predictions. Throws EmptyClassInTestSet when
// any class is missing from test_set.
MetricsReport evaluate(const ModelHandle& model, const Dataset& test_set, const CollageLayout& layout,
                       const EvalMode& mode);

// Text table with columns Bueno / Malo / Indefinido / Avg. / Overall,
// percentages to two decimals. An empty list yields the header only.
std::string render_table(const std::vector<MetricsReport>& reports, const std::string& title = "");

nlohmann::json report_to_json(const MetricsReport& report);

}  // namespace orange
