#include "orange/eval.hpp"

#include <cstdio>

#include "orange/error.hpp"

namespace orange {

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
    std::uint64_t sum = 0;
    for (auto v : counts[truth]) sum += v;
    return sum;
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t sum = 0;
    for (std::size_t c = 0; c < kNumGrades; ++c) sum += counts[c][c];
    return sum;
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t sum = 0;
    for (std::size_t c = 0; c < kNumGrades; ++c) sum += row_sum(c);
    return sum;
}

ConfusionMatrix ConfusionMatrix::from_diagonal(const std::array<std::uint64_t, kNumGrades>& correct,
                                               const std::array<std::uint64_t, kNumGrades>& support) {
    ConfusionMatrix m;
    for (std::size_t c = 0; c < kNumGrades; ++c) {
        if (correct[c] > support[c]) throw Error(ErrorCode::InvalidArgument, "diagonal exceeds support");
        m.counts[c][c] = correct[c];
        m.counts[c][(c + 1) % kNumGrades] = support[c] - correct[c];
    }
    return m;
}

Accuracies metrics_from_confusion(const ConfusionMatrix& confusion) {
    Accuracies out;
    double sum = 0.0;
    for (std::size_t c = 0; c < kNumGrades; ++c) {
        const auto support = confusion.row_sum(c);
        if (support == 0) {
            throw Error(ErrorCode::ZeroSupportRow, std::string(render(grade_from_index(c))));
        }
        out.per_class[c] = 100.0 * static_cast<double>(confusion.counts[c][c]) / static_cast<double>(support);
        sum += out.per_class[c];
    }
    out.average = sum / static_cast<double>(kNumGrades);
    out.overall = 100.0 * static_cast<double>(confusion.trace()) / static_cast<double>(confusion.total());
    return out;
}

std::string EvalMode::label() const {
    return single_view ? "single_view(" + std::to_string(*single_view) + ")" : "multiview";
}

MetricsReport make_report(const ConfusionMatrix& confusion, ArchitectureKind kind, EvalMode mode, bool pretrained) {
    return {confusion, metrics_from_confusion(confusion), kind, std::move(mode), pretrained};
}

MetricsReport evaluate(const ModelHandle& model, const Dataset& test_set, const CollageLayout& layout,
                       const EvalMode& mode) {
    const auto support = class_counts(test_set);
    for (std::size_t c = 0; c < kNumGrades; ++c) {
        if (support[c] == 0) throw Error(ErrorCode::EmptyClassInTestSet, std::string(render(grade_from_index(c))));
    }
    ConfusionMatrix confusion;
    for (const auto& sample : test_set) {
        const auto collage = mode.single_view ? compose_collage(select_single_view(sample, *mode.single_view), layout)
                                              : compose_collage(sample, layout);
        confusion.add(sample.label, predict(model, collage).label);
    }
    return make_report(confusion, model.kind(), mode, model.pretrained());
}

std::string render_table(const std::vector<MetricsReport>& reports, const std::string& title) {
    std::string out;
    if (!title.empty()) out += title + "\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-12s %8s %8s %11s %8s %8s\n", "", "Bueno", "Malo", "Indefinido", "Avg.",
                  "Overall");
    out += line;
    for (const auto& r : reports) {
        const auto& a = r.accuracy;
        std::snprintf(line, sizeof(line), "%-12s %8.2f %8.2f %11.2f %8.2f %8.2f\n",
                      std::string(display_name(r.model_kind)).c_str(), a.per_class[0], a.per_class[1],
                      a.per_class[2], a.average, a.overall);
        out += line;
    }
    return out;
}

nlohmann::json report_to_json(const MetricsReport& report) {
    nlohmann::json confusion = nlohmann::json::array();
    for (const auto& row : report.confusion.counts) confusion.push_back(row);
    nlohmann::json per_class = nlohmann::json::object();
    for (std::size_t c = 0; c < kNumGrades; ++c) {
        per_class[std::string(render(grade_from_index(c)))] = report.accuracy.per_class[c];
    }
    return {
        {"model", to_string(report.model_kind)},
        {"mode", report.mode.label()},
        {"pretrained", report.pretrained},
        {"class_order", {"good", "bad", "undefined"}},
        {"confusion", confusion},
        {"per_class", per_class},
        {"average", report.accuracy.average},
        {"overall", report.accuracy.overall},
    };
}

}  // namespace orange
