#include "orange/domain.hpp"

#include <algorithm>
#include <cctype>

#include "orange/error.hpp"

namespace orange {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownLabel: return "UnknownLabel";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::MalformedHeader: return "MalformedHeader";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::DuplicateSampleId: return "DuplicateSampleId";
        case ErrorCode::MissingViewFile: return "MissingViewFile";
        case ErrorCode::DecodeError: return "DecodeError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ViewIndexOutOfRange: return "ViewIndexOutOfRange";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::WeightsFileMissing: return "WeightsFileMissing";
        case ErrorCode::WeightShapeMismatch: return "WeightShapeMismatch";
        case ErrorCode::MalformedArchive: return "MalformedArchive";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::EmptyTrainSet: return "EmptyTrainSet";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::EmptyClassInTestSet: return "EmptyClassInTestSet";
        case ErrorCode::ZeroSupportRow: return "ZeroSupportRow";
        case ErrorCode::MalformedPlan: return "MalformedPlan";
    }
    return "Unknown";
}

GradeLabel parse_grade(std::string_view text) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    std::string_view trimmed = text;
    while (!trimmed.empty() && is_space(trimmed.front())) trimmed.remove_prefix(1);
    while (!trimmed.empty() && is_space(trimmed.back())) trimmed.remove_suffix(1);

    std::string lower(trimmed);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

    if (lower == "good" || lower == "bueno") return GradeLabel::Good;
    if (lower == "bad" || lower == "malo") return GradeLabel::Bad;
    if (lower == "undefined" || lower == "indefinido") return GradeLabel::Undefined;
    throw Error(ErrorCode::UnknownLabel, "'" + std::string(text) + "'");
}

std::string_view render(GradeLabel label) {
    switch (label) {
        case GradeLabel::Good: return "good";
        case GradeLabel::Bad: return "bad";
        case GradeLabel::Undefined: return "undefined";
    }
    return "undefined";
}

std::string_view spanish_name(GradeLabel label) {
    switch (label) {
        case GradeLabel::Good: return "Bueno";
        case GradeLabel::Bad: return "Malo";
        case GradeLabel::Undefined: return "Indefinido";
    }
    return "Indefinido";
}

GradeLabel grade_from_index(std::size_t index) {
    if (index >= kNumGrades) {
        throw Error(ErrorCode::InvalidArgument, "class index " + std::to_string(index));
    }
    return static_cast<GradeLabel>(index);
}

void validate_sample(const OrangeSample& sample) {
    if (sample.views.empty()) {
        throw Error(ErrorCode::InvalidArgument, "sample '" + sample.id + "' has no views");
    }
    for (const auto& view : sample.views) {
        if (view.width() < 1 || view.height() < 1) {
            throw Error(ErrorCode::InvalidArgument, "sample '" + sample.id + "' has an empty view");
        }
    }
}

Dataset::Dataset(std::vector<OrangeSample> samples) {
    samples_.reserve(samples.size());
    for (auto& s : samples) add(std::move(s));
}

void Dataset::add(OrangeSample sample) {
    validate_sample(sample);
    if (!ids_.insert(sample.id).second) {
        throw Error(ErrorCode::DuplicateSampleId, "'" + sample.id + "'");
    }
    samples_.push_back(std::move(sample));
}

ClassCounts class_counts(const Dataset& dataset) {
    ClassCounts counts{};
    for (const auto& s : dataset) ++counts[index_of(s.label)];
    return counts;
}

}  // namespace orange
