#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "orange/collage.hpp"
#include "orange/eval.hpp"
#include "orange/model.hpp"
#include "orange/split.hpp"
#include "orange/train.hpp"

namespace orange {

inline constexpr int kPlanSchemaVersion = 1;

// Environment variable naming a directory holding <architecture>.weights
// backbone archives, used when a plan or command gives no explicit path.
inline constexpr const char* kWeightsDirEnv = "ORANGE_WEIGHTS_DIR";

// The experiment grid: every (model, mode, pretrained) combination is
// trained on the split's train half and evaluated on its test half.
struct ExperimentPlan {
    std::filesystem::path dataset_root;
    std::filesystem::path output_dir;
    std::vector<ArchitectureKind> models = {ArchitectureKind::ResNet18, ArchitectureKind::SqueezeNet};
    std::vector<EvalMode> modes = {EvalMode{}, EvalMode{0}};
    std::vector<bool> pretrained = {false};
    std::map<ArchitectureKind, std::filesystem::path> pretrained_weights;
    nn::SqueezeNetVersion squeezenet_version = nn::SqueezeNetVersion::V1_1;
    SplitSpec split;
    TrainConfig train;
    CollageLayout layout;

    void validate() const;
};

// JSON (de)serialization. Parsing is strict: unknown keys, wrong types and
// a schema_version other than kPlanSchemaVersion throw MalformedPlan.
// Relative paths in a plan file resolve against the file's directory.
ExperimentPlan plan_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json plan_to_json(const ExperimentPlan& plan);
ExperimentPlan load_plan(const std::filesystem::path& path);

CollageLayout layout_from_json(const nlohmann::json& doc);
nlohmann::json layout_to_json(const CollageLayout& layout);
TrainConfig train_config_from_json(const nlohmann::json& doc);
nlohmann::json train_config_to_json(const TrainConfig& config);

// Explicit path if present, else $ORANGE_WEIGHTS_DIR/<architecture>.weights
// if that file exists.
std::optional<std::filesystem::path> resolve_pretrained_weights(
    const std::optional<std::filesystem::path>& explicit_path, const std::string& architecture_name);

// "multiview" or "single-view<i>", used in file names.
std::string mode_slug(const EvalMode& mode);

struct CellOutcome {
    ArchitectureKind model;
    EvalMode mode;
    bool pretrained;
    std::string status;  // "ok", "skipped", "failed", "not_run"
    std::string message;
    std::optional<MetricsReport> report;
};

struct ExperimentSummary {
    std::vector<CellOutcome> cells;
    bool failed = false;

    std::vector<MetricsReport> reports() const;
};

// Runs the grid in plan order (models, then modes, then pretrained
// settings). Pretrained cells without a weight archive are skipped with a
// warning. The first failing cell stops the remaining ones. Writes, under
// output_dir: split/{train,test}.csv, logs/<cell>.log,
// reports/<cell>.json, tables/<mode>_<scratch|pretrained>.{txt,json} and
// summary.json.
ExperimentSummary run_experiment(const ExperimentPlan& plan, std::ostream& log);

}  // namespace orange
