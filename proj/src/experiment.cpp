#include "orange/experiment.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>

#include "orange/error.hpp"
#include "orange/ingest.hpp"
#include "orange/weights.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace orange {

namespace {

[[noreturn]] void bad_plan(const std::string& what) { throw Error(ErrorCode::MalformedPlan, what); }

void expect_object(const json& doc, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!doc.is_object()) bad_plan(where + " must be an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : doc.items()) {
        if (!keys.count(key)) bad_plan("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T get(const json& doc, const char* key, const std::string& where) {
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        bad_plan(where + "." + key + ": " + e.what());
    }
}

template <typename T>
void get_optional(const json& doc, const char* key, const std::string& where, T& out) {
    if (doc.contains(key)) out = get<T>(doc, key, where);
}

std::string pretrained_slug(bool pretrained) { return pretrained ? "pretrained" : "scratch"; }

std::string cell_name(ArchitectureKind model, const EvalMode& mode, bool pretrained) {
    return std::string(to_string(model)) + "_" + mode_slug(mode) + "_" + pretrained_slug(pretrained);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, path.string());
}

std::string status_text(const CellOutcome& cell) {
    return cell_name(cell.model, cell.mode, cell.pretrained) + ": " + cell.status +
           (cell.message.empty() ? "" : " (" + cell.message + ")");
}

}  // namespace

void ExperimentPlan::validate() const {
    if (models.empty() || modes.empty() || pretrained.empty()) {
        throw Error(ErrorCode::MalformedPlan, "plan needs at least one model, mode and pretrained setting");
    }
    if (dataset_root.empty()) throw Error(ErrorCode::MalformedPlan, "plan has no dataset");
    if (output_dir.empty()) throw Error(ErrorCode::MalformedPlan, "plan has no output_dir");
    split.validate();
    train.validate();
    layout.validate();
}

CollageLayout layout_from_json(const json& doc) {
    expect_object(doc, "layout",
                  {"rows", "tile_size", "final_width", "final_height", "pad_color", "interpolation", "pad_to_final"});
    CollageLayout layout;
    get_optional(doc, "rows", "layout", layout.rows);
    get_optional(doc, "tile_size", "layout", layout.tile_size);
    get_optional(doc, "final_width", "layout", layout.final_width);
    get_optional(doc, "final_height", "layout", layout.final_height);
    get_optional(doc, "pad_color", "layout", layout.pad_color);
    get_optional(doc, "pad_to_final", "layout", layout.pad_to_final);
    if (doc.contains("interpolation")) {
        const auto mode = get<std::string>(doc, "interpolation", "layout");
        if (mode == "bilinear") {
            layout.interpolation = Interpolation::Bilinear;
        } else if (mode == "nearest") {
            layout.interpolation = Interpolation::Nearest;
        } else {
            bad_plan("layout.interpolation must be 'bilinear' or 'nearest'");
        }
    }
    return layout;
}

json layout_to_json(const CollageLayout& layout) {
    return {{"rows", layout.rows},
            {"tile_size", layout.tile_size},
            {"final_width", layout.final_width},
            {"final_height", layout.final_height},
            {"pad_color", layout.pad_color},
            {"interpolation", layout.interpolation == Interpolation::Bilinear ? "bilinear" : "nearest"},
            {"pad_to_final", layout.pad_to_final}};
}

TrainConfig train_config_from_json(const json& doc) {
    expect_object(doc, "train",
                  {"epochs", "batch_size", "learning_rate", "optimizer", "lr_schedule", "momentum", "weight_decay",
                   "seed", "class_weighting"});
    TrainConfig config;
    get_optional(doc, "epochs", "train", config.epochs);
    get_optional(doc, "batch_size", "train", config.batch_size);
    get_optional(doc, "learning_rate", "train", config.learning_rate);
    get_optional(doc, "momentum", "train", config.momentum);
    get_optional(doc, "weight_decay", "train", config.weight_decay);
    get_optional(doc, "seed", "train", config.seed);
    get_optional(doc, "class_weighting", "train", config.class_weighting);
    if (doc.contains("optimizer")) {
        try {
            config.optimizer = parse_optimizer(get<std::string>(doc, "optimizer", "train"));
        } catch (const Error& e) {
            bad_plan(e.what());
        }
    }
    if (doc.contains("lr_schedule")) {
        try {
            config.lr_schedule = parse_lr_schedule(get<std::string>(doc, "lr_schedule", "train"));
        } catch (const Error& e) {
            bad_plan(e.what());
        }
    }
    return config;
}

json train_config_to_json(const TrainConfig& config) {
    json doc = {{"epochs", config.epochs},
                {"batch_size", config.batch_size},
                {"learning_rate", config.learning_rate},
                {"optimizer", to_string(config.optimizer)},
                {"lr_schedule", to_string(config.lr_schedule)},
                {"momentum", config.momentum},
                {"weight_decay", config.weight_decay},
                {"seed", config.seed},
                {"class_weighting", config.class_weighting}};
    if (config.single_view) doc["single_view"] = *config.single_view;
    return doc;
}

ExperimentPlan plan_from_json(const json& doc, const fs::path& base_dir) {
    expect_object(doc, "plan",
                  {"schema_version", "dataset", "output_dir", "models", "modes", "view_index", "pretrained",
                   "pretrained_weights", "squeezenet_version", "split", "train", "layout"});
    const auto version = get<int>(doc, "schema_version", "plan");
    if (version != kPlanSchemaVersion) bad_plan("unsupported schema_version " + std::to_string(version));

    auto resolve = [&](const fs::path& p) { return p.is_relative() && !base_dir.empty() ? base_dir / p : p; };

    ExperimentPlan plan;
    plan.dataset_root = resolve(get<std::string>(doc, "dataset", "plan"));
    plan.output_dir = resolve(get<std::string>(doc, "output_dir", "plan"));

    if (doc.contains("models")) {
        plan.models.clear();
        for (const auto& name : get<std::vector<std::string>>(doc, "models", "plan")) {
            try {
                plan.models.push_back(parse_architecture(name));
            } catch (const Error& e) {
                bad_plan(e.what());
            }
        }
    }
    std::size_t view_index = 0;
    get_optional(doc, "view_index", "plan", view_index);
    if (doc.contains("modes")) {
        plan.modes.clear();
        for (const auto& name : get<std::vector<std::string>>(doc, "modes", "plan")) {
            if (name == "multiview") {
                plan.modes.push_back(EvalMode{});
            } else if (name == "single-view") {
                plan.modes.push_back(EvalMode{view_index});
            } else {
                bad_plan("mode must be 'multiview' or 'single-view', got '" + name + "'");
            }
        }
    } else {
        plan.modes = {EvalMode{}, EvalMode{view_index}};
    }
    if (doc.contains("pretrained")) plan.pretrained = get<std::vector<bool>>(doc, "pretrained", "plan");
    if (doc.contains("pretrained_weights")) {
        const auto& weights = doc.at("pretrained_weights");
        expect_object(weights, "pretrained_weights", {"resnet18", "squeezenet"});
        for (const auto& [key, value] : weights.items()) {
            if (!value.is_string()) bad_plan("pretrained_weights." + key + " must be a path");
            plan.pretrained_weights[parse_architecture(key)] = resolve(value.get<std::string>());
        }
    }
    if (doc.contains("squeezenet_version")) {
        const auto v = get<std::string>(doc, "squeezenet_version", "plan");
        if (v == "1.0") {
            plan.squeezenet_version = nn::SqueezeNetVersion::V1_0;
        } else if (v != "1.1") {
            bad_plan("squeezenet_version must be '1.0' or '1.1'");
        }
    }
    if (doc.contains("split")) {
        const auto& s = doc.at("split");
        expect_object(s, "split", {"train_fraction", "seed"});
        get_optional(s, "train_fraction", "split", plan.split.train_fraction);
        get_optional(s, "seed", "split", plan.split.seed);
    }
    if (doc.contains("train")) plan.train = train_config_from_json(doc.at("train"));
    if (doc.contains("layout")) plan.layout = layout_from_json(doc.at("layout"));

    try {
        plan.validate();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MalformedPlan) throw;
        bad_plan(e.what());
    }
    return plan;
}

json plan_to_json(const ExperimentPlan& plan) {
    json models = json::array();
    for (auto m : plan.models) models.push_back(to_string(m));
    json modes = json::array();
    std::size_t view_index = 0;
    for (const auto& m : plan.modes) {
        modes.push_back(m.single_view ? "single-view" : "multiview");
        if (m.single_view) view_index = *m.single_view;
    }
    json weights = json::object();
    for (const auto& [kind, path] : plan.pretrained_weights) weights[std::string(to_string(kind))] = path.string();
    return {{"schema_version", kPlanSchemaVersion},
            {"dataset", plan.dataset_root.string()},
            {"output_dir", plan.output_dir.string()},
            {"models", models},
            {"modes", modes},
            {"view_index", view_index},
            {"pretrained", plan.pretrained},
            {"pretrained_weights", weights},
            {"squeezenet_version", plan.squeezenet_version == nn::SqueezeNetVersion::V1_0 ? "1.0" : "1.1"},
            {"split", {{"train_fraction", plan.split.train_fraction}, {"seed", plan.split.seed}}},
            {"train", train_config_to_json(plan.train)},
            {"layout", layout_to_json(plan.layout)}};
}

ExperimentPlan load_plan(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingFile, path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        bad_plan(path.string() + ": " + e.what());
    }
    return plan_from_json(doc, path.parent_path());
}

std::optional<fs::path> resolve_pretrained_weights(const std::optional<fs::path>& explicit_path,
                                                   const std::string& architecture_name) {
    if (explicit_path) return explicit_path;
    if (const char* dir = std::getenv(kWeightsDirEnv); dir && *dir) {
        const fs::path candidate = fs::path(dir) / (architecture_name + ".weights");
        if (fs::is_regular_file(candidate)) return candidate;
    }
    return std::nullopt;
}

std::string mode_slug(const EvalMode& mode) {
    return mode.single_view ? "single-view" + std::to_string(*mode.single_view) : "multiview";
}

std::vector<MetricsReport> ExperimentSummary::reports() const {
    std::vector<MetricsReport> out;
    for (const auto& c : cells) {
        if (c.report) out.push_back(*c.report);
    }
    return out;
}

ExperimentSummary run_experiment(const ExperimentPlan& plan, std::ostream& log) {
    plan.validate();
    for (const auto* sub : {"split", "logs", "reports", "tables"}) fs::create_directories(plan.output_dir / sub);

    const Dataset dataset = load_dataset(plan.dataset_root);
    const SplitResult split = stratified_split(dataset, plan.split);
    write_manifest(manifest_rows(split.train), plan.output_dir / "split" / "train.csv");
    write_manifest(manifest_rows(split.test), plan.output_dir / "split" / "test.csv");
    log << "dataset: " << dataset.size() << " samples, train " << split.train.size() << ", test "
        << split.test.size() << '\n';

    ExperimentSummary summary;
    for (auto model_kind : plan.models) {
        for (const auto& mode : plan.modes) {
            for (bool pretrained : plan.pretrained) {
                CellOutcome cell{model_kind, mode, pretrained, "not_run", "", std::nullopt};
                if (summary.failed) {
                    summary.cells.push_back(std::move(cell));
                    continue;
                }
                const auto name = cell_name(model_kind, mode, pretrained);
                const auto arch = model_kind == ArchitectureKind::SqueezeNet &&
                                          plan.squeezenet_version == nn::SqueezeNetVersion::V1_0
                                      ? std::string("squeezenet1_0")
                                      : model_kind == ArchitectureKind::SqueezeNet ? std::string("squeezenet1_1")
                                                                                   : std::string("resnet18");
                std::optional<fs::path> weights;
                if (pretrained) {
                    const auto it = plan.pretrained_weights.find(model_kind);
                    weights = resolve_pretrained_weights(
                        it == plan.pretrained_weights.end() ? std::nullopt : std::optional<fs::path>(it->second), arch);
                    if (!weights) {
                        cell.status = "skipped";
                        cell.message = "no pretrained weight archive configured";
                        log << "warning: " << status_text(cell) << '\n';
                        summary.cells.push_back(std::move(cell));
                        continue;
                    }
                }
                try {
                    log << "cell " << name << '\n';
                    TrainConfig config = plan.train;
                    config.single_view = mode.single_view;
                    auto model = build_model(model_kind, kNumGrades, pretrained, weights, plan.train.seed,
                                             plan.squeezenet_version);
                    std::ofstream cell_log(plan.output_dir / "logs" / (name + ".log"), std::ios::trunc);
                    auto trained = train(std::move(model), split.train, plan.layout, config, &cell_log);
                    auto report = evaluate(trained.model, split.test, plan.layout, mode);

                    json doc = report_to_json(report);
                    doc["seed"] = plan.train.seed;
                    doc["split_seed"] = plan.split.seed;
                    doc["train_size"] = split.train.size();
                    doc["test_size"] = split.test.size();
                    doc["config"] = plan_to_json(plan);
                    write_text(plan.output_dir / "reports" / (name + ".json"), doc.dump(2) + "\n");
                    log << render_table({report});
                    cell.status = "ok";
                    cell.report = std::move(report);
                } catch (const std::exception& e) {
                    cell.status = "failed";
                    cell.message = e.what();
                    summary.failed = true;
                    log << "error: " << status_text(cell) << '\n';
                }
                summary.cells.push_back(std::move(cell));
            }
        }
    }

    for (const auto& mode : plan.modes) {
        for (bool pretrained : plan.pretrained) {
            std::vector<MetricsReport> rows;
            for (const auto& c : summary.cells) {
                if (c.report && c.mode == mode && c.pretrained == pretrained) rows.push_back(*c.report);
            }
            if (rows.empty()) continue;
            const auto stem = mode_slug(mode) + "_" + pretrained_slug(pretrained);
            const auto title = std::string(mode.single_view ? "Single view" : "Multiview") +
                               " classification scores (%)" + (pretrained ? "" : " with scratch-trained models");
            write_text(plan.output_dir / "tables" / (stem + ".txt"), render_table(rows, title));
            json table = {{"title", title}, {"rows", json::array()}};
            for (const auto& r : rows) table["rows"].push_back(report_to_json(r));
            write_text(plan.output_dir / "tables" / (stem + ".json"), table.dump(2) + "\n");
        }
    }

    json cells = json::array();
    for (const auto& c : summary.cells) {
        cells.push_back({{"cell", cell_name(c.model, c.mode, c.pretrained)},
                         {"status", c.status},
                         {"message", c.message}});
    }
    write_text(plan.output_dir / "summary.json",
               json{{"failed", summary.failed}, {"cells", cells}}.dump(2) + "\n");
    return summary;
}

}  // namespace orange
