// orange-grade: command-line front end for the grading pipeline.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "orange/collage.hpp"
#include "orange/error.hpp"
#include "orange/eval.hpp"
#include "orange/experiment.hpp"
#include "orange/ingest.hpp"
#include "orange/model.hpp"
#include "orange/split.hpp"
#include "orange/synth.hpp"
#include "orange/train.hpp"
#include "orange/weights.hpp"

namespace fs = std::filesystem;
using namespace orange;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct LayoutFlags {
    int rows = 1;
    int tile_size = 300;
    int width = 2500;
    int height = 300;
    bool pad_to_final = false;
    std::string interpolation = "bilinear";

    void add_to(CLI::App& cmd) {
        cmd.add_option("--rows", rows, "Collage grid rows")->check(CLI::PositiveNumber);
        cmd.add_option("--tile-size", tile_size, "Side of each view tile in pixels")->check(CLI::PositiveNumber);
        cmd.add_option("--width", width, "Final collage width")->check(CLI::PositiveNumber);
        cmd.add_option("--height", height, "Final collage height")->check(CLI::PositiveNumber);
        cmd.add_flag("--pad-to-final", pad_to_final, "Pad the mosaic to the final size instead of stretching");
        cmd.add_option("--interpolation", interpolation, "Resize filter")
            ->check(CLI::IsMember({"bilinear", "nearest"}));
    }

    CollageLayout layout() const {
        CollageLayout l;
        l.rows = rows;
        l.tile_size = tile_size;
        l.final_width = width;
        l.final_height = height;
        l.pad_to_final = pad_to_final;
        l.interpolation = interpolation == "nearest" ? Interpolation::Nearest : Interpolation::Bilinear;
        l.validate();
        return l;
    }
};

struct ModeFlags {
    std::string mode = "multiview";
    std::size_t view_index = 0;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--mode", mode, "Input mode")->check(CLI::IsMember({"multiview", "single-view"}));
        cmd.add_option("--view-index", view_index, "View kept in single-view mode");
    }

    std::optional<std::size_t> single_view() const {
        return mode == "single-view" ? std::optional<std::size_t>(view_index) : std::nullopt;
    }
};

// Dataset selection shared by train and eval: an explicit manifest, or one
// half of a seeded stratified split of the whole dataset.
struct DataFlags {
    fs::path dataset;
    fs::path manifest;
    double train_fraction = 0.7;
    std::uint64_t split_seed = 0;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--dataset", dataset, "Dataset root")->required();
        cmd.add_option("--manifest", manifest, "Manifest selecting the samples to use");
        cmd.add_option("--train-fraction", train_fraction, "Train share of each class")
            ->check(CLI::Range(0.0, 1.0));
        cmd.add_option("--split-seed", split_seed, "Seed of the stratified split");
    }

    Dataset select(bool train_half) const {
        if (!manifest.empty()) return load_dataset(dataset, manifest);
        auto split = stratified_split(load_dataset(dataset), SplitSpec{train_fraction, split_seed});
        return train_half ? std::move(split.train) : std::move(split.test);
    }
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
}

void run_synth(std::size_t samples, std::uint64_t seed, int views, int view_size, double concentration,
               const fs::path& out) {
    SynthConfig config;
    config.num_samples = samples;
    config.seed = seed;
    config.views_per_sample = views;
    config.view_size = view_size;
    config.single_view_concentration = concentration;
    config.validate();
    write_dataset(generate(config), out);
    std::cout << "wrote " << samples << " samples to " << out.string() << '\n';
}

void run_split(const fs::path& dataset, double fraction, std::uint64_t seed, const fs::path& out) {
    const SplitSpec spec{fraction, seed};
    spec.validate();
    const auto split = stratified_split(load_dataset(dataset), spec);
    fs::create_directories(out);
    write_manifest(manifest_rows(split.train), out / "train.csv");
    write_manifest(manifest_rows(split.test), out / "test.csv");
    std::cout << "train " << split.train.size() << ", test " << split.test.size() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-view orange grading: synthesize, split, train and evaluate."};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-view dataset");
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    int views = 8;
    int view_size = 300;
    double concentration = 1.0;
    fs::path out;
    synth->add_option("--samples", samples, "Number of samples")->required()->check(CLI::PositiveNumber);
    synth->add_option("--seed", seed, "Generator seed");
    synth->add_option("--views", views, "Views per sample")->check(CLI::Range(1, kMaxViews));
    synth->add_option("--view-size", view_size, "View side in pixels")->check(CLI::PositiveNumber);
    synth->add_option("--concentration", concentration, "Probability a blemish shows in one view only")
        ->check(CLI::Range(0.0, 1.0));
    synth->add_option("--out", out, "Output dataset root")->required();

    // split
    auto* split_cmd = app.add_subcommand("split", "Write stratified train/test manifests");
    fs::path dataset;
    double train_fraction = 0.7;
    split_cmd->add_option("--dataset", dataset, "Dataset root")->required();
    split_cmd->add_option("--train-fraction", train_fraction, "Train share of each class")
        ->check(CLI::Range(0.0, 1.0));
    split_cmd->add_option("--seed", seed, "Split seed");
    split_cmd->add_option("--out", out, "Directory for train.csv and test.csv")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a model on collages");
    DataFlags train_data;
    LayoutFlags train_layout;
    ModeFlags train_mode;
    std::string model_name = "resnet18";
    std::string squeezenet_version = "1.1";
    std::optional<fs::path> pretrained_weights;
    bool pretrained = false;
    TrainConfig config;
    std::string optimizer = "adam";
    std::string lr_schedule = "constant";
    bool checkpoints = false;
    train_data.add_to(*train_cmd);
    train_layout.add_to(*train_cmd);
    train_mode.add_to(*train_cmd);
    train_cmd->add_option("--model", model_name, "Architecture")->check(CLI::IsMember({"resnet18", "squeezenet"}));
    train_cmd->add_option("--squeezenet-version", squeezenet_version, "SqueezeNet variant")
        ->check(CLI::IsMember({"1.0", "1.1"}));
    train_cmd->add_flag("--pretrained", pretrained,
                        "Initialize the backbone from a weight archive (--pretrained-weights or $" +
                            std::string(kWeightsDirEnv) + "/<architecture>.weights)");
    train_cmd->add_option("--pretrained-weights", pretrained_weights, "Backbone weight archive; implies --pretrained");
    train_cmd->add_option("--epochs", config.epochs, "Training epochs")->check(CLI::PositiveNumber);
    train_cmd->add_option("--batch-size", config.batch_size, "Minibatch size")->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", config.learning_rate, "Learning rate")->check(CLI::PositiveNumber);
    train_cmd->add_option("--optimizer", optimizer, "Optimizer")->check(CLI::IsMember({"adam", "sgd"}));
    train_cmd->add_option("--lr-schedule", lr_schedule, "Per-epoch learning rate schedule")
        ->check(CLI::IsMember({"constant", "cosine"}));
    train_cmd->add_option("--momentum", config.momentum, "SGD momentum");
    train_cmd->add_option("--weight-decay", config.weight_decay, "L2 weight decay");
    train_cmd->add_option("--seed", config.seed, "Initialization and shuffling seed");
    train_cmd->add_flag("--class-weighting", config.class_weighting, "Weight the loss by inverse class frequency");
    train_cmd->add_flag("--checkpoints", checkpoints, "Save weights after every epoch");
    train_cmd->add_option("--out", out, "Output directory")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained model");
    DataFlags eval_data;
    LayoutFlags eval_layout;
    ModeFlags eval_mode;
    fs::path model_weights;
    eval_data.add_to(*eval_cmd);
    eval_layout.add_to(*eval_cmd);
    eval_mode.add_to(*eval_cmd);
    eval_cmd->add_option("--model-weights", model_weights, "Trained weight archive")->required();
    eval_cmd->add_option("--out", out, "Output directory")->required();

    // experiment
    auto* experiment = app.add_subcommand("experiment", "Run an experiment plan");
    fs::path plan_path;
    experiment->add_option("--plan", plan_path, "Plan file (JSON)")->required();

    // collage
    auto* collage_cmd = app.add_subcommand("collage", "Export one sample's collage as PNG");
    LayoutFlags collage_layout;
    ModeFlags collage_mode;
    std::string sample_id;
    collage_layout.add_to(*collage_cmd);
    collage_mode.add_to(*collage_cmd);
    collage_cmd->add_option("--dataset", dataset, "Dataset root")->required();
    collage_cmd->add_option("--sample", sample_id, "Sample id")->required();
    collage_cmd->add_option("--out", out, "Output PNG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*synth) {
            run_synth(samples, seed, views, view_size, concentration, out);
        } else if (*split_cmd) {
            run_split(dataset, train_fraction, seed, out);
        } else if (*train_cmd) {
            const auto kind = parse_architecture(model_name);
            const auto version =
                squeezenet_version == "1.0" ? nn::SqueezeNetVersion::V1_0 : nn::SqueezeNetVersion::V1_1;
            config.optimizer = parse_optimizer(optimizer);
            config.lr_schedule = parse_lr_schedule(lr_schedule);
            config.single_view = train_mode.single_view();
            if (checkpoints) config.checkpoint_dir = out / "checkpoints";
            const auto layout = train_layout.layout();
            config.validate();

            std::optional<fs::path> weights;
            if (pretrained || pretrained_weights) {
                const ModelHandle probe(kind, kNumGrades, true, version);
                weights = resolve_pretrained_weights(pretrained_weights, probe.architecture_name());
                if (!weights) {
                    throw Error(ErrorCode::WeightsFileMissing,
                                "no backbone archive; pass --pretrained-weights or set " +
                                    std::string(kWeightsDirEnv));
                }
            }
            const Dataset train_set = train_data.select(true);
            fs::create_directories(out);
            auto model = build_model(kind, kNumGrades, weights.has_value(), weights, config.seed, version);
            std::ofstream log(out / "train.log", std::ios::trunc);
            auto result = train(std::move(model), train_set, layout, config, &log);
            save_model(result.model, out / "model.weights");
            const auto& last = result.record.epochs.back();
            std::cout << format_epoch_line(last) << '\n'
                      << "wrote " << (out / "model.weights").string() << '\n';
        } else if (*eval_cmd) {
            const auto layout = eval_layout.layout();
            const auto model = load_model(model_weights);
            const Dataset test_set = eval_data.select(false);
            const auto report = evaluate(model, test_set, layout, EvalMode{eval_mode.single_view()});
            fs::create_directories(out);
            write_file(out / "report.json", report_to_json(report).dump(2) + "\n");
            const auto table = render_table({report});
            write_file(out / "report.txt", table);
            std::cout << table;
        } else if (*experiment) {
            const auto plan = load_plan(plan_path);
            const auto summary = run_experiment(plan, std::cout);
            if (summary.failed) return kExitRuntime;
        } else if (*collage_cmd) {
            const auto layout = collage_layout.layout();
            const auto data = load_dataset(dataset);
            const auto it = std::find_if(data.begin(), data.end(),
                                         [&](const OrangeSample& s) { return s.id == sample_id; });
            if (it == data.end()) throw Error(ErrorCode::InvalidArgument, "no sample '" + sample_id + "'");
            const auto mode = collage_mode.single_view();
            const auto collage = compose_collage(mode ? select_single_view(*it, *mode) : *it, layout);
            write_png(collage.pixels, out);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
