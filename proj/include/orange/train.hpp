#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "orange/collage.hpp"
#include "orange/domain.hpp"
#include "orange/model.hpp"
#include "orange/nn/tensor.hpp"

namespace orange {

enum class OptimizerKind { SgdMomentum, Adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view text);

// Per-epoch learning rate. Cosine anneals from learning_rate in the first
// epoch towards zero: lr * (1 + cos(pi * e / epochs)) / 2 for 0-based e.
enum class LrSchedule { Constant, Cosine };

std::string_view to_string(LrSchedule schedule);
LrSchedule parse_lr_schedule(std::string_view text);

struct TrainConfig {
    int epochs = 30;
    int batch_size = 8;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::Adam;
    LrSchedule lr_schedule = LrSchedule::Constant;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    std::uint64_t seed = 0;
    std::optional<std::size_t> single_view;  // absent: multiview
    std::optional<std::filesystem::path> checkpoint_dir;
    bool class_weighting = false;  // inverse class frequency

    void validate() const;
};

// Learning rate for 0-based `epoch` under config.lr_schedule.
double scheduled_learning_rate(const TrainConfig& config, int epoch);

struct EpochStats {
    int epoch = 0;  // 1-based
    double loss = 0.0;
    double accuracy = 0.0;

    friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainRecord {
    std::vector<EpochStats> epochs;
    std::size_t optimizer_steps = 0;

    friend bool operator==(const TrainRecord&, const TrainRecord&) = default;
};

// "epoch=N loss=X acc=Y"
std::string format_epoch_line(const EpochStats& stats);

struct LossAndGrad {
    double loss = 0.0;
    nn::Tensor grad;  // dLoss / dLogits, same shape as the logits
};

// Mean over the batch of -log softmax(logits)[target], computed with the
// log-sum-exp shift. With class weights the mean is weighted:
// sum(w_t * nll) / sum(w_t).
double cross_entropy(const nn::Tensor& logits, std::span<const std::size_t> targets,
                     std::span<const double> class_weights = {});
LossAndGrad cross_entropy_with_grad(const nn::Tensor& logits, std::span<const std::size_t> targets,
                                    std::span<const double> class_weights = {});

// Both optimizers follow the usual L2-coupled formulation: weight decay is
// added to the gradient before the update.
class Optimizer {
public:
    Optimizer(const TrainConfig& config, const nn::StateRefs& state);
    void step();
    void set_learning_rate(double lr) { lr_ = lr; }

private:
    OptimizerKind kind_;
    double lr_, momentum_, weight_decay_;
    std::vector<nn::ParamRef> params_;
    std::vector<std::vector<float>> first_, second_;
    std::size_t steps_ = 0;
};

// Network input for `samples` under `layout`, with single-view selection
// applied first when requested. This is exactly what the training loop feeds
// the model.
nn::Activation training_batch(std::span<const OrangeSample* const> samples, const CollageLayout& layout,
                              std::optional<std::size_t> single_view, Normalization norm);

std::vector<double> inverse_frequency_weights(const Dataset& dataset);

struct TrainResult {
    ModelHandle model;
    TrainRecord record;
};

// Called after each epoch; returning false ends training early.
using EpochCallback = std::function<bool(const EpochStats&, const ModelHandle&)>;

// Minibatch training on collages for config.epochs epochs, or until on_epoch
// returns false. Epoch e (0-based) visits the samples in a Fisher-Yates order
// drawn from derive_seed(config.seed, e). Checkpoints, when enabled, are
// written as checkpoint_dir/epoch_{e+1}.weights. Returns the last-epoch model.
// Writes one format_epoch_line() per epoch to `log` when given. Throws
// EmptyTrainSet, NonFiniteLoss.
TrainResult train(ModelHandle model, const Dataset& train_set, const CollageLayout& layout,
                  const TrainConfig& config, std::ostream* log = nullptr, const EpochCallback& on_epoch = {});

}  // namespace orange
