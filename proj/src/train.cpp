#include "orange/train.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "orange/error.hpp"
#include "orange/rng.hpp"
#include "orange/weights.hpp"

namespace orange {

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(std::string_view text) {
    if (text == "adam") return OptimizerKind::Adam;
    if (text == "sgd" || text == "sgd_momentum") return OptimizerKind::SgdMomentum;
    throw Error(ErrorCode::InvalidArgument, "unknown optimizer '" + std::string(text) + "'");
}

std::string_view to_string(LrSchedule schedule) { return schedule == LrSchedule::Cosine ? "cosine" : "constant"; }

LrSchedule parse_lr_schedule(std::string_view text) {
    if (text == "constant") return LrSchedule::Constant;
    if (text == "cosine") return LrSchedule::Cosine;
    throw Error(ErrorCode::InvalidArgument, "unknown learning rate schedule '" + std::string(text) + "'");
}

double scheduled_learning_rate(const TrainConfig& config, int epoch) {
    if (config.lr_schedule == LrSchedule::Constant) return config.learning_rate;
    const double pi = std::acos(-1.0);
    return config.learning_rate * 0.5 * (1.0 + std::cos(pi * epoch / config.epochs));
}

void TrainConfig::validate() const {
    if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
    if (batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch size must be >= 1");
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be > 0");
    if (!(weight_decay >= 0.0)) throw Error(ErrorCode::InvalidArgument, "weight decay must be >= 0");
}

std::string format_epoch_line(const EpochStats& stats) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "epoch=%d loss=%.6f acc=%.4f", stats.epoch, stats.loss, stats.accuracy);
    return buf;
}

namespace {

void check_logits(const nn::Tensor& logits, std::span<const std::size_t> targets) {
    if (logits.rank() != 2 || logits.dim(0) != targets.size() || targets.empty()) {
        throw Error(ErrorCode::ShapeMismatch, "logits " + nn::shape_string(logits.shape()) + " vs " +
                                                  std::to_string(targets.size()) + " targets");
    }
    for (auto t : targets) {
        if (t >= logits.dim(1)) throw Error(ErrorCode::InvalidArgument, "target out of range");
    }
}

}  // namespace

LossAndGrad cross_entropy_with_grad(const nn::Tensor& logits, std::span<const std::size_t> targets,
                                    std::span<const double> class_weights) {
    check_logits(logits, targets);
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    LossAndGrad out{0.0, nn::Tensor(logits.shape())};

    double weight_sum = 0.0;
    for (auto t : targets) weight_sum += class_weights.empty() ? 1.0 : class_weights[t];

    for (std::size_t b = 0; b < n; ++b) {
        const float* row = logits.ptr() + b * k;
        double peak = row[0];
        for (std::size_t c = 1; c < k; ++c) peak = std::max(peak, static_cast<double>(row[c]));
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) sum += std::exp(row[c] - peak);
        const double log_z = peak + std::log(sum);
        const double w = (class_weights.empty() ? 1.0 : class_weights[targets[b]]) / weight_sum;
        out.loss += w * (log_z - row[targets[b]]);
        for (std::size_t c = 0; c < k; ++c) {
            const double p = std::exp(row[c] - log_z);
            out.grad[b * k + c] = static_cast<float>(w * (p - (c == targets[b] ? 1.0 : 0.0)));
        }
    }
    return out;
}

double cross_entropy(const nn::Tensor& logits, std::span<const std::size_t> targets,
                     std::span<const double> class_weights) {
    return cross_entropy_with_grad(logits, targets, class_weights).loss;
}

Optimizer::Optimizer(const TrainConfig& config, const nn::StateRefs& state)
    : kind_(config.optimizer), lr_(config.learning_rate), momentum_(config.momentum),
      weight_decay_(config.weight_decay), params_(state.params) {
    for (const auto& p : params_) {
        first_.emplace_back(p.value->numel(), 0.0f);
        if (kind_ == OptimizerKind::Adam) second_.emplace_back(p.value->numel(), 0.0f);
    }
}

void Optimizer::step() {
    ++steps_;
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(steps_));
    const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(steps_));
    const auto wd = static_cast<float>(weight_decay_);

    for (std::size_t i = 0; i < params_.size(); ++i) {
        float* w = params_[i].value->ptr();
        const float* g = params_[i].grad->ptr();
        float* m = first_[i].data();
        const std::size_t n = params_[i].value->numel();
        if (kind_ == OptimizerKind::Adam) {
            float* v = second_[i].data();
            const auto step = static_cast<float>(lr_ / bias1);
            const auto inv_sqrt_bias2 = static_cast<float>(1.0 / std::sqrt(bias2));
            for (std::size_t j = 0; j < n; ++j) {
                const float grad = g[j] + wd * w[j];
                m[j] = static_cast<float>(kBeta1) * m[j] + static_cast<float>(1.0 - kBeta1) * grad;
                v[j] = static_cast<float>(kBeta2) * v[j] + static_cast<float>(1.0 - kBeta2) * grad * grad;
                w[j] -= step * m[j] / (std::sqrt(v[j]) * inv_sqrt_bias2 + static_cast<float>(kEps));
            }
        } else {
            const auto mom = static_cast<float>(momentum_);
            const auto lr = static_cast<float>(lr_);
            for (std::size_t j = 0; j < n; ++j) {
                const float grad = g[j] + wd * w[j];
                m[j] = steps_ == 1 ? grad : mom * m[j] + grad;
                w[j] -= lr * m[j];
            }
        }
    }
}

nn::Activation training_batch(std::span<const OrangeSample* const> samples, const CollageLayout& layout,
                              std::optional<std::size_t> single_view, Normalization norm) {
    std::vector<Collage> collages;
    collages.reserve(samples.size());
    for (const auto* s : samples) {
        collages.push_back(single_view ? compose_collage(select_single_view(*s, *single_view), layout)
                                       : compose_collage(*s, layout));
    }
    return collage_activation(collages, norm);
}

std::vector<double> inverse_frequency_weights(const Dataset& dataset) {
    const auto counts = class_counts(dataset);
    std::size_t present = 0;
    for (auto c : counts) present += c > 0 ? 1 : 0;
    std::vector<double> weights(kNumGrades, 0.0);
    for (std::size_t c = 0; c < kNumGrades; ++c) {
        if (counts[c] > 0) {
            weights[c] = static_cast<double>(dataset.size()) / (static_cast<double>(present) * static_cast<double>(counts[c]));
        }
    }
    return weights;
}

TrainResult train(ModelHandle model, const Dataset& train_set, const CollageLayout& layout,
                  const TrainConfig& config, std::ostream* log, const EpochCallback& on_epoch) {
    config.validate();
    layout.validate();
    if (train_set.empty()) throw Error(ErrorCode::EmptyTrainSet, "no training samples");
    if (model.num_classes() != kNumGrades) {
        throw Error(ErrorCode::InvalidArgument, "model must have " + std::to_string(kNumGrades) + " classes");
    }
    if (config.checkpoint_dir) std::filesystem::create_directories(*config.checkpoint_dir);
    model.set_input_spec({3, static_cast<std::size_t>(layout.final_height), static_cast<std::size_t>(layout.final_width)});

    const auto weights = config.class_weighting ? inverse_frequency_weights(train_set) : std::vector<double>{};
    Optimizer optimizer(config, model.state());
    TrainRecord record;
    const std::size_t n = train_set.size();
    const auto batch_size = static_cast<std::size_t>(config.batch_size);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        optimizer.set_learning_rate(scheduled_learning_rate(config, epoch));
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
        shuffle(std::span<std::size_t>(order), rng);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0, batch_index = 0; start < n; start += batch_size, ++batch_index) {
            const std::size_t end = std::min(n, start + batch_size);
            std::vector<const OrangeSample*> members;
            std::vector<std::size_t> targets;
            for (std::size_t i = start; i < end; ++i) {
                members.push_back(&train_set[order[i]]);
                targets.push_back(index_of(train_set[order[i]].label));
            }
            const auto input = training_batch(members, layout, config.single_view, model.normalization());

            model.zero_grad();
            const auto logits = model.train_forward(input);
            auto [loss, grad] = cross_entropy_with_grad(logits, targets, weights);
            if (!std::isfinite(loss)) {
                throw Error(ErrorCode::NonFiniteLoss,
                            "epoch " + std::to_string(epoch + 1) + " batch " + std::to_string(batch_index + 1));
            }
            model.backward(grad);
            optimizer.step();
            ++record.optimizer_steps;

            loss_sum += loss * static_cast<double>(targets.size());
            for (std::size_t b = 0; b < targets.size(); ++b) {
                const auto pred = prediction_from_logits(std::span(logits.ptr() + b * kNumGrades, kNumGrades));
                if (index_of(pred.label) == targets[b]) ++correct;
            }
        }
        model.release_cache();

        const EpochStats stats{epoch + 1, loss_sum / static_cast<double>(n),
                               static_cast<double>(correct) / static_cast<double>(n)};
        record.epochs.push_back(stats);
        if (log) *log << format_epoch_line(stats) << std::endl;
        if (config.checkpoint_dir) {
            save_model(model, *config.checkpoint_dir / ("epoch_" + std::to_string(epoch + 1) + ".weights"));
        }
        if (on_epoch && !on_epoch(stats, model)) break;
    }
    return {std::move(model), std::move(record)};
}

}  // namespace orange
