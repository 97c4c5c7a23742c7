#include "orange/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "orange/error.hpp"
#include "orange/rng.hpp"
#include "orange/weights.hpp"

namespace orange {

std::string_view to_string(ArchitectureKind kind) {
    return kind == ArchitectureKind::ResNet18 ? "resnet18" : "squeezenet";
}

ArchitectureKind parse_architecture(std::string_view text) {
    if (text == "resnet18" || text == "resnet-18") return ArchitectureKind::ResNet18;
    if (text == "squeezenet" || text == "squeezenet1_1" || text == "squeezenet1_0") return ArchitectureKind::SqueezeNet;
    throw Error(ErrorCode::InvalidArgument, "unknown architecture '" + std::string(text) + "'");
}

std::string_view display_name(ArchitectureKind kind) {
    return kind == ArchitectureKind::ResNet18 ? "ResNet-18" : "SqueezeNet";
}

ModelHandle::ModelHandle(ArchitectureKind kind, std::size_t num_classes, bool pretrained,
                         nn::SqueezeNetVersion version)
    : kind_(kind), num_classes_(num_classes), pretrained_(pretrained), version_(version) {
    if (num_classes == 0) throw Error(ErrorCode::InvalidArgument, "num_classes must be positive");
    net_ = kind == ArchitectureKind::ResNet18 ? nn::make_resnet18(num_classes)
                                              : nn::make_squeezenet(version, num_classes);
    net_->collect("", state_);
}

std::string ModelHandle::architecture_name() const {
    if (kind_ == ArchitectureKind::ResNet18) return "resnet18";
    return version_ == nn::SqueezeNetVersion::V1_0 ? "squeezenet1_0" : "squeezenet1_1";
}

std::vector<std::pair<std::string, const nn::Tensor*>> ModelHandle::parameters() const {
    std::vector<std::pair<std::string, const nn::Tensor*>> out;
    for (const auto& p : state_.params) out.emplace_back(p.name, p.value);
    return out;
}

std::vector<std::pair<std::string, const nn::Tensor*>> ModelHandle::buffers() const {
    std::vector<std::pair<std::string, const nn::Tensor*>> out;
    for (const auto& b : state_.buffers) out.emplace_back(b.name, b.value);
    return out;
}

std::size_t ModelHandle::parameter_count() const {
    std::size_t total = 0;
    for (const auto& p : state_.params) total += p.value->numel();
    return total;
}

bool ModelHandle::is_head(std::string_view name) const {
    const std::string_view prefix = kind_ == ArchitectureKind::ResNet18 ? "fc." : "classifier.1.";
    return name.substr(0, prefix.size()) == prefix;
}

void ModelHandle::check_input(const nn::Activation& batch) const {
    if (batch.channels != 3 || batch.batch == 0 || batch.height == 0 || batch.width == 0) {
        throw Error(ErrorCode::ShapeMismatch,
                    "expected a non-empty batch of 3-channel images, got C=" + std::to_string(batch.channels) +
                        " N=" + std::to_string(batch.batch));
    }
}

nn::Tensor ModelHandle::forward(const nn::Tensor& batch) const {
    if (batch.rank() != 4) {
        throw Error(ErrorCode::ShapeMismatch, "expected N x 3 x H x W, got " + nn::shape_string(batch.shape()));
    }
    return infer(nn::to_activation(batch));
}

nn::Tensor ModelHandle::infer(const nn::Activation& batch) const {
    check_input(batch);
    return nn::pooled_to_tensor(net_->infer(batch));
}

nn::Tensor ModelHandle::train_forward(const nn::Activation& batch) {
    check_input(batch);
    return nn::pooled_to_tensor(net_->forward(batch));
}

void ModelHandle::backward(const nn::Tensor& grad_logits) {
    const std::size_t n = grad_logits.dim(0);
    nn::Activation g(num_classes_, n, 1, 1);
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t c = 0; c < num_classes_; ++c) g.data[c * n + b] = grad_logits[b * num_classes_ + c];
    }
    net_->backward(g);
}

void ModelHandle::zero_grad() {
    for (auto& p : state_.params) p.grad->fill(0.0f);
}

void ModelHandle::release_cache() { net_->release_cache(); }

void ModelHandle::reset_parameters(std::uint64_t seed) {
    Rng rng(seed);
    net_->reset_parameters(rng);
}

ModelHandle ModelHandle::clone() const {
    ModelHandle copy(kind_, num_classes_, pretrained_, version_);
    copy.input_spec_ = input_spec_;
    for (std::size_t i = 0; i < state_.params.size(); ++i) {
        *copy.state_.params[i].value = *state_.params[i].value;
    }
    for (std::size_t i = 0; i < state_.buffers.size(); ++i) {
        *copy.state_.buffers[i].value = *state_.buffers[i].value;
    }
    return copy;
}

ModelHandle build_model(ArchitectureKind kind, std::size_t num_classes, bool pretrained,
                        const std::optional<std::filesystem::path>& weights_path, std::uint64_t seed,
                        nn::SqueezeNetVersion version) {
    ModelHandle model(kind, num_classes, pretrained, version);
    model.reset_parameters(seed);
    if (pretrained) {
        if (!weights_path) throw Error(ErrorCode::WeightsFileMissing, "pretrained model requested without weights");
        import_weights(model, load_archive(*weights_path), /*backbone_only=*/true);
    }
    return model;
}

float normalize_channel(std::uint8_t value, std::size_t channel, Normalization norm) {
    static constexpr float kMean[3] = {0.485f, 0.456f, 0.406f};
    static constexpr float kStd[3] = {0.229f, 0.224f, 0.225f};
    const float x = static_cast<float>(value) / 255.0f;
    if (norm == Normalization::Centered) return x - 0.5f;
    return (x - kMean[channel]) / kStd[channel];
}

namespace {

void check_same_size(std::span<const Collage> collages) {
    if (collages.empty()) throw Error(ErrorCode::ShapeMismatch, "empty batch");
    for (const auto& c : collages) {
        if (c.pixels.width() != collages[0].pixels.width() || c.pixels.height() != collages[0].pixels.height()) {
            throw Error(ErrorCode::ShapeMismatch, "collages in a batch must share dimensions");
        }
    }
}

// Writes channel `ch` of `image` to dst (H x W floats).
void normalize_plane(const RgbImage& image, std::size_t ch, Normalization norm, float* dst) {
    float table[256];
    for (int v = 0; v < 256; ++v) table[v] = normalize_channel(static_cast<std::uint8_t>(v), ch, norm);
    const auto bytes = image.bytes();
    const std::size_t plane = static_cast<std::size_t>(image.width()) * static_cast<std::size_t>(image.height());
    for (std::size_t i = 0; i < plane; ++i) dst[i] = table[bytes[i * 3 + ch]];
}

}  // namespace

nn::Tensor collage_batch(std::span<const Collage> collages, Normalization norm) {
    check_same_size(collages);
    const std::size_t h = static_cast<std::size_t>(collages[0].pixels.height());
    const std::size_t w = static_cast<std::size_t>(collages[0].pixels.width());
    nn::Tensor out({collages.size(), 3, h, w});
    for (std::size_t b = 0; b < collages.size(); ++b) {
        for (std::size_t ch = 0; ch < 3; ++ch) {
            normalize_plane(collages[b].pixels, ch, norm, out.ptr() + (b * 3 + ch) * h * w);
        }
    }
    return out;
}

nn::Activation collage_activation(std::span<const Collage> collages, Normalization norm) {
    check_same_size(collages);
    const std::size_t h = static_cast<std::size_t>(collages[0].pixels.height());
    const std::size_t w = static_cast<std::size_t>(collages[0].pixels.width());
    nn::Activation out(3, collages.size(), h, w);
    for (std::size_t ch = 0; ch < 3; ++ch) {
        for (std::size_t b = 0; b < collages.size(); ++b) {
            normalize_plane(collages[b].pixels, ch, norm, out.data.data() + (ch * collages.size() + b) * h * w);
        }
    }
    return out;
}

std::vector<double> softmax(std::span<const float> logits) {
    std::vector<double> out(logits.size());
    if (logits.empty()) return out;
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(static_cast<double>(logits[i]) - peak);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

Prediction prediction_from_logits(std::span<const float> logits) {
    if (logits.size() != kNumGrades) {
        throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(kNumGrades) + " logits");
    }
    const auto probs = softmax(logits);
    Prediction out;
    std::copy(probs.begin(), probs.end(), out.probabilities.begin());
    // Ties are decided on the logits so equal scores never depend on
    // rounding inside the softmax.
    std::vector<double> raw(logits.begin(), logits.end());
    out.label = grade_from_index(argmax(raw));
    return out;
}

Prediction predict(const ModelHandle& model, const Collage& collage) {
    const auto logits = model.forward(collage_batch(std::span(&collage, 1), model.normalization()));
    return prediction_from_logits(logits.data());
}

}  // namespace orange
