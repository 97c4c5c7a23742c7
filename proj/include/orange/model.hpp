#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "orange/domain.hpp"
#include "orange/nn/networks.hpp"
#include "orange/nn/tensor.hpp"

namespace orange {

enum class ArchitectureKind { ResNet18, SqueezeNet };

// CLI spelling: "resnet18" / "squeezenet".
std::string_view to_string(ArchitectureKind kind);
ArchitectureKind parse_architecture(std::string_view text);
// Report spelling: "ResNet-18" / "SqueezeNet".
std::string_view display_name(ArchitectureKind kind);

struct InputSpec {
    std::size_t channels = 3;
    std::size_t height = 300;
    std::size_t width = 2500;
};

// Pixel normalization applied at the model boundary. Pretrained backbones
// expect ImageNet statistics; scratch models use x / 255 - 0.5.
enum class Normalization { ImageNet, Centered };

class ModelHandle {
public:
    ModelHandle(ArchitectureKind kind, std::size_t num_classes, bool pretrained,
                nn::SqueezeNetVersion version = nn::SqueezeNetVersion::V1_1);
    ModelHandle(ModelHandle&&) noexcept = default;
    ModelHandle& operator=(ModelHandle&&) noexcept = default;

    ArchitectureKind kind() const noexcept { return kind_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    bool pretrained() const noexcept { return pretrained_; }
    nn::SqueezeNetVersion squeezenet_version() const noexcept { return version_; }
    const InputSpec& input_spec() const noexcept { return input_spec_; }
    void set_input_spec(const InputSpec& spec) { input_spec_ = spec; }
    Normalization normalization() const noexcept {
        return pretrained_ ? Normalization::ImageNet : Normalization::Centered;
    }

    // "resnet18", "squeezenet1_1" or "squeezenet1_0"; the archive header tag.
    std::string architecture_name() const;

    // Trainable parameters and buffers in registration order.
    const nn::StateRefs& state() noexcept { return state_; }
    std::vector<std::pair<std::string, const nn::Tensor*>> parameters() const;
    std::vector<std::pair<std::string, const nn::Tensor*>> buffers() const;
    std::size_t parameter_count() const;

    // Parameters replaced for a new class count ("fc." or "classifier.1.").
    bool is_head(std::string_view name) const;

    // Inference-mode forward: N x 3 x H x W (normalized) -> N x classes.
    nn::Tensor forward(const nn::Tensor& batch) const;
    nn::Tensor infer(const nn::Activation& batch) const;

    // Training pass (batch statistics, dropout, caches for backward()).
    nn::Tensor train_forward(const nn::Activation& batch);
    void backward(const nn::Tensor& grad_logits);
    void zero_grad();
    void release_cache();

    void reset_parameters(std::uint64_t seed);
    ModelHandle clone() const;

private:
    void check_input(const nn::Activation& batch) const;

    ArchitectureKind kind_;
    std::size_t num_classes_;
    bool pretrained_;
    nn::SqueezeNetVersion version_;
    InputSpec input_spec_;
    std::unique_ptr<nn::Sequential> net_;
    nn::StateRefs state_;
};

// Builds the network and initializes every parameter from `seed`. When
// pretrained, all non-head parameters and buffers are then overwritten from
// the archive at weights_path; the head keeps its seeded initialization.
ModelHandle build_model(ArchitectureKind kind, std::size_t num_classes, bool pretrained,
                        const std::optional<std::filesystem::path>& weights_path, std::uint64_t seed,
                        nn::SqueezeNetVersion version = nn::SqueezeNetVersion::V1_1);

float normalize_channel(std::uint8_t value, std::size_t channel, Normalization norm);

// Stacks collages (all the same size) into an N x 3 x H x W tensor.
nn::Tensor collage_batch(std::span<const Collage> collages, Normalization norm);
// Same values, channel-major, for the training path.
nn::Activation collage_activation(std::span<const Collage> collages, Normalization norm);

std::vector<double> softmax(std::span<const float> logits);
// Index of the maximum; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

struct Prediction {
    GradeLabel label = GradeLabel::Good;
    std::array<double, kNumGrades> probabilities{};
};

Prediction predict(const ModelHandle& model, const Collage& collage);
Prediction prediction_from_logits(std::span<const float> logits);

}  // namespace orange
