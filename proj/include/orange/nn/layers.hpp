#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "orange/nn/tensor.hpp"
#include "orange/rng.hpp"

namespace orange::nn {

struct ParamRef {
    std::string name;
    Tensor* value;
    Tensor* grad;
};

struct BufferRef {
    std::string name;
    Tensor* value;
};

// Flat view over a network's state in registration order.
struct StateRefs {
    std::vector<ParamRef> params;
    std::vector<BufferRef> buffers;
};

// A network stage with explicit forward/backward.
//
// infer() is const and keeps no state, so a network in inference mode can be
// shared between threads. forward() is the training pass: it caches what
// backward() needs and uses batch statistics / dropout. backward() takes
// dL/d(output) of the last forward() and returns dL/d(input), accumulating
// parameter gradients.
class Layer {
public:
    virtual ~Layer() = default;

    virtual Activation infer(const Activation& x) const = 0;
    virtual Activation forward(const Activation& x) = 0;
    virtual Activation backward(const Activation& grad) = 0;

    virtual void collect(const std::string& /*prefix*/, StateRefs& /*out*/) {}
    virtual void reset_parameters(Rng& /*rng*/) {}
    virtual void release_cache() {}
};

enum class ConvInit {
    KaimingNormalFanOut,  // N(0, 2 / (out * k * k))
    KaimingUniformFanIn,  // U(+-sqrt(6 / (in * k * k)))
    SmallNormal,          // N(0, 0.01^2)
};

class Conv2d final : public Layer {
public:
    Conv2d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride, std::size_t padding,
           bool bias, ConvInit init);

    Activation infer(const Activation& x) const override;
    Activation forward(const Activation& x) override;
    Activation backward(const Activation& grad) override;
    void collect(const std::string& prefix, StateRefs& out) override;
    void reset_parameters(Rng& rng) override;
    void release_cache() override { input_ = {}; }

    // The stem has no upstream layer; skipping its input gradient saves a
    // full-resolution GEMM per step.
    void set_input_grad(bool enabled) { input_grad_ = enabled; }

private:
    std::size_t out_size(std::size_t in) const;

    std::size_t in_, out_, kernel_, stride_, padding_;
    bool has_bias_;
    ConvInit init_;
    bool input_grad_ = true;
    Tensor weight_, weight_grad_, bias_, bias_grad_;
    Activation input_;
};

class BatchNorm2d final : public Layer {
public:
    explicit BatchNorm2d(std::size_t channels, double eps = 1e-5, double momentum = 0.1);

    Activation infer(const Activation& x) const override;
    Activation forward(const Activation& x) override;
    Activation backward(const Activation& grad) override;
    void collect(const std::string& prefix, StateRefs& out) override;
    void reset_parameters(Rng& rng) override;
    void release_cache() override { normalized_ = {}; }

private:
    std::size_t channels_;
    double eps_, momentum_;
    Tensor weight_, weight_grad_, bias_, bias_grad_;
    Tensor running_mean_, running_var_;
    Activation normalized_;
    std::vector<double> inv_std_;
};

class ReLU final : public Layer {
public:
    Activation infer(const Activation& x) const override;
    Activation forward(const Activation& x) override;
    Activation backward(const Activation& grad) override;
    void release_cache() override { output_ = {}; }

private:
    Activation output_;
};

class MaxPool2d final : public Layer {
public:
    MaxPool2d(std::size_t kernel, std::size_t stride, std::size_t padding, bool ceil_mode);

    Activation infer(const Activation& x) const override;
    Activation forward(const Activation& x) override;
    Activation backward(const Activation& grad) override;
    void release_cache() override { argmax_.clear(); }

private:
    std::size_t out_size(std::size_t in) const;
    Activation pool(const Activation& x, std::vector<std::uint32_t>* argmax) const;

    std::size_t kernel_, stride_, padding_;
    bool ceil_mode_;
    std::size_t in_h_ = 0, in_w_ = 0;
    std::vector<std::uint32_t> argmax_;
};

class GlobalAvgPool final : public Layer {
public:
    Activation infer(const Activation& x) const override;
    Activation forward(const Activation& x) override;
    Activation backward(const Activation& grad) override;

private:
    std::size_t in_h_ = 0, in_w_ = 0;
};

// Fully connected layer over C x N x 1 x 1 activations.
class Linear final : public Layer {
public:
    Linear(std::size_t in, std::size_t out);

    Activation infer(const Activation& x) const override;
    Activation forward(const Activation& x) override;
    Activation backward(const Activation& grad) override;
    void collect(const std::string& prefix, StateRefs& out) override;
    void reset_parameters(Rng& rng) override;
    void release_cache() override { input_ = {}; }

private:
    std::size_t in_, out_;
    Tensor weight_, weight_grad_, bias_, bias_grad_;
    Activation input_;
};

class Dropout final : public Layer {
public:
    explicit Dropout(double p) : p_(p) {}

    Activation infer(const Activation& x) const override { return x; }
    Activation forward(const Activation& x) override;
    Activation backward(const Activation& grad) override;
    void reset_parameters(Rng& rng) override { rng_ = Rng(rng.next()); }
    void release_cache() override { mask_.clear(); }

private:
    double p_;
    Rng rng_{0};
    std::vector<float> mask_;
};

class Sequential final : public Layer {
public:
    Sequential() = default;

    Layer& add(std::string name, std::unique_ptr<Layer> layer);
    template <typename L, typename... Args>
    L& emplace(std::string name, Args&&... args) {
        auto layer = std::make_unique<L>(std::forward<Args>(args)...);
        auto& ref = *layer;
        add(std::move(name), std::move(layer));
        return ref;
    }

    Activation infer(const Activation& x) const override;
    Activation forward(const Activation& x) override;
    Activation backward(const Activation& grad) override;
    void collect(const std::string& prefix, StateRefs& out) override;
    void reset_parameters(Rng& rng) override;
    void release_cache() override;

    std::size_t size() const noexcept { return layers_.size(); }

private:
    std::vector<std::pair<std::string, std::unique_ptr<Layer>>> layers_;
};

// ResNet basic block: two 3x3 convolutions with batch norm and an identity
// (or 1x1 projection) shortcut.
class BasicBlock final : public Layer {
public:
    BasicBlock(std::size_t in, std::size_t out, std::size_t stride);

    Activation infer(const Activation& x) const override;
    Activation forward(const Activation& x) override;
    Activation backward(const Activation& grad) override;
    void collect(const std::string& prefix, StateRefs& out) override;
    void reset_parameters(Rng& rng) override;
    void release_cache() override;

private:
    Conv2d conv1_;
    BatchNorm2d bn1_;
    ReLU relu1_;
    Conv2d conv2_;
    BatchNorm2d bn2_;
    std::unique_ptr<Sequential> downsample_;
    ReLU relu_out_;
};

// SqueezeNet fire module: 1x1 squeeze, then parallel 1x1 and 3x3 expands
// concatenated along channels.
class Fire final : public Layer {
public:
    Fire(std::size_t in, std::size_t squeeze, std::size_t expand1x1, std::size_t expand3x3);

    Activation infer(const Activation& x) const override;
    Activation forward(const Activation& x) override;
    Activation backward(const Activation& grad) override;
    void collect(const std::string& prefix, StateRefs& out) override;
    void reset_parameters(Rng& rng) override;
    void release_cache() override;

private:
    Conv2d squeeze_;
    ReLU squeeze_relu_;
    Conv2d expand1x1_;
    ReLU expand1x1_relu_;
    Conv2d expand3x3_;
    ReLU expand3x3_relu_;
    std::size_t expand1x1_channels_;
};

}  // namespace orange::nn
