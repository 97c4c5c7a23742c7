#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace orange::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major float array with a shape. Used for parameters, model
// inputs (N x C x H x W) and logits (N x classes).
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, float fill = 0.0f);
    Tensor(Shape shape, std::vector<float> values);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t numel() const noexcept { return values_.size(); }

    std::span<float> data() noexcept { return values_; }
    std::span<const float> data() const noexcept { return values_; }
    float* ptr() noexcept { return values_.data(); }
    const float* ptr() const noexcept { return values_.data(); }

    float& operator[](std::size_t i) { return values_[i]; }
    float operator[](std::size_t i) const { return values_[i]; }

    void fill(float value);

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<float> values_;
};

// Feature maps inside the network, stored channel-major: C x N x H x W.
// With this layout a convolution over the whole batch is one GEMM whose
// output lands directly in place, per-channel statistics are contiguous,
// and channel concatenation is an append.
struct Activation {
    std::size_t channels = 0;
    std::size_t batch = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> data;

    Activation() = default;
    Activation(std::size_t c, std::size_t n, std::size_t h, std::size_t w, float fill = 0.0f)
        : channels(c), batch(n), height(h), width(w), data(c * n * h * w, fill) {}

    std::size_t plane() const noexcept { return height * width; }
    std::size_t per_channel() const noexcept { return batch * height * width; }
    std::size_t size() const noexcept { return data.size(); }
    bool empty() const noexcept { return data.empty(); }

    float* channel_ptr(std::size_t c) { return data.data() + c * per_channel(); }
    const float* channel_ptr(std::size_t c) const { return data.data() + c * per_channel(); }
};

// N x C x H x W tensor <-> channel-major activation.
Activation to_activation(const Tensor& nchw);
// C x N x 1 x 1 activation -> N x C tensor.
Tensor pooled_to_tensor(const Activation& pooled);

}  // namespace orange::nn
