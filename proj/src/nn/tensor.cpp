#include "orange/nn/tensor.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <numeric>

#include "orange/error.hpp"

namespace orange::nn {

std::size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(shape[i]);
    }
    return out + ")";
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)), values_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> values) : shape_(std::move(shape)), values_(std::move(values)) {
    if (values_.size() != shape_numel(shape_)) {
        throw Error(ErrorCode::ShapeMismatch, "data size does not match shape " + shape_string(shape_));
    }
}

void Tensor::fill(float value) { std::fill(values_.begin(), values_.end(), value); }

Activation to_activation(const Tensor& nchw) {
    if (nchw.rank() != 4) throw Error(ErrorCode::ShapeMismatch, "expected N x C x H x W, got " + shape_string(nchw.shape()));
    const std::size_t n = nchw.dim(0), c = nchw.dim(1), h = nchw.dim(2), w = nchw.dim(3);
    Activation out(c, n, h, w);
    const std::size_t plane = h * w;
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            std::memcpy(out.data.data() + (ch * n + b) * plane, nchw.ptr() + (b * c + ch) * plane,
                        plane * sizeof(float));
        }
    }
    return out;
}

Tensor pooled_to_tensor(const Activation& pooled) {
    if (pooled.plane() != 1) throw Error(ErrorCode::ShapeMismatch, "expected 1x1 spatial extent");
    Tensor out({pooled.batch, pooled.channels});
    for (std::size_t c = 0; c < pooled.channels; ++c) {
        for (std::size_t b = 0; b < pooled.batch; ++b) {
            out[b * pooled.channels + c] = pooled.data[c * pooled.batch + b];
        }
    }
    return out;
}

}  // namespace orange::nn
