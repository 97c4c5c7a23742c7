#include "orange/nn/layers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "orange/error.hpp"

namespace orange::nn {

namespace {

// Upper bound on im2col scratch (floats). Larger batches are processed in
// image chunks whose GEMM outputs land in place via the leading dimension.
constexpr std::size_t kMaxColumnFloats = std::size_t{1} << 24;

using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Stride = Eigen::OuterStride<>;
using ConstView = Eigen::Map<const RowMajor, Eigen::Unaligned, Stride>;
using View = Eigen::Map<RowMajor, Eigen::Unaligned, Stride>;

// Row-major C = op(A) * op(B) + beta * C, beta in {0, 1}.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const float* a,
          std::size_t lda, const float* b, std::size_t ldb, float beta, float* c, std::size_t ldc) {
    const auto rows = [](bool t, std::size_t r, std::size_t c) { return t ? c : r; };
    const ConstView A(a, rows(trans_a, m, k), rows(trans_a, k, m), Stride(lda));
    const ConstView B(b, rows(trans_b, k, n), rows(trans_b, n, k), Stride(ldb));
    View C(c, m, n, Stride(ldc));
    auto assign = [&](const auto& lhs, const auto& rhs) {
        if (beta == 0.0f) {
            C.noalias() = lhs * rhs;
        } else {
            C.noalias() += lhs * rhs;
        }
    };
    if (trans_a && trans_b) {
        assign(A.transpose(), B.transpose());
    } else if (trans_a) {
        assign(A.transpose(), B);
    } else if (trans_b) {
        assign(A, B.transpose());
    } else {
        assign(A, B);
    }
}

struct ConvGeometry {
    std::size_t channels, batch, height, width;
    std::size_t kernel, stride, padding;
    std::size_t out_h, out_w;

    std::size_t rows() const { return channels * kernel * kernel; }
    std::size_t out_plane() const { return out_h * out_w; }
};

// Valid output range [lo, hi) for kernel offset `k` along an axis of
// length `in` at stride 1.
std::pair<std::size_t, std::size_t> stride1_span(std::size_t in, std::size_t out, std::size_t k, std::size_t pad) {
    const std::size_t lo = pad > k ? pad - k : 0;
    const long long hi_raw = static_cast<long long>(in) + static_cast<long long>(pad) - static_cast<long long>(k);
    const std::size_t hi = static_cast<std::size_t>(std::clamp<long long>(hi_raw, 0, static_cast<long long>(out)));
    return {std::min(lo, hi), hi};
}

void im2col(const Activation& x, const ConvGeometry& g, std::size_t n0, std::size_t nb, float* col) {
    const std::size_t cols = nb * g.out_plane();
    const std::size_t in_plane = g.height * g.width;
    for (std::size_t c = 0; c < g.channels; ++c) {
        for (std::size_t ki = 0; ki < g.kernel; ++ki) {
            for (std::size_t kj = 0; kj < g.kernel; ++kj) {
                float* dst = col + ((c * g.kernel + ki) * g.kernel + kj) * cols;
                const auto [x_lo, x_hi] = stride1_span(g.width, g.out_w, kj, g.padding);
                for (std::size_t b = 0; b < nb; ++b) {
                    const float* src = x.data.data() + (c * g.batch + n0 + b) * in_plane;
                    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
                        float* d = dst + (b * g.out_h + oy) * g.out_w;
                        const long long iy = static_cast<long long>(oy * g.stride + ki) - static_cast<long long>(g.padding);
                        if (iy < 0 || iy >= static_cast<long long>(g.height)) {
                            std::fill(d, d + g.out_w, 0.0f);
                            continue;
                        }
                        const float* row = src + static_cast<std::size_t>(iy) * g.width;
                        if (g.stride == 1) {
                            std::fill(d, d + x_lo, 0.0f);
                            if (x_hi > x_lo) std::memcpy(d + x_lo, row + x_lo + kj - g.padding, (x_hi - x_lo) * sizeof(float));
                            std::fill(d + x_hi, d + g.out_w, 0.0f);
                        } else {
                            for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                                const long long ix = static_cast<long long>(ox * g.stride + kj) - static_cast<long long>(g.padding);
                                d[ox] = (ix < 0 || ix >= static_cast<long long>(g.width)) ? 0.0f : row[ix];
                            }
                        }
                    }
                }
            }
        }
    }
}

void col2im(const float* col, const ConvGeometry& g, std::size_t n0, std::size_t nb, Activation& dx) {
    const std::size_t cols = nb * g.out_plane();
    const std::size_t in_plane = g.height * g.width;
    for (std::size_t c = 0; c < g.channels; ++c) {
        for (std::size_t ki = 0; ki < g.kernel; ++ki) {
            for (std::size_t kj = 0; kj < g.kernel; ++kj) {
                const float* src = col + ((c * g.kernel + ki) * g.kernel + kj) * cols;
                const auto [x_lo, x_hi] = stride1_span(g.width, g.out_w, kj, g.padding);
                for (std::size_t b = 0; b < nb; ++b) {
                    float* dst = dx.data.data() + (c * g.batch + n0 + b) * in_plane;
                    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
                        const float* s = src + (b * g.out_h + oy) * g.out_w;
                        const long long iy = static_cast<long long>(oy * g.stride + ki) - static_cast<long long>(g.padding);
                        if (iy < 0 || iy >= static_cast<long long>(g.height)) continue;
                        float* row = dst + static_cast<std::size_t>(iy) * g.width;
                        if (g.stride == 1) {
                            float* r = row + x_lo + kj - g.padding;
                            for (std::size_t ox = x_lo; ox < x_hi; ++ox) *r++ += s[ox];
                        } else {
                            for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                                const long long ix = static_cast<long long>(ox * g.stride + kj) - static_cast<long long>(g.padding);
                                if (ix >= 0 && ix < static_cast<long long>(g.width)) row[ix] += s[ox];
                            }
                        }
                    }
                }
            }
        }
    }
}

std::size_t chunk_images(const ConvGeometry& g) {
    const std::size_t per_image = std::max<std::size_t>(1, g.rows() * g.out_plane());
    return std::clamp<std::size_t>(kMaxColumnFloats / per_image, 1, g.batch);
}

void fill_normal(Tensor& t, Rng& rng, double stddev) {
    for (auto& v : t.data()) v = static_cast<float>(rng.normal() * stddev);
}

void fill_uniform(Tensor& t, Rng& rng, double bound) {
    for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-bound, bound));
}

void check_channels(const Activation& x, std::size_t expected, const char* layer) {
    if (x.channels != expected) {
        throw Error(ErrorCode::ShapeMismatch, std::string(layer) + ": expected " + std::to_string(expected) +
                                                  " channels, got " + std::to_string(x.channels));
    }
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride, std::size_t padding,
               bool bias, ConvInit init)
    : in_(in), out_(out), kernel_(kernel), stride_(stride), padding_(padding), has_bias_(bias), init_(init),
      weight_({out, in, kernel, kernel}), weight_grad_({out, in, kernel, kernel}) {
    if (has_bias_) {
        bias_ = Tensor({out});
        bias_grad_ = Tensor({out});
    }
}

std::size_t Conv2d::out_size(std::size_t in) const {
    if (in + 2 * padding_ < kernel_) {
        throw Error(ErrorCode::ShapeMismatch, "conv input extent " + std::to_string(in) + " smaller than kernel");
    }
    return (in + 2 * padding_ - kernel_) / stride_ + 1;
}

Activation Conv2d::infer(const Activation& x) const {
    check_channels(x, in_, "conv");
    const ConvGeometry g{x.channels, x.batch, x.height, x.width, kernel_, stride_, padding_,
                         out_size(x.height), out_size(x.width)};
    Activation y(out_, x.batch, g.out_h, g.out_w);
    const std::size_t total = x.batch * g.out_plane();

    if (kernel_ == 1 && stride_ == 1 && padding_ == 0) {
        gemm(false, false, out_, total, in_, weight_.ptr(), in_, x.data.data(), total, 0.0f, y.data.data(), total);
    } else {
        const std::size_t nb_max = chunk_images(g);
        std::vector<float> col(g.rows() * nb_max * g.out_plane());
        for (std::size_t n0 = 0; n0 < x.batch; n0 += nb_max) {
            const std::size_t nb = std::min(nb_max, x.batch - n0);
            im2col(x, g, n0, nb, col.data());
            gemm(false, false, out_, nb * g.out_plane(), g.rows(), weight_.ptr(), g.rows(), col.data(),
                 nb * g.out_plane(), 0.0f, y.data.data() + n0 * g.out_plane(), total);
        }
    }
    if (has_bias_) {
        for (std::size_t o = 0; o < out_; ++o) {
            float* row = y.channel_ptr(o);
            const float b = bias_[o];
            for (std::size_t i = 0; i < total; ++i) row[i] += b;
        }
    }
    return y;
}

Activation Conv2d::forward(const Activation& x) {
    input_ = x;
    return infer(x);
}

Activation Conv2d::backward(const Activation& grad) {
    const Activation& x = input_;
    const ConvGeometry g{x.channels, x.batch, x.height, x.width, kernel_, stride_, padding_, grad.height, grad.width};
    const std::size_t total = x.batch * g.out_plane();
    Activation dx;
    if (input_grad_) dx = Activation(x.channels, x.batch, x.height, x.width);

    if (kernel_ == 1 && stride_ == 1 && padding_ == 0) {
        gemm(false, true, out_, in_, total, grad.data.data(), total, x.data.data(), total, 1.0f, weight_grad_.ptr(), in_);
        if (input_grad_) {
            gemm(true, false, in_, total, out_, weight_.ptr(), in_, grad.data.data(), total, 0.0f, dx.data.data(), total);
        }
    } else {
        const std::size_t nb_max = chunk_images(g);
        std::vector<float> col(g.rows() * nb_max * g.out_plane());
        std::vector<float> dcol(input_grad_ ? col.size() : 0);
        for (std::size_t n0 = 0; n0 < x.batch; n0 += nb_max) {
            const std::size_t nb = std::min(nb_max, x.batch - n0);
            const std::size_t cols = nb * g.out_plane();
            const float* dy = grad.data.data() + n0 * g.out_plane();
            im2col(x, g, n0, nb, col.data());
            gemm(false, true, out_, g.rows(), cols, dy, total, col.data(), cols, 1.0f, weight_grad_.ptr(), g.rows());
            if (input_grad_) {
                gemm(true, false, g.rows(), cols, out_, weight_.ptr(), g.rows(), dy, total, 0.0f, dcol.data(), cols);
                col2im(dcol.data(), g, n0, nb, dx);
            }
        }
    }
    if (has_bias_) {
        for (std::size_t o = 0; o < out_; ++o) {
            const float* row = grad.channel_ptr(o);
            double sum = 0.0;
            for (std::size_t i = 0; i < total; ++i) sum += row[i];
            bias_grad_[o] += static_cast<float>(sum);
        }
    }
    return dx;
}

void Conv2d::collect(const std::string& prefix, StateRefs& out) {
    out.params.push_back({prefix + "weight", &weight_, &weight_grad_});
    if (has_bias_) out.params.push_back({prefix + "bias", &bias_, &bias_grad_});
}

void Conv2d::reset_parameters(Rng& rng) {
    const double taps = static_cast<double>(kernel_ * kernel_);
    switch (init_) {
        case ConvInit::KaimingNormalFanOut:
            fill_normal(weight_, rng, std::sqrt(2.0 / (static_cast<double>(out_) * taps)));
            break;
        case ConvInit::KaimingUniformFanIn:
            fill_uniform(weight_, rng, std::sqrt(6.0 / (static_cast<double>(in_) * taps)));
            break;
        case ConvInit::SmallNormal:
            fill_normal(weight_, rng, 0.01);
            break;
    }
    if (has_bias_) bias_.fill(0.0f);
}

// ----------------------------------------------------------- BatchNorm2d

BatchNorm2d::BatchNorm2d(std::size_t channels, double eps, double momentum)
    : channels_(channels), eps_(eps), momentum_(momentum),
      weight_({channels}, 1.0f), weight_grad_({channels}), bias_({channels}), bias_grad_({channels}),
      running_mean_({channels}), running_var_({channels}, 1.0f) {}

Activation BatchNorm2d::infer(const Activation& x) const {
    check_channels(x, channels_, "batchnorm");
    Activation y(x.channels, x.batch, x.height, x.width);
    const std::size_t m = x.per_channel();
    for (std::size_t c = 0; c < channels_; ++c) {
        const double inv = 1.0 / std::sqrt(static_cast<double>(running_var_[c]) + eps_);
        const auto scale = static_cast<float>(weight_[c] * inv);
        const auto shift = static_cast<float>(bias_[c] - running_mean_[c] * weight_[c] * inv);
        const float* in = x.channel_ptr(c);
        float* out = y.channel_ptr(c);
        for (std::size_t i = 0; i < m; ++i) out[i] = in[i] * scale + shift;
    }
    return y;
}

Activation BatchNorm2d::forward(const Activation& x) {
    check_channels(x, channels_, "batchnorm");
    const std::size_t m = x.per_channel();
    Activation y(x.channels, x.batch, x.height, x.width);
    normalized_ = Activation(x.channels, x.batch, x.height, x.width);
    inv_std_.assign(channels_, 0.0);
    for (std::size_t c = 0; c < channels_; ++c) {
        const float* in = x.channel_ptr(c);
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) sum += in[i];
        const double mean = sum / static_cast<double>(m);
        double sq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d = in[i] - mean;
            sq += d * d;
        }
        const double var = sq / static_cast<double>(m);
        const double inv = 1.0 / std::sqrt(var + eps_);
        inv_std_[c] = inv;

        float* xhat = normalized_.channel_ptr(c);
        float* out = y.channel_ptr(c);
        const float w = weight_[c], b = bias_[c];
        const auto meanf = static_cast<float>(mean), invf = static_cast<float>(inv);
        for (std::size_t i = 0; i < m; ++i) {
            xhat[i] = (in[i] - meanf) * invf;
            out[i] = xhat[i] * w + b;
        }

        const double unbiased = m > 1 ? sq / static_cast<double>(m - 1) : var;
        running_mean_[c] = static_cast<float>((1.0 - momentum_) * running_mean_[c] + momentum_ * mean);
        running_var_[c] = static_cast<float>((1.0 - momentum_) * running_var_[c] + momentum_ * unbiased);
    }
    return y;
}

Activation BatchNorm2d::backward(const Activation& grad) {
    const std::size_t m = grad.per_channel();
    Activation dx(grad.channels, grad.batch, grad.height, grad.width);
    for (std::size_t c = 0; c < channels_; ++c) {
        const float* dy = grad.channel_ptr(c);
        const float* xhat = normalized_.channel_ptr(c);
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            sum_dy += dy[i];
            sum_dy_xhat += static_cast<double>(dy[i]) * xhat[i];
        }
        weight_grad_[c] += static_cast<float>(sum_dy_xhat);
        bias_grad_[c] += static_cast<float>(sum_dy);

        const double md = static_cast<double>(m);
        const auto k = static_cast<float>(weight_[c] * inv_std_[c] / md);
        const auto mean_dy = static_cast<float>(sum_dy);
        const auto mean_dy_xhat = static_cast<float>(sum_dy_xhat);
        const auto mf = static_cast<float>(md);
        float* out = dx.channel_ptr(c);
        for (std::size_t i = 0; i < m; ++i) out[i] = k * (mf * dy[i] - mean_dy - xhat[i] * mean_dy_xhat);
    }
    return dx;
}

void BatchNorm2d::collect(const std::string& prefix, StateRefs& out) {
    out.params.push_back({prefix + "weight", &weight_, &weight_grad_});
    out.params.push_back({prefix + "bias", &bias_, &bias_grad_});
    out.buffers.push_back({prefix + "running_mean", &running_mean_});
    out.buffers.push_back({prefix + "running_var", &running_var_});
}

void BatchNorm2d::reset_parameters(Rng&) {
    weight_.fill(1.0f);
    bias_.fill(0.0f);
    running_mean_.fill(0.0f);
    running_var_.fill(1.0f);
}

// ------------------------------------------------------------------ ReLU

Activation ReLU::infer(const Activation& x) const {
    Activation y = x;
    for (auto& v : y.data) v = v > 0.0f ? v : 0.0f;
    return y;
}

Activation ReLU::forward(const Activation& x) {
    output_ = infer(x);
    return output_;
}

Activation ReLU::backward(const Activation& grad) {
    Activation dx = grad;
    for (std::size_t i = 0; i < dx.data.size(); ++i) {
        if (!(output_.data[i] > 0.0f)) dx.data[i] = 0.0f;
    }
    return dx;
}

// ------------------------------------------------------------- MaxPool2d

MaxPool2d::MaxPool2d(std::size_t kernel, std::size_t stride, std::size_t padding, bool ceil_mode)
    : kernel_(kernel), stride_(stride), padding_(padding), ceil_mode_(ceil_mode) {}

std::size_t MaxPool2d::out_size(std::size_t in) const {
    if (in + 2 * padding_ < kernel_) {
        throw Error(ErrorCode::ShapeMismatch, "pool input extent " + std::to_string(in) + " smaller than kernel");
    }
    const std::size_t span = in + 2 * padding_ - kernel_;
    std::size_t out = (ceil_mode_ ? (span + stride_ - 1) / stride_ : span / stride_) + 1;
    // The last window must start inside the input or the left padding.
    if (ceil_mode_ && (out - 1) * stride_ >= in + padding_) --out;
    return out;
}

Activation MaxPool2d::pool(const Activation& x, std::vector<std::uint32_t>* argmax) const {
    const std::size_t oh = out_size(x.height), ow = out_size(x.width);
    Activation y(x.channels, x.batch, oh, ow);
    const std::size_t planes = x.channels * x.batch;
    if (argmax) argmax->assign(planes * oh * ow, 0);
    for (std::size_t p = 0; p < planes; ++p) {
        const float* src = x.data.data() + p * x.plane();
        float* dst = y.data.data() + p * oh * ow;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            const long long y0 = static_cast<long long>(oy * stride_) - static_cast<long long>(padding_);
            const auto ys = static_cast<std::size_t>(std::max<long long>(y0, 0));
            const auto ye = static_cast<std::size_t>(std::min<long long>(y0 + static_cast<long long>(kernel_),
                                                                         static_cast<long long>(x.height)));
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const long long x0 = static_cast<long long>(ox * stride_) - static_cast<long long>(padding_);
                const auto xs = static_cast<std::size_t>(std::max<long long>(x0, 0));
                const auto xe = static_cast<std::size_t>(std::min<long long>(x0 + static_cast<long long>(kernel_),
                                                                             static_cast<long long>(x.width)));
                float best = -std::numeric_limits<float>::infinity();
                std::size_t best_i = ys * x.width + xs;
                for (std::size_t iy = ys; iy < ye; ++iy) {
                    for (std::size_t ix = xs; ix < xe; ++ix) {
                        const float v = src[iy * x.width + ix];
                        if (v > best) {
                            best = v;
                            best_i = iy * x.width + ix;
                        }
                    }
                }
                dst[oy * ow + ox] = best;
                if (argmax) (*argmax)[p * oh * ow + oy * ow + ox] = static_cast<std::uint32_t>(best_i);
            }
        }
    }
    return y;
}

Activation MaxPool2d::infer(const Activation& x) const { return pool(x, nullptr); }

Activation MaxPool2d::forward(const Activation& x) {
    in_h_ = x.height;
    in_w_ = x.width;
    return pool(x, &argmax_);
}

Activation MaxPool2d::backward(const Activation& grad) {
    Activation dx(grad.channels, grad.batch, in_h_, in_w_);
    const std::size_t planes = grad.channels * grad.batch;
    const std::size_t out_plane = grad.plane();
    for (std::size_t p = 0; p < planes; ++p) {
        float* dst = dx.data.data() + p * in_h_ * in_w_;
        const float* g = grad.data.data() + p * out_plane;
        const std::uint32_t* idx = argmax_.data() + p * out_plane;
        for (std::size_t i = 0; i < out_plane; ++i) dst[idx[i]] += g[i];
    }
    return dx;
}

// --------------------------------------------------------- GlobalAvgPool

Activation GlobalAvgPool::infer(const Activation& x) const {
    Activation y(x.channels, x.batch, 1, 1);
    const std::size_t plane = x.plane();
    for (std::size_t p = 0; p < x.channels * x.batch; ++p) {
        const float* src = x.data.data() + p * plane;
        double sum = 0.0;
        for (std::size_t i = 0; i < plane; ++i) sum += src[i];
        y.data[p] = static_cast<float>(sum / static_cast<double>(plane));
    }
    return y;
}

Activation GlobalAvgPool::forward(const Activation& x) {
    in_h_ = x.height;
    in_w_ = x.width;
    return infer(x);
}

Activation GlobalAvgPool::backward(const Activation& grad) {
    Activation dx(grad.channels, grad.batch, in_h_, in_w_);
    const std::size_t plane = in_h_ * in_w_;
    const float scale = 1.0f / static_cast<float>(plane);
    for (std::size_t p = 0; p < grad.channels * grad.batch; ++p) {
        std::fill_n(dx.data.data() + p * plane, plane, grad.data[p] * scale);
    }
    return dx;
}

// ---------------------------------------------------------------- Linear

Linear::Linear(std::size_t in, std::size_t out)
    : in_(in), out_(out), weight_({out, in}), weight_grad_({out, in}), bias_({out}), bias_grad_({out}) {}

Activation Linear::infer(const Activation& x) const {
    check_channels(x, in_, "linear");
    if (x.plane() != 1) throw Error(ErrorCode::ShapeMismatch, "linear expects 1x1 spatial input");
    Activation y(out_, x.batch, 1, 1);
    for (std::size_t o = 0; o < out_; ++o) std::fill_n(y.channel_ptr(o), x.batch, bias_[o]);
    gemm(false, false, out_, x.batch, in_, weight_.ptr(), in_, x.data.data(), x.batch, 1.0f, y.data.data(), x.batch);
    return y;
}

Activation Linear::forward(const Activation& x) {
    input_ = x;
    return infer(x);
}

Activation Linear::backward(const Activation& grad) {
    const std::size_t n = grad.batch;
    gemm(false, true, out_, in_, n, grad.data.data(), n, input_.data.data(), n, 1.0f, weight_grad_.ptr(), in_);
    for (std::size_t o = 0; o < out_; ++o) {
        double sum = 0.0;
        for (std::size_t b = 0; b < n; ++b) sum += grad.data[o * n + b];
        bias_grad_[o] += static_cast<float>(sum);
    }
    Activation dx(in_, n, 1, 1);
    gemm(true, false, in_, n, out_, weight_.ptr(), in_, grad.data.data(), n, 0.0f, dx.data.data(), n);
    return dx;
}

void Linear::collect(const std::string& prefix, StateRefs& out) {
    out.params.push_back({prefix + "weight", &weight_, &weight_grad_});
    out.params.push_back({prefix + "bias", &bias_, &bias_grad_});
}

void Linear::reset_parameters(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_));
    fill_uniform(weight_, rng, bound);
    fill_uniform(bias_, rng, bound);
}

// --------------------------------------------------------------- Dropout

Activation Dropout::forward(const Activation& x) {
    Activation y = x;
    mask_.resize(x.data.size());
    const auto keep_scale = static_cast<float>(1.0 / (1.0 - p_));
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        mask_[i] = rng_.uniform() < p_ ? 0.0f : keep_scale;
        y.data[i] *= mask_[i];
    }
    return y;
}

Activation Dropout::backward(const Activation& grad) {
    Activation dx = grad;
    for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= mask_[i];
    return dx;
}

// ------------------------------------------------------------ Sequential

Layer& Sequential::add(std::string name, std::unique_ptr<Layer> layer) {
    layers_.emplace_back(std::move(name), std::move(layer));
    return *layers_.back().second;
}

Activation Sequential::infer(const Activation& x) const {
    if (layers_.empty()) return x;
    Activation y = layers_.front().second->infer(x);
    for (std::size_t i = 1; i < layers_.size(); ++i) y = layers_[i].second->infer(y);
    return y;
}

Activation Sequential::forward(const Activation& x) {
    if (layers_.empty()) return x;
    Activation y = layers_.front().second->forward(x);
    for (std::size_t i = 1; i < layers_.size(); ++i) y = layers_[i].second->forward(y);
    return y;
}

Activation Sequential::backward(const Activation& grad) {
    Activation g = grad;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = it->second->backward(g);
    return g;
}

void Sequential::collect(const std::string& prefix, StateRefs& out) {
    for (auto& [name, layer] : layers_) layer->collect(prefix + name + ".", out);
}

void Sequential::reset_parameters(Rng& rng) {
    for (auto& [name, layer] : layers_) layer->reset_parameters(rng);
}

void Sequential::release_cache() {
    for (auto& [name, layer] : layers_) layer->release_cache();
}

// ------------------------------------------------------------ BasicBlock

BasicBlock::BasicBlock(std::size_t in, std::size_t out, std::size_t stride)
    : conv1_(in, out, 3, stride, 1, false, ConvInit::KaimingNormalFanOut),
      bn1_(out),
      conv2_(out, out, 3, 1, 1, false, ConvInit::KaimingNormalFanOut),
      bn2_(out) {
    if (stride != 1 || in != out) {
        downsample_ = std::make_unique<Sequential>();
        downsample_->emplace<Conv2d>("0", in, out, 1, stride, 0, false, ConvInit::KaimingNormalFanOut);
        downsample_->emplace<BatchNorm2d>("1", out);
    }
}

Activation BasicBlock::infer(const Activation& x) const {
    Activation y = bn2_.infer(conv2_.infer(relu1_.infer(bn1_.infer(conv1_.infer(x)))));
    if (downsample_) {
        const Activation sc = downsample_->infer(x);
        for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += sc.data[i];
    } else {
        for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += x.data[i];
    }
    return relu_out_.infer(y);
}

Activation BasicBlock::forward(const Activation& x) {
    Activation y = bn2_.forward(conv2_.forward(relu1_.forward(bn1_.forward(conv1_.forward(x)))));
    if (downsample_) {
        const Activation sc = downsample_->forward(x);
        for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += sc.data[i];
    } else {
        for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += x.data[i];
    }
    return relu_out_.forward(y);
}

Activation BasicBlock::backward(const Activation& grad) {
    const Activation g = relu_out_.backward(grad);
    Activation dx = conv1_.backward(bn1_.backward(relu1_.backward(conv2_.backward(bn2_.backward(g)))));
    if (downsample_) {
        const Activation dsc = downsample_->backward(g);
        for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += dsc.data[i];
    } else {
        for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += g.data[i];
    }
    return dx;
}

void BasicBlock::collect(const std::string& prefix, StateRefs& out) {
    conv1_.collect(prefix + "conv1.", out);
    bn1_.collect(prefix + "bn1.", out);
    conv2_.collect(prefix + "conv2.", out);
    bn2_.collect(prefix + "bn2.", out);
    if (downsample_) downsample_->collect(prefix + "downsample.", out);
}

void BasicBlock::reset_parameters(Rng& rng) {
    conv1_.reset_parameters(rng);
    bn1_.reset_parameters(rng);
    conv2_.reset_parameters(rng);
    bn2_.reset_parameters(rng);
    if (downsample_) downsample_->reset_parameters(rng);
}

void BasicBlock::release_cache() {
    conv1_.release_cache();
    bn1_.release_cache();
    relu1_.release_cache();
    conv2_.release_cache();
    bn2_.release_cache();
    if (downsample_) downsample_->release_cache();
    relu_out_.release_cache();
}

// ------------------------------------------------------------------ Fire

Fire::Fire(std::size_t in, std::size_t squeeze, std::size_t expand1x1, std::size_t expand3x3)
    : squeeze_(in, squeeze, 1, 1, 0, true, ConvInit::KaimingUniformFanIn),
      expand1x1_(squeeze, expand1x1, 1, 1, 0, true, ConvInit::KaimingUniformFanIn),
      expand3x3_(squeeze, expand3x3, 3, 1, 1, true, ConvInit::KaimingUniformFanIn),
      expand1x1_channels_(expand1x1) {}

namespace {

Activation concat_channels(Activation a, const Activation& b) {
    a.data.insert(a.data.end(), b.data.begin(), b.data.end());
    a.channels += b.channels;
    return a;
}

std::pair<Activation, Activation> split_channels(const Activation& g, std::size_t first) {
    Activation a(first, g.batch, g.height, g.width);
    Activation b(g.channels - first, g.batch, g.height, g.width);
    const auto cut = g.data.begin() + static_cast<std::ptrdiff_t>(first * g.per_channel());
    std::copy(g.data.begin(), cut, a.data.begin());
    std::copy(cut, g.data.end(), b.data.begin());
    return {std::move(a), std::move(b)};
}

}  // namespace

Activation Fire::infer(const Activation& x) const {
    const Activation s = squeeze_relu_.infer(squeeze_.infer(x));
    return concat_channels(expand1x1_relu_.infer(expand1x1_.infer(s)), expand3x3_relu_.infer(expand3x3_.infer(s)));
}

Activation Fire::forward(const Activation& x) {
    const Activation s = squeeze_relu_.forward(squeeze_.forward(x));
    return concat_channels(expand1x1_relu_.forward(expand1x1_.forward(s)),
                           expand3x3_relu_.forward(expand3x3_.forward(s)));
}

Activation Fire::backward(const Activation& grad) {
    auto [g1, g3] = split_channels(grad, expand1x1_channels_);
    Activation ds = expand1x1_.backward(expand1x1_relu_.backward(g1));
    const Activation ds3 = expand3x3_.backward(expand3x3_relu_.backward(g3));
    for (std::size_t i = 0; i < ds.data.size(); ++i) ds.data[i] += ds3.data[i];
    return squeeze_.backward(squeeze_relu_.backward(ds));
}

void Fire::collect(const std::string& prefix, StateRefs& out) {
    squeeze_.collect(prefix + "squeeze.", out);
    expand1x1_.collect(prefix + "expand1x1.", out);
    expand3x3_.collect(prefix + "expand3x3.", out);
}

void Fire::reset_parameters(Rng& rng) {
    squeeze_.reset_parameters(rng);
    expand1x1_.reset_parameters(rng);
    expand3x3_.reset_parameters(rng);
}

void Fire::release_cache() {
    squeeze_.release_cache();
    squeeze_relu_.release_cache();
    expand1x1_.release_cache();
    expand1x1_relu_.release_cache();
    expand3x3_.release_cache();
    expand3x3_relu_.release_cache();
}

}  // namespace orange::nn
