#include "cropscan/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "cropscan/gemm.hpp"

namespace cropscan {

namespace {

void check_conv_shapes(const Tensor& input, const Tensor& kernels,
                       const Tensor& bias) {
    if (input.rank() != 3)
        throw ShapeError("conv2d input must be [C,H,W], got " +
                         shape_to_string(input.shape()));
    if (kernels.rank() != 4 || kernels.extent(2) != 3 || kernels.extent(3) != 3)
        throw ShapeError("conv2d kernels must be [C_out,C_in,3,3], got " +
                         shape_to_string(kernels.shape()));
    if (kernels.extent(1) != input.extent(0))
        throw ShapeError("conv2d channel mismatch: input has " +
                         std::to_string(input.extent(0)) +
                         " channels, kernels expect " +
                         std::to_string(kernels.extent(1)));
    if (bias.rank() != 1 || bias.extent(0) != kernels.extent(0))
        throw ShapeError("conv2d bias must be [C_out]");
}

}  // namespace

namespace detail {

void im2col_3x3(const double* input, std::size_t channels, std::size_t h,
                std::size_t w, double* col) {
    const std::size_t plane = h * w;
    for (std::size_t c = 0; c < channels; ++c) {
        const double* in_plane = input + c * plane;
        for (std::size_t dy = 0; dy < 3; ++dy) {
            for (std::size_t dx = 0; dx < 3; ++dx) {
                double* row = col + (c * 9 + dy * 3 + dx) * plane;
                for (std::size_t y = 0; y < h; ++y) {
                    double* dst = row + y * w;
                    const std::ptrdiff_t iy =
                        static_cast<std::ptrdiff_t>(y + dy) - 1;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) {
                        std::memset(dst, 0, w * sizeof(double));
                        continue;
                    }
                    const double* src = in_plane + static_cast<std::size_t>(iy) * w;
                    if (dx == 0) {
                        dst[0] = 0.0;
                        std::memcpy(dst + 1, src, (w - 1) * sizeof(double));
                    } else if (dx == 1) {
                        std::memcpy(dst, src, w * sizeof(double));
                    } else {
                        std::memcpy(dst, src + 1, (w - 1) * sizeof(double));
                        dst[w - 1] = 0.0;
                    }
                }
            }
        }
    }
}

}  // namespace detail

Tensor conv2d_forward(const Tensor& input, const Tensor& kernels,
                      const Tensor& bias) {
    check_conv_shapes(input, kernels, bias);
    const std::size_t c_in = input.extent(0);
    const std::size_t h = input.extent(1);
    const std::size_t w = input.extent(2);
    const std::size_t c_out = kernels.extent(0);
    const std::size_t plane = h * w;

    std::vector<double> col(c_in * 9 * plane);
    detail::im2col_3x3(input.data(), c_in, h, w, col.data());

    Tensor out({c_out, h, w});
    detail::gemm_nn(kernels.data(), col.data(), out.data(), c_out, c_in * 9,
                    plane);
    for (std::size_t o = 0; o < c_out; ++o) {
        const double b = bias[o];
        double* row = out.data() + o * plane;
        for (std::size_t i = 0; i < plane; ++i) row[i] += b;
    }
    return out;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernels,
                            const Tensor& grad_out) {
    if (input.rank() != 3 || kernels.rank() != 4 || kernels.extent(2) != 3 ||
        kernels.extent(3) != 3)
        throw ShapeError("conv2d_backward expects input [C,H,W] and kernels "
                         "[C_out,C_in,3,3]");
    if (kernels.extent(1) != input.extent(0))
        throw ShapeError("conv2d_backward channel mismatch");
    const std::size_t c_in = input.extent(0);
    const std::size_t h = input.extent(1);
    const std::size_t w = input.extent(2);
    const std::size_t c_out = kernels.extent(0);
    const std::size_t plane = h * w;
    if (grad_out.rank() != 3 || grad_out.extent(0) != c_out ||
        grad_out.extent(1) != h || grad_out.extent(2) != w)
        throw ShapeError("conv2d grad_out shape mismatch");

    Conv2dGrads grads{Tensor(input.shape()), Tensor(kernels.shape()),
                      Tensor({c_out})};

    // bias gradient: spatial sum per output channel
    for (std::size_t o = 0; o < c_out; ++o) {
        const double* g = grad_out.data() + o * plane;
        double s = 0.0;
        for (std::size_t i = 0; i < plane; ++i) s += g[i];
        grads.bias[o] = s;
    }

    // weight gradient: grad_out [C_out x HW] times patch matrix^T
    std::vector<double> col(c_in * 9 * plane);
    detail::im2col_3x3(input.data(), c_in, h, w, col.data());
    detail::gemm_nt(grad_out.data(), col.data(), grads.kernels.data(), c_out,
                    plane, c_in * 9);

    // input gradient: convolution of grad_out with spatially flipped,
    // channel-transposed kernels
    std::vector<double> flipped(c_in * c_out * 9);
    for (std::size_t o = 0; o < c_out; ++o)
        for (std::size_t c = 0; c < c_in; ++c)
            for (std::size_t t = 0; t < 9; ++t)
                flipped[(c * c_out + o) * 9 + (8 - t)] =
                    kernels[(o * c_in + c) * 9 + t];
    std::vector<double> gcol(c_out * 9 * plane);
    detail::im2col_3x3(grad_out.data(), c_out, h, w, gcol.data());
    detail::gemm_nn(flipped.data(), gcol.data(), grads.input.data(), c_in,
                    c_out * 9, plane);
    return grads;
}

MaxPoolResult maxpool2(const Tensor& input) {
    if (input.rank() != 3)
        throw ShapeError("maxpool2 input must be [C,H,W]");
    const std::size_t c = input.extent(0);
    const std::size_t h = input.extent(1);
    const std::size_t w = input.extent(2);
    if (h < 2 || w < 2)
        throw ShapeError("maxpool2 requires H,W >= 2, got " +
                         shape_to_string(input.shape()));
    const std::size_t oh = h / 2;
    const std::size_t ow = w / 2;

    MaxPoolResult result;
    result.output = Tensor({c, oh, ow});
    result.argmax.resize(c * oh * ow);
    result.input_shape = input.shape();

    for (std::size_t ch = 0; ch < c; ++ch) {
        const double* plane = input.data() + ch * h * w;
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t x = 0; x < ow; ++x) {
                const std::size_t base = (2 * y) * w + 2 * x;
                // candidates in flat-index order; strict > keeps the
                // smallest index on ties
                std::size_t best = base;
                double best_v = plane[base];
                const std::size_t cand[3] = {base + 1, base + w, base + w + 1};
                for (const std::size_t idx : cand) {
                    if (plane[idx] > best_v) {
                        best_v = plane[idx];
                        best = idx;
                    }
                }
                const std::size_t o = (ch * oh + y) * ow + x;
                result.output[o] = best_v;
                result.argmax[o] = ch * h * w + best;
            }
        }
    }
    return result;
}

Tensor maxpool2_backward(const MaxPoolResult& pooled, const Tensor& grad_out) {
    if (!grad_out.same_shape(pooled.output))
        throw ShapeError("maxpool2_backward grad_out shape mismatch");
    Tensor grad_input(pooled.input_shape);
    for (std::size_t i = 0; i < grad_out.size(); ++i)
        grad_input[pooled.argmax[i]] += grad_out[i];
    return grad_input;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights,
                     const Tensor& bias) {
    if (input.rank() != 1 || weights.rank() != 2 || bias.rank() != 1)
        throw ShapeError("dense_forward expects input [N], weights [M,N], bias [M]");
    const std::size_t n = input.extent(0);
    const std::size_t m = weights.extent(0);
    if (weights.extent(1) != n)
        throw ShapeError("dense_forward: weights expect " +
                         std::to_string(weights.extent(1)) +
                         " inputs, got " + std::to_string(n));
    if (bias.extent(0) != m) throw ShapeError("dense_forward: bias mismatch");

    Tensor out({m});
    detail::gemm_nt(weights.data(), input.data(), out.data(), m, n, 1);
    for (std::size_t i = 0; i < m; ++i) out[i] += bias[i];
    return out;
}

DenseGrads dense_backward(const Tensor& input, const Tensor& weights,
                          const Tensor& grad_out) {
    const std::size_t n = input.extent(0);
    const std::size_t m = weights.extent(0);
    if (weights.extent(1) != n || grad_out.rank() != 1 ||
        grad_out.extent(0) != m)
        throw ShapeError("dense_backward shape mismatch");

    DenseGrads grads{Tensor({n}), Tensor({m, n}), Tensor({m})};
    for (std::size_t i = 0; i < m; ++i) grads.bias[i] = grad_out[i];
    // grad_w[i,j] = grad_out[i] * input[j]; grad_in = W^T grad_out
    for (std::size_t i = 0; i < m; ++i) {
        const double g = grad_out[i];
        const double* wrow = weights.data() + i * n;
        double* grow = grads.weights.data() + i * n;
        double* gin = grads.input.data();
        for (std::size_t j = 0; j < n; ++j) {
            grow[j] = g * input[j];
            gin[j] += g * wrow[j];
        }
    }
    return grads;
}

Tensor relu(const Tensor& input) {
    Tensor out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i)
        out[i] = input[i] > 0.0 ? input[i] : 0.0;
    return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& grad_out) {
    if (!input.same_shape(grad_out))
        throw ShapeError("relu_backward shape mismatch");
    Tensor grad(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i)
        grad[i] = input[i] > 0.0 ? grad_out[i] : 0.0;
    return grad;
}

Tensor softmax(const Tensor& logits) {
    if (logits.rank() != 1 || logits.size() == 0)
        throw ShapeError("softmax expects a nonempty vector");
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logits.size(); ++i) mx = std::max(mx, logits[i]);
    Tensor probs(logits.shape());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - mx);
        sum += probs[i];
    }
    for (std::size_t i = 0; i < logits.size(); ++i) probs[i] /= sum;
    return probs;
}

}  // namespace cropscan
