#pragma once

#include <cstddef>
#include <vector>

#include "cropscan/tensor.hpp"

namespace cropscan {

// Numeric kernels shared by the network layers. All functions are pure:
// inputs are immutable, results are returned, and concurrent calls are safe.

/// 3x3 convolution, stride 1, zero padding 1 (same-size output).
/// input [C_in,H,W], kernels [C_out,C_in,3,3], bias [C_out] -> [C_out,H,W].
Tensor conv2d_forward(const Tensor& input, const Tensor& kernels,
                      const Tensor& bias);

struct Conv2dGrads {
    Tensor input;    // [C_in,H,W]
    Tensor kernels;  // [C_out,C_in,3,3]
    Tensor bias;     // [C_out]
};

/// Gradients of conv2d_forward with respect to all three operands.
Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernels,
                            const Tensor& grad_out);

struct MaxPoolResult {
    Tensor output;                   // [C, H/2, W/2]
    std::vector<std::size_t> argmax; // flat input index per output element
    std::vector<std::size_t> input_shape;
};

/// 2x2 max pooling, stride 2; odd trailing row/column dropped.
/// Ties resolve to the smallest flat input index.
MaxPoolResult maxpool2(const Tensor& input);

/// Routes each output gradient to the recorded argmax position.
Tensor maxpool2_backward(const MaxPoolResult& pooled, const Tensor& grad_out);

/// out = weights * input + bias. input [N], weights [M,N], bias [M] -> [M].
Tensor dense_forward(const Tensor& input, const Tensor& weights,
                     const Tensor& bias);

struct DenseGrads {
    Tensor input;
    Tensor weights;
    Tensor bias;
};

DenseGrads dense_backward(const Tensor& input, const Tensor& weights,
                          const Tensor& grad_out);

/// Elementwise max(0, x).
Tensor relu(const Tensor& input);

/// grad_out masked by input > 0.
Tensor relu_backward(const Tensor& input, const Tensor& grad_out);

/// Numerically stable softmax (max subtraction); output sums to 1.
Tensor softmax(const Tensor& logits);

namespace detail {

/// Patch matrix for 3x3/pad-1 convolution: col[(c*9+t) * (H*W) + y*W+x] =
/// input[c, y+dy-1, x+dx-1] with t = dy*3+dx, zero outside bounds.
/// `col` must hold channels*9*H*W doubles.
void im2col_3x3(const double* input, std::size_t channels, std::size_t h,
                std::size_t w, double* col);

}  // namespace detail

}  // namespace cropscan
