#pragma once

#include <cstddef>

namespace cropscan::detail {

// Row-major matrix products backing the convolution and dense kernels.
//
// Determinism contract: for a fixed build, every output element is reduced
// in a fixed operand order that does not depend on matrix size, alignment
// or calling context, so repeated runs are bit-identical.

/// C[M x N] = A[M x K] * B[K x N]; accumulates into C when `accumulate`.
/// Per-element reduction runs over k in increasing order (matches the
/// naive triple loop).
void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate = false);

/// C[M x P] = A[M x N] * B[P x N]^T; rows of A dotted with rows of B.
/// Reduction order per element: eight interleaved lanes over n, combined
/// by a fixed tree, then the scalar tail in order.
void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t p, bool accumulate = false);

}  // namespace cropscan::detail
