#include "cropscan/gemm.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace cropscan::detail {

namespace {

constexpr std::size_t kPanelWidth = 16;  // B columns packed per panel

// Thread-local so concurrent callers never share scratch.
thread_local std::vector<double> t_panel;

#if defined(__AVX512F__)

// 8 rows of A against a 16-wide packed panel; full-K accumulation in
// registers, one fused multiply-add per (element, k).
void kernel_8x16(const double* const a[8], const double* panel, std::size_t k,
                 double* const c[8]) {
    __m512d s[8][2];
    for (auto& row : s)
        for (auto& v : row) v = _mm512_setzero_pd();
    for (std::size_t kk = 0; kk < k; ++kk) {
        const __m512d b0 = _mm512_loadu_pd(panel + kk * kPanelWidth);
        const __m512d b1 = _mm512_loadu_pd(panel + kk * kPanelWidth + 8);
        for (std::size_t r = 0; r < 8; ++r) {
            const __m512d v = _mm512_set1_pd(a[r][kk]);
            s[r][0] = _mm512_fmadd_pd(v, b0, s[r][0]);
            s[r][1] = _mm512_fmadd_pd(v, b1, s[r][1]);
        }
    }
    for (std::size_t r = 0; r < 8; ++r) {
        _mm512_storeu_pd(c[r], s[r][0]);
        _mm512_storeu_pd(c[r] + 8, s[r][1]);
    }
}

// 4 rows of A against a 16-wide packed panel; full-K accumulation in
// registers, one fused multiply-add per (element, k).
void kernel_4x16(const double* a0, const double* a1, const double* a2,
                 const double* a3, const double* panel, std::size_t k,
                 double* c0, double* c1, double* c2, double* c3) {
    __m512d s00 = _mm512_setzero_pd(), s01 = _mm512_setzero_pd();
    __m512d s10 = _mm512_setzero_pd(), s11 = _mm512_setzero_pd();
    __m512d s20 = _mm512_setzero_pd(), s21 = _mm512_setzero_pd();
    __m512d s30 = _mm512_setzero_pd(), s31 = _mm512_setzero_pd();
    for (std::size_t kk = 0; kk < k; ++kk) {
        const __m512d b0 = _mm512_loadu_pd(panel + kk * kPanelWidth);
        const __m512d b1 = _mm512_loadu_pd(panel + kk * kPanelWidth + 8);
        const __m512d v0 = _mm512_set1_pd(a0[kk]);
        const __m512d v1 = _mm512_set1_pd(a1[kk]);
        const __m512d v2 = _mm512_set1_pd(a2[kk]);
        const __m512d v3 = _mm512_set1_pd(a3[kk]);
        s00 = _mm512_fmadd_pd(v0, b0, s00);
        s01 = _mm512_fmadd_pd(v0, b1, s01);
        s10 = _mm512_fmadd_pd(v1, b0, s10);
        s11 = _mm512_fmadd_pd(v1, b1, s11);
        s20 = _mm512_fmadd_pd(v2, b0, s20);
        s21 = _mm512_fmadd_pd(v2, b1, s21);
        s30 = _mm512_fmadd_pd(v3, b0, s30);
        s31 = _mm512_fmadd_pd(v3, b1, s31);
    }
    _mm512_storeu_pd(c0, s00);
    _mm512_storeu_pd(c0 + 8, s01);
    _mm512_storeu_pd(c1, s10);
    _mm512_storeu_pd(c1 + 8, s11);
    _mm512_storeu_pd(c2, s20);
    _mm512_storeu_pd(c2 + 8, s21);
    _mm512_storeu_pd(c3, s30);
    _mm512_storeu_pd(c3 + 8, s31);
}

void kernel_1x16(const double* a, const double* panel, std::size_t k,
                 double* c) {
    __m512d s0 = _mm512_setzero_pd(), s1 = _mm512_setzero_pd();
    for (std::size_t kk = 0; kk < k; ++kk) {
        const __m512d v = _mm512_set1_pd(a[kk]);
        s0 = _mm512_fmadd_pd(v, _mm512_loadu_pd(panel + kk * kPanelWidth), s0);
        s1 = _mm512_fmadd_pd(v, _mm512_loadu_pd(panel + kk * kPanelWidth + 8),
                             s1);
    }
    _mm512_storeu_pd(c, s0);
    _mm512_storeu_pd(c + 8, s1);
}

#else

void kernel_8x16(const double* const a[8], const double* panel, std::size_t k,
                 double* const c[8]) {
    double s[8][kPanelWidth] = {};
    for (std::size_t kk = 0; kk < k; ++kk) {
        const double* bp = panel + kk * kPanelWidth;
        for (std::size_t r = 0; r < 8; ++r) {
            const double v = a[r][kk];
            for (std::size_t j = 0; j < kPanelWidth; ++j) s[r][j] += v * bp[j];
        }
    }
    for (std::size_t r = 0; r < 8; ++r) std::memcpy(c[r], s[r], sizeof(s[r]));
}

void kernel_4x16(const double* a0, const double* a1, const double* a2,
                 const double* a3, const double* panel, std::size_t k,
                 double* c0, double* c1, double* c2, double* c3) {
    double s[4][kPanelWidth] = {};
    for (std::size_t kk = 0; kk < k; ++kk) {
        const double* bp = panel + kk * kPanelWidth;
        const double v0 = a0[kk], v1 = a1[kk], v2 = a2[kk], v3 = a3[kk];
        for (std::size_t j = 0; j < kPanelWidth; ++j) {
            s[0][j] += v0 * bp[j];
            s[1][j] += v1 * bp[j];
            s[2][j] += v2 * bp[j];
            s[3][j] += v3 * bp[j];
        }
    }
    std::memcpy(c0, s[0], sizeof(s[0]));
    std::memcpy(c1, s[1], sizeof(s[1]));
    std::memcpy(c2, s[2], sizeof(s[2]));
    std::memcpy(c3, s[3], sizeof(s[3]));
}

void kernel_1x16(const double* a, const double* panel, std::size_t k,
                 double* c) {
    double s[kPanelWidth] = {};
    for (std::size_t kk = 0; kk < k; ++kk) {
        const double v = a[kk];
        const double* bp = panel + kk * kPanelWidth;
        for (std::size_t j = 0; j < kPanelWidth; ++j) s[j] += v * bp[j];
    }
    std::memcpy(c, s, sizeof(s));
}

#endif  // __AVX512F__

// Fixed 8-lane reduction tree shared by both gemm_nt paths.
inline double reduce_lanes(const double lane[8]) {
    const double p0 = lane[0] + lane[4];
    const double p1 = lane[1] + lane[5];
    const double p2 = lane[2] + lane[6];
    const double p3 = lane[3] + lane[7];
    return (p0 + p2) + (p1 + p3);
}

inline double dot_rows(const double* a, const double* b, std::size_t n) {
#if defined(__AVX512F__)
    __m512d acc = _mm512_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        acc = _mm512_fmadd_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i),
                              acc);
    alignas(64) double lane[8];
    _mm512_store_pd(lane, acc);
#else
    double lane[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (std::size_t j = 0; j < 8; ++j) lane[j] += a[i + j] * b[i + j];
#endif
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return reduce_lanes(lane) + tail;
}

}  // namespace

void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
    t_panel.resize(k * kPanelWidth);
    double* panel = t_panel.data();
    double edge[4 * kPanelWidth];

    for (std::size_t n0 = 0; n0 < n; n0 += kPanelWidth) {
        const std::size_t nb = std::min(kPanelWidth, n - n0);
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double* src = b + kk * n + n0;
            double* dst = panel + kk * kPanelWidth;
            std::size_t j = 0;
            for (; j < nb; ++j) dst[j] = src[j];
            for (; j < kPanelWidth; ++j) dst[j] = 0.0;
        }
        const bool full_width = nb == kPanelWidth;
        std::size_t m0 = 0;
        for (; m0 + 8 <= m; m0 += 8) {
            const double* arows[8];
            double* crows[8];
            for (std::size_t r = 0; r < 8; ++r) {
                arows[r] = a + (m0 + r) * k;
                crows[r] = c + (m0 + r) * n + n0;
            }
            if (full_width && !accumulate) {
                kernel_8x16(arows, panel, k, crows);
            } else {
                double wide[8 * kPanelWidth];
                double* tmp[8];
                for (std::size_t r = 0; r < 8; ++r)
                    tmp[r] = wide + r * kPanelWidth;
                kernel_8x16(arows, panel, k, tmp);
                for (std::size_t r = 0; r < 8; ++r)
                    for (std::size_t j = 0; j < nb; ++j) {
                        if (accumulate)
                            crows[r][j] += tmp[r][j];
                        else
                            crows[r][j] = tmp[r][j];
                    }
            }
        }
        for (; m0 + 4 <= m; m0 += 4) {
            double* c0 = c + (m0 + 0) * n + n0;
            double* c1 = c + (m0 + 1) * n + n0;
            double* c2 = c + (m0 + 2) * n + n0;
            double* c3 = c + (m0 + 3) * n + n0;
            if (full_width && !accumulate) {
                kernel_4x16(a + (m0 + 0) * k, a + (m0 + 1) * k,
                            a + (m0 + 2) * k, a + (m0 + 3) * k, panel, k, c0,
                            c1, c2, c3);
            } else {
                kernel_4x16(a + (m0 + 0) * k, a + (m0 + 1) * k,
                            a + (m0 + 2) * k, a + (m0 + 3) * k, panel, k,
                            edge, edge + kPanelWidth, edge + 2 * kPanelWidth,
                            edge + 3 * kPanelWidth);
                double* rows[4] = {c0, c1, c2, c3};
                for (std::size_t i = 0; i < 4; ++i)
                    for (std::size_t j = 0; j < nb; ++j) {
                        const double v = edge[i * kPanelWidth + j];
                        if (accumulate)
                            rows[i][j] += v;
                        else
                            rows[i][j] = v;
                    }
            }
        }
        for (; m0 < m; ++m0) {
            kernel_1x16(a + m0 * k, panel, k, edge);
            double* crow = c + m0 * n + n0;
            for (std::size_t j = 0; j < nb; ++j) {
                if (accumulate)
                    crow[j] += edge[j];
                else
                    crow[j] = edge[j];
            }
        }
    }
}

#if defined(__AVX512F__)
namespace {

// Columns processed per pass; keeps an 8-row A slab inside L1 while the
// B rows stream through. Multiple of 8 so lane tails only occur once.
constexpr std::size_t kDotChunk = 384;

}  // namespace
#endif

void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t p, bool accumulate) {
#if defined(__AVX512F__)
    // 8x2 tile of dot products over n-chunks: eight A rows per pass across
    // the (usually much larger) B side. Reduction order per element is
    // fixed: lanes + tree + tail inside a chunk, chunks in order.
    for (std::size_t n0 = 0; n0 < n; n0 += kDotChunk) {
        const std::size_t nb = std::min(kDotChunk, n - n0);
        const bool overwrite = n0 == 0 && !accumulate;
        std::size_t m0 = 0;
        for (; m0 + 8 <= m; m0 += 8) {
            std::size_t p0 = 0;
            for (; p0 + 2 <= p; p0 += 2) {
                __m512d acc[8][2];
                for (auto& row : acc)
                    for (auto& v : row) v = _mm512_setzero_pd();
                std::size_t i = 0;
                for (; i + 8 <= nb; i += 8) {
                    const __m512d b0 = _mm512_loadu_pd(b + p0 * n + n0 + i);
                    const __m512d b1 =
                        _mm512_loadu_pd(b + (p0 + 1) * n + n0 + i);
                    for (std::size_t r = 0; r < 8; ++r) {
                        const __m512d av =
                            _mm512_loadu_pd(a + (m0 + r) * n + n0 + i);
                        acc[r][0] = _mm512_fmadd_pd(av, b0, acc[r][0]);
                        acc[r][1] = _mm512_fmadd_pd(av, b1, acc[r][1]);
                    }
                }
                for (std::size_t r = 0; r < 8; ++r)
                    for (std::size_t s = 0; s < 2; ++s) {
                        alignas(64) double lane[8];
                        _mm512_store_pd(lane, acc[r][s]);
                        double tail = 0.0;
                        for (std::size_t t = i; t < nb; ++t)
                            tail += a[(m0 + r) * n + n0 + t] *
                                    b[(p0 + s) * n + n0 + t];
                        const double v = reduce_lanes(lane) + tail;
                        double& out = c[(m0 + r) * p + p0 + s];
                        out = overwrite ? v : out + v;
                    }
            }
            for (; p0 < p; ++p0)
                for (std::size_t r = 0; r < 8; ++r) {
                    const double v =
                        dot_rows(a + (m0 + r) * n + n0, b + p0 * n + n0, nb);
                    double& out = c[(m0 + r) * p + p0];
                    out = overwrite ? v : out + v;
                }
        }
        for (; m0 < m; ++m0)
            for (std::size_t p0 = 0; p0 < p; ++p0) {
                const double v =
                    dot_rows(a + m0 * n + n0, b + p0 * n + n0, nb);
                double& out = c[m0 * p + p0];
                out = overwrite ? v : out + v;
            }
    }
#else
    for (std::size_t m0 = 0; m0 < m; ++m0)
        for (std::size_t p0 = 0; p0 < p; ++p0) {
            const double v = dot_rows(a + m0 * n, b + p0 * n, n);
            double& out = c[m0 * p + p0];
            out = accumulate ? out + v : v;
        }
#endif
}

}  // namespace cropscan::detail
