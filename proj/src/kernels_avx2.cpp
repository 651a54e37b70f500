// AVX2+FMA kernel variants. Compiled with -mavx2 -mfma; only reachable
// behind the runtime CPU check in the dispatcher.
#include <cmath>
#include <cstddef>
#include <limits>

#include "hls/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace hls::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    const __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    const __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

// Cephes-style double-precision exp: range reduction r = x - n*ln2 with the
// split-constant trick, Pade approximant in r^2, then scaling by 2^n applied
// in two halves so the full double range (denormals included) survives.
inline __m256d exp4d(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);
    const __m256d max_x = _mm256_set1_pd(709.782712893383996732);
    const __m256d min_x = _mm256_set1_pd(-745.51);

    const __m256d over = _mm256_cmp_pd(x, max_x, _CMP_GT_OQ);
    const __m256d under = _mm256_cmp_pd(x, min_x, _CMP_LT_OQ);
    const __m256d is_nan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);

    const __m256d xc = _mm256_min_pd(_mm256_max_pd(x, min_x), max_x);
    const __m256d nd = _mm256_round_pd(_mm256_mul_pd(xc, log2e),
                                       _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(nd, ln2_hi, xc);
    r = _mm256_fnmadd_pd(nd, ln2_lo, r);
    const __m256d rr = _mm256_mul_pd(r, r);

    __m256d px = _mm256_fmadd_pd(p0, rr, p1);
    px = _mm256_fmadd_pd(px, rr, p2);
    px = _mm256_mul_pd(px, r);
    __m256d qx = _mm256_fmadd_pd(q0, rr, q1);
    qx = _mm256_fmadd_pd(qx, rr, q2);
    qx = _mm256_fmadd_pd(qx, rr, q3);

    const __m256d one = _mm256_set1_pd(1.0);
    __m256d e = _mm256_fmadd_pd(_mm256_set1_pd(2.0),
                                _mm256_div_pd(px, _mm256_sub_pd(qx, px)), one);

    const __m128i n32 = _mm256_cvtpd_epi32(nd);
    const __m128i n32a = _mm_srai_epi32(n32, 1);
    const __m128i n32b = _mm_sub_epi32(n32, n32a);
    const __m256i bias = _mm256_set1_epi64x(1023);
    const __m256i pa =
        _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n32a), bias), 52);
    const __m256i pb =
        _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n32b), bias), 52);
    e = _mm256_mul_pd(_mm256_mul_pd(e, _mm256_castsi256_pd(pa)), _mm256_castsi256_pd(pb));

    e = _mm256_blendv_pd(e, _mm256_set1_pd(std::numeric_limits<double>::infinity()), over);
    e = _mm256_blendv_pd(e, _mm256_setzero_pd(), under);
    e = _mm256_blendv_pd(e, x, is_nan);
    return e;
}

void a_vexp(const double* in, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, exp4d(_mm256_loadu_pd(in + i)));
    for (; i < n; ++i) out[i] = std::exp(in[i]);
}

void a_axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d yv = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

double a_dot(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double a_sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double a_max_abs(const double* x, std::size_t n) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i)));
    double m = hmax(acc);
    for (; i < n; ++i) {
        const double a = std::fabs(x[i]);
        if (a > m) m = a;
    }
    return m;
}

inline double row_max(const double* row, std::size_t cols) {
    std::size_t c = 0;
    double mx = -std::numeric_limits<double>::infinity();
    if (cols >= 4) {
        __m256d acc = _mm256_loadu_pd(row);
        for (c = 4; c + 4 <= cols; c += 4)
            acc = _mm256_max_pd(acc, _mm256_loadu_pd(row + c));
        mx = hmax(acc);
    }
    for (; c < cols; ++c)
        if (row[c] > mx) mx = row[c];
    return mx;
}

void a_softmax_rows(double* m, std::size_t rows, std::size_t cols) {
    if (cols == 0) return;
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = m + r * cols;
        const double mx = row_max(row, cols);
        const __m256d mxv = _mm256_set1_pd(mx);
        __m256d accv = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            const __m256d e = exp4d(_mm256_sub_pd(_mm256_loadu_pd(row + c), mxv));
            _mm256_storeu_pd(row + c, e);
            accv = _mm256_add_pd(accv, e);
        }
        double s = hsum(accv);
        for (; c < cols; ++c) {
            row[c] = std::exp(row[c] - mx);
            s += row[c];
        }
        const double inv = 1.0 / s;
        const __m256d invv = _mm256_set1_pd(inv);
        for (c = 0; c + 4 <= cols; c += 4)
            _mm256_storeu_pd(row + c, _mm256_mul_pd(_mm256_loadu_pd(row + c), invv));
        for (; c < cols; ++c) row[c] *= inv;
    }
}

void a_logsumexp_rows(const double* m, std::size_t rows, std::size_t cols, double* out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = m + r * cols;
        const double mx = row_max(row, cols);
        const __m256d mxv = _mm256_set1_pd(mx);
        __m256d accv = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4)
            accv = _mm256_add_pd(accv, exp4d(_mm256_sub_pd(_mm256_loadu_pd(row + c), mxv)));
        double s = hsum(accv);
        for (; c < cols; ++c) s += std::exp(row[c] - mx);
        out[r] = mx + std::log(s);
    }
}

}  // namespace

const Ops* avx2_ops() {
    if (!(__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))) return nullptr;
    static const Ops ops{
        "avx2", a_vexp, a_axpy, a_dot, a_sum, a_max_abs, a_softmax_rows, a_logsumexp_rows,
    };
    return &ops;
}

}  // namespace hls::kernels

#else  // non-x86 builds fall back to the scalar reference

namespace hls::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace hls::kernels

#endif
