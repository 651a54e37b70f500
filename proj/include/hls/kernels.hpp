// Vector kernels behind the numeric hot loops: row-wise softmax /
// log-sum-exp and flat reductions. A scalar reference implementation is
// always available; an AVX2 variant is selected at runtime when the CPU
// supports it. Variants are interchangeable up to floating-point
// reassociation and are equivalence-tested against each other.
#pragma once

#include <cstddef>

namespace hls::kernels {

struct Ops {
    const char* name;
    // out[i] = exp(in[i])
    void (*vexp)(const double* in, double* out, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*max_abs)(const double* x, std::size_t n);
    // In-place row-wise softmax of a row-major rows x cols matrix.
    void (*softmax_rows)(double* m, std::size_t rows, std::size_t cols);
    // out[r] = log(sum_c exp(m[r,c])), computed with max subtraction.
    void (*logsumexp_rows)(const double* m, std::size_t rows, std::size_t cols, double* out);
};

const Ops& scalar_ops();

// Null when the binary or the CPU lacks AVX2+FMA.
const Ops* avx2_ops();

// The dispatched implementation. Honors HLS_KERNELS=scalar|avx2 once at
// first use; defaults to the widest supported variant.
const Ops& active();

// Test hook: force a variant by name ("scalar", "avx2"); throws
// hls::ConfigError if unavailable.
void force(const char* name);

}  // namespace hls::kernels
