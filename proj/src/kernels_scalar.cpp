#include <cmath>
#include <cstddef>

#include "hls/kernels.hpp"

namespace hls::kernels {
namespace {

void s_vexp(const double* in, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(in[i]);
}

void s_axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double s_dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double s_sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double s_max_abs(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::fabs(x[i]);
        if (a > m) m = a;
    }
    return m;
}

void s_softmax_rows(double* m, std::size_t rows, std::size_t cols) {
    if (cols == 0) return;
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = m + r * cols;
        double mx = row[0];
        for (std::size_t c = 1; c < cols; ++c)
            if (row[c] > mx) mx = row[c];
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            row[c] = std::exp(row[c] - mx);
            s += row[c];
        }
        const double inv = 1.0 / s;
        for (std::size_t c = 0; c < cols; ++c) row[c] *= inv;
    }
}

void s_logsumexp_rows(const double* m, std::size_t rows, std::size_t cols, double* out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = m + r * cols;
        double mx = row[0];
        for (std::size_t c = 1; c < cols; ++c)
            if (row[c] > mx) mx = row[c];
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += std::exp(row[c] - mx);
        out[r] = mx + std::log(s);
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{
        "scalar", s_vexp, s_axpy, s_dot, s_sum, s_max_abs, s_softmax_rows, s_logsumexp_rows,
    };
    return ops;
}

}  // namespace hls::kernels
