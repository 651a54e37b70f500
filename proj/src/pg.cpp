#include "hls/pg.hpp"

#include <cmath>

namespace hls {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSmallC = 1e-3;
constexpr double kLargeC = 300.0;

}  // namespace

double pg_mean(double b, double c) {
    c = std::fabs(c);
    if (c <= kSmallC) return b / 4.0;
    if (c >= kLargeC) return b / (2.0 * c);
    // (exp(c) - 1) / (exp(c) + 1) * b / (2c), via expm1 for stability
    const double em1 = std::expm1(c);
    return em1 / (em1 + 2.0) * b / (2.0 * c);
}

double pg_var(double b, double c) {
    c = std::fabs(c);
    if (c <= kSmallC) return b / 24.0;
    if (c >= kLargeC) return b / (2.0 * c * c * c);
    // b (exp(2c) - 2c exp(c) - 1) / (2 c^3 (exp(c) + 1)^2), rescaled by
    // exp(-2c) so no term overflows
    const double e = std::exp(-c);
    const double num = 1.0 - 2.0 * c * e - e * e;
    const double den = 2.0 * c * c * c * (1.0 + e) * (1.0 + e);
    return b * num / den;
}

double sample_pg(double b, double c, int truncation, Rng& rng) {
    if (!(b > 0.0)) throw ContractViolation("sample_pg: b must be positive");
    if (truncation < 1) throw ContractViolation("sample_pg: truncation must be >= 1");
    c = std::fabs(c);

    const double c_term = c * c / (4.0 * kPi * kPi);
    double x = 0.0;
    double series_mean = 0.0;
    double series_var = 0.0;
    for (int k = 1; k <= truncation; ++k) {
        const double km = static_cast<double>(k) - 0.5;
        const double coeff = 1.0 / (2.0 * kPi * kPi * (km * km + c_term));
        x += coeff * rng.gamma(b, 1.0);
        series_mean += coeff * b;
        series_var += coeff * coeff * b;
    }

    const double tail_mean = pg_mean(b, c) - series_mean;
    const double tail_var = pg_var(b, c) - series_var;
    if (tail_mean > 0.0 && tail_var > 0.0) {
        const double shape = tail_mean * tail_mean / tail_var;
        const double scale = tail_var / tail_mean;
        x += rng.gamma(shape, scale);
    } else if (tail_mean > 0.0) {
        x += tail_mean;  // vanishing tail variance: deterministic remainder
    }
    return x;
}

}  // namespace hls
