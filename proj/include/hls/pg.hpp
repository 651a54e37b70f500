// Polya-Gamma sampling via a truncated gamma series with a moment-matched
// gamma tail correction.
#pragma once

#include "hls/common.hpp"

namespace hls {

/// Analytic PG(b, c) mean with the numerically-stable branches at
/// c <= 1e-3 and c >= 300.
double pg_mean(double b, double c);

/// Analytic PG(b, c) variance with the same branch structure.
double pg_var(double b, double c);

/// Draws X ~ PG(b, c): K gamma-series terms g_k ~ Gamma(b, 1) weighted by
/// 1 / (2 pi^2 ((k - 1/2)^2 + c^2 / (4 pi^2))) plus a gamma tail whose
/// mean/variance bring the total moments to the analytic PG values.
/// Strictly positive; b must be > 0.
double sample_pg(double b, double c, int truncation, Rng& rng);

}  // namespace hls
