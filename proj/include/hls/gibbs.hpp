// Gibbs sampler for the global-local shrinkage hierarchy with Polya-Gamma
// augmentation: Bayesian ridge and horseshoe priors, half-Cauchy or
// inverse-gamma hyperpriors.
#pragma once

#include <cstdint>
#include <string>

#include "hls/cpt_tree.hpp"

namespace hls {

class Rng;

enum class GlsPrior { Ridge, Horseshoe };
enum class ScalePrior { HalfCauchy, InverseGamma };

struct GlsConfig {
    GlsPrior prior = GlsPrior::Ridge;
    ScalePrior tau_prior = ScalePrior::InverseGamma;
    ScalePrior lambda_prior = ScalePrior::HalfCauchy;  // horseshoe only
    double ig_shape = 0.5;  // inverse-gamma hyperprior parameters
    double ig_scale = 0.5;
    int burn_in = 100;
    int n_samples = 400;
    int thin = 1;
    int pg_truncation = 2;
    std::uint64_t seed = 1;
    bool intercept = false;   // flat-prior extra column (zero-parent trees)
    bool fix_tau = false;     // hold tau^2 at fixed_tau2 (tests)
    double fixed_tau2 = 1.0;
    std::string trace_path;   // optional "iteration tau frobenius(B)" dump

    void validate() const;
};

/// Full sampler state. omega rows with zero counts are never used and stay
/// at their initial value 1. lambda2 is identically 1 under the ridge prior.
struct ShrinkageState {
    Eigen::MatrixXd coeffs;     // (cols [+1 intercept]) x |X_c|
    Eigen::MatrixXd omega;      // design rows x |X_c|
    Eigen::MatrixXd lambda2;    // penalized cols x |X_c|
    Eigen::MatrixXd nu_lambda;  // half-Cauchy auxiliaries for lambda2
    double tau2 = 1.0;
    double nu_tau = 1.0;

    static ShrinkageState init(const DesignMatrix& design, const GlsConfig& config);
    void check_invariants() const;
};

/// One systematic sweep: per class k, refresh omega_k ~ PG(n_i, margin) and
/// draw the class-k coefficient column from its Gaussian conditional; then
/// update tau (and lambda for the horseshoe) under the configured hyperprior.
void gibbs_sweep(ShrinkageState& state, const DesignMatrix& design, const GlsConfig& config,
                 Rng& rng);

/// The hyperprior tail of a sweep (lambda then tau updates) in isolation;
/// exposed so the conjugate conditionals can be tested directly.
void draw_shrinkage_scales(ShrinkageState& state, const GlsConfig& config, Rng& rng);

struct ChainDiagnostics {
    int kept = 0;
    double ess_tau = 0.0;
    Eigen::VectorXd ess_coeff;  // per coefficient, vec order (class-major)
};

struct BayesFit {
    Cpt theta;  // posterior mean of softmax(U B), averaged over kept samples
    ChainDiagnostics diagnostics;
    ShrinkageState state;  // final sampler state
};

BayesFit fit_bayes(const DesignMatrix& design, const GlsConfig& config);

/// Effective sample size by Geyer's initial-positive-sequence estimator.
double effective_sample_size(std::span<const double> chain);

}  // namespace hls
