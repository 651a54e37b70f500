#include "hls/gibbs.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "hls/common.hpp"
#include "hls/design_ops.hpp"
#include "hls/kernels.hpp"
#include "hls/pg.hpp"

namespace hls {
namespace {

using detail::FlatDesign;
using detail::PairPattern;
using detail::RowMajorMatrix;

constexpr double kScaleFloor = 1e-300;
constexpr double kScaleCeil = 1e300;

double clamp_scale(double v) {
    if (!(v > kScaleFloor)) return kScaleFloor;
    if (v > kScaleCeil) return kScaleCeil;
    return v;
}

// log sum_{l != k} exp(eta_l), stable.
double offset_excluding(const Eigen::RowVectorXd& eta, int k) {
    double m = -std::numeric_limits<double>::infinity();
    for (int l = 0; l < eta.size(); ++l)
        if (l != k && eta[l] > m) m = eta[l];
    double s = 0.0;
    for (int l = 0; l < eta.size(); ++l)
        if (l != k) s += std::exp(eta[l] - m);
    return m + std::log(s);
}

struct SweepWorkspace {
    FlatDesign fd;
    PairPattern pattern;
    RowMajorMatrix eta;

    SweepWorkspace(const DesignMatrix& design, const GlsConfig& config)
        : fd(FlatDesign::from(design, config.intercept)),
          pattern(PairPattern::build(fd)) {}

    void refresh_eta(const Eigen::MatrixXd& coeffs) {
        const RowMajorMatrix rm = coeffs;
        eta = detail::compute_eta(fd, rm);
    }

    void update_eta_column(const Eigen::MatrixXd& coeffs, int k) {
        for (std::int64_t i = 0; i < fd.rows; ++i) {
            double v = 0.0;
            for (const std::int64_t j : fd.row_cols(i)) v += coeffs(j, k);
            eta(i, k) = v;
        }
    }
};

void sweep_impl(ShrinkageState& state, const DesignMatrix& design, const GlsConfig& config,
                SweepWorkspace& ws, Rng& rng) {
    const int c = static_cast<int>(design.counts.cols());
    const std::int64_t ncols = ws.fd.cols;
    const std::int64_t penalized = ws.fd.base_cols;
    const Eigen::VectorXd& wtot = design.row_total;

    Eigen::VectorXd omega_col(ws.fd.rows);
    Eigen::VectorXd rhs(ncols);
    Eigen::VectorXd prior_diag(ncols);

    for (int k = 0; k < c; ++k) {
        // PG refresh for class k at the current margins, then the Gaussian
        // conditional for its coefficient column.
        omega_col.setZero();
        rhs.setZero();
        for (std::int64_t i = 0; i < ws.fd.rows; ++i) {
            if (wtot[i] <= 0.0) continue;
            const double offset = offset_excluding(ws.eta.row(i), k);
            const double psi = ws.eta(i, k) - offset;
            const double om = sample_pg(wtot[i], psi, config.pg_truncation, rng);
            state.omega(i, k) = om;
            omega_col[i] = om;
            const double kappa = design.counts(i, k) - 0.5 * wtot[i];
            const double pull = kappa + om * offset;
            for (const std::int64_t j : ws.fd.row_cols(i)) rhs[j] += pull;
        }
        for (std::int64_t j = 0; j < ncols; ++j) {
            if (j < penalized)
                prior_diag[j] = 1.0 / clamp_scale(state.lambda2(j, k) * state.tau2);
            else
                prior_diag[j] = 0.0;  // flat intercept prior
        }
        const Eigen::SparseMatrix<double> prec =
            ws.pattern.weighted_gram(omega_col, prior_diag);
        const Eigen::VectorXd draw = detail::sample_gaussian_precision(prec, rhs, rng);
        for (std::int64_t j = 0; j < ncols; ++j) state.coeffs(j, k) = draw[j];
        ws.update_eta_column(state.coeffs, k);
    }

    draw_shrinkage_scales(state, config, rng);
}

}  // namespace

void GlsConfig::validate() const {
    if (n_samples < 1) throw ConfigError("gls: n_samples must be >= 1");
    if (burn_in < 0) throw ConfigError("gls: burn_in must be >= 0");
    if (thin < 1) throw ConfigError("gls: thin must be >= 1");
    if (pg_truncation < 1) throw ConfigError("gls: pg_truncation must be >= 1");
    if (!(ig_shape > 0.0) || !(ig_scale > 0.0))
        throw ConfigError("gls: inverse-gamma hyperparameters must be positive");
}

ShrinkageState ShrinkageState::init(const DesignMatrix& design, const GlsConfig& config) {
    ShrinkageState s;
    const int c = static_cast<int>(design.counts.cols());
    const std::int64_t ncols = design.cols + (config.intercept ? 1 : 0);
    s.coeffs = Eigen::MatrixXd::Zero(ncols, c);
    s.omega = Eigen::MatrixXd::Ones(design.rows, c);
    s.lambda2 = Eigen::MatrixXd::Ones(design.cols, c);
    s.nu_lambda = Eigen::MatrixXd::Ones(design.cols, c);
    s.tau2 = config.fix_tau ? config.fixed_tau2 : 1.0;
    s.nu_tau = 1.0;
    return s;
}

void ShrinkageState::check_invariants() const {
    if (!(tau2 > 0.0)) throw ContractViolation("state: tau^2 must be positive");
    if ((omega.array() <= 0.0).any())
        throw ContractViolation("state: omega must be strictly positive");
    if ((lambda2.array() <= 0.0).any())
        throw ContractViolation("state: lambda^2 must be strictly positive");
    if (!coeffs.allFinite()) throw ContractViolation("state: coefficients must be finite");
}

void gibbs_sweep(ShrinkageState& state, const DesignMatrix& design, const GlsConfig& config,
                 Rng& rng) {
    config.validate();
    SweepWorkspace ws(design, config);
    ws.refresh_eta(state.coeffs);
    sweep_impl(state, design, config, ws, rng);
}

void draw_shrinkage_scales(ShrinkageState& state, const GlsConfig& config, Rng& rng) {
    const std::int64_t penalized = state.lambda2.rows();
    const int c = static_cast<int>(state.coeffs.cols());

    if (config.prior == GlsPrior::Horseshoe) {
        for (std::int64_t j = 0; j < penalized; ++j)
            for (int k = 0; k < c; ++k) {
                const double b2 = state.coeffs(j, k) * state.coeffs(j, k);
                if (config.lambda_prior == ScalePrior::HalfCauchy) {
                    state.lambda2(j, k) = clamp_scale(
                        rng.inv_gamma(1.0, 1.0 / state.nu_lambda(j, k) +
                                               b2 / (2.0 * state.tau2)));
                    state.nu_lambda(j, k) =
                        clamp_scale(rng.inv_gamma(1.0, 1.0 + 1.0 / state.lambda2(j, k)));
                } else {
                    state.lambda2(j, k) = clamp_scale(rng.inv_gamma(
                        config.ig_shape + 0.5, config.ig_scale + b2 / (2.0 * state.tau2)));
                }
            }
    }

    if (!config.fix_tau) {
        double quad = 0.0;
        for (std::int64_t j = 0; j < penalized; ++j)
            for (int k = 0; k < c; ++k)
                quad += state.coeffs(j, k) * state.coeffs(j, k) / state.lambda2(j, k);
        const double m = static_cast<double>(penalized) * c;
        if (config.tau_prior == ScalePrior::InverseGamma) {
            state.tau2 = clamp_scale(
                rng.inv_gamma(config.ig_shape + 0.5 * m, config.ig_scale + 0.5 * quad));
        } else {
            state.tau2 = clamp_scale(
                rng.inv_gamma(0.5 * (m + 1.0), 1.0 / state.nu_tau + 0.5 * quad));
            state.nu_tau = clamp_scale(rng.inv_gamma(1.0, 1.0 + 1.0 / state.tau2));
        }
    } else {
        state.tau2 = config.fixed_tau2;
    }
}

double effective_sample_size(std::span<const double> chain) {
    const std::size_t n = chain.size();
    if (n < 4) return static_cast<double>(n);
    double mean = 0.0;
    for (const double v : chain) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const double v : chain) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    if (var <= 0.0) return static_cast<double>(n);

    const auto rho = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i)
            acc += (chain[i] - mean) * (chain[i + lag] - mean);
        return acc / (static_cast<double>(n) * var);
    };
    // Geyer: sum paired autocorrelations while the pair sums stay positive.
    double sum = 0.0;
    for (std::size_t t = 1; t + 1 < n / 2; t += 2) {
        const double pair = rho(t) + rho(t + 1);
        if (pair <= 0.0) break;
        sum += pair;
    }
    const double denom = 1.0 + 2.0 * sum;
    return static_cast<double>(n) / std::max(denom, 1e-12);
}

BayesFit fit_bayes(const DesignMatrix& design, const GlsConfig& config) {
    config.validate();
    const int c = static_cast<int>(design.counts.cols());
    Rng rng(config.seed);
    ShrinkageState state = ShrinkageState::init(design, config);
    SweepWorkspace ws(design, config);
    ws.refresh_eta(state.coeffs);

    std::ofstream trace;
    if (!config.trace_path.empty()) {
        trace.open(config.trace_path);
        if (!trace) throw ConfigError("fit_bayes: cannot open trace file " + config.trace_path);
        trace << "iteration tau coeff_frobenius\n";
    }

    const std::int64_t ncols = ws.fd.cols;
    const int total = config.burn_in + config.n_samples * config.thin;
    RowMajorMatrix theta_acc = RowMajorMatrix::Zero(design.rows, c);
    RowMajorMatrix theta_buf(design.rows, c);
    std::vector<double> tau_chain;
    tau_chain.reserve(config.n_samples);
    Eigen::MatrixXd coeff_chain(config.n_samples, ncols * c);

    int kept = 0;
    for (int it = 0; it < total; ++it) {
        sweep_impl(state, design, config, ws, rng);
        if (trace.is_open())
            trace << it << ' ' << std::sqrt(state.tau2) << ' ' << state.coeffs.norm() << '\n';
        if (it < config.burn_in) continue;
        if ((it - config.burn_in) % config.thin != 0) continue;
        theta_buf = ws.eta;
        kernels::active().softmax_rows(theta_buf.data(),
                                       static_cast<std::size_t>(design.rows),
                                       static_cast<std::size_t>(c));
        kernels::active().axpy(1.0, theta_buf.data(), theta_acc.data(),
                               static_cast<std::size_t>(design.rows) * c);
        tau_chain.push_back(std::sqrt(state.tau2));
        for (std::int64_t j = 0; j < ncols; ++j)
            for (int k = 0; k < c; ++k)
                coeff_chain(kept, static_cast<std::int64_t>(k) * ncols + j) =
                    state.coeffs(j, k);
        ++kept;
    }

    BayesFit out;
    out.theta = Cpt(theta_acc) / static_cast<double>(kept);
    out.diagnostics.kept = kept;
    out.diagnostics.ess_tau = effective_sample_size(tau_chain);
    out.diagnostics.ess_coeff.resize(ncols * c);
    std::vector<double> col(kept);
    for (std::int64_t q = 0; q < ncols * c; ++q) {
        for (int i = 0; i < kept; ++i) col[static_cast<std::size_t>(i)] = coeff_chain(i, q);
        out.diagnostics.ess_coeff[q] = effective_sample_size(col);
    }
    out.state = std::move(state);
    return out;
}

}  // namespace hls
