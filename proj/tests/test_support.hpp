// Shared oracles for the sampler test suites: a 2-D quadrature ground truth
// for the depth-1 binary ridge + inverse-gamma model, and a Geweke
// forward/successive-conditional harness over the shrinkage hierarchy.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "hls/common.hpp"
#include "hls/cpt_tree.hpp"
#include "hls/gibbs.hpp"

namespace testsupport {

// Posterior mean of theta for a depth-1 binary-parent, binary-class tree
// under the ridge hierarchy with tau^2 ~ IG(a, b). The four coefficients
// reduce to the per-leaf log-odds delta_i = beta_i1 - beta_i0; the gauge
// directions integrate out and tau marginalizes analytically, leaving
//   p(delta | Y) proportional to L(delta) * (b + |delta|^2 / 4)^{-(a + 1)}
// which a 2-D tangent-substitution grid integrates to high accuracy.
inline Eigen::MatrixXd quadrature_theta_depth1(const Eigen::MatrixXd& counts, double a,
                                               double b, int grid_points = 801) {
    if (counts.rows() != 2 || counts.cols() != 2)
        throw hls::ContractViolation("quadrature oracle expects 2x2 counts");
    const double n0 = counts(0, 0) + counts(0, 1);
    const double n1 = counts(1, 0) + counts(1, 1);

    const auto log_lik = [&](double d0, double d1) {
        // theta_{i,1} = sigmoid(delta_i)
        double ll = 0.0;
        if (n0 > 0) {
            const double l0 = -std::log1p(std::exp(-d0));   // log sigmoid(d0)
            const double l0c = -std::log1p(std::exp(d0));   // log (1 - sigmoid)
            ll += counts(0, 1) * l0 + counts(0, 0) * l0c;
        }
        if (n1 > 0) {
            const double l1 = -std::log1p(std::exp(-d1));
            const double l1c = -std::log1p(std::exp(d1));
            ll += counts(1, 1) * l1 + counts(1, 0) * l1c;
        }
        return ll;
    };

    const double half_pi = 1.5707963267948966;
    const int n = grid_points;
    double z = 0.0, m0 = 0.0, m1 = 0.0;
    for (int i = 1; i < n; ++i) {
        const double u0 = -half_pi + (2.0 * half_pi * i) / n;
        const double d0 = std::tan(u0);
        const double j0 = 1.0 / (std::cos(u0) * std::cos(u0));
        for (int j = 1; j < n; ++j) {
            const double u1 = -half_pi + (2.0 * half_pi * j) / n;
            const double d1 = std::tan(u1);
            const double j1 = 1.0 / (std::cos(u1) * std::cos(u1));
            const double prior =
                std::pow(b + 0.25 * (d0 * d0 + d1 * d1), -(a + 1.0));
            const double wgt = std::exp(log_lik(d0, d1)) * prior * j0 * j1;
            z += wgt;
            m0 += wgt / (1.0 + std::exp(-d0));
            m1 += wgt / (1.0 + std::exp(-d1));
        }
    }
    Eigen::MatrixXd theta(2, 2);
    theta(0, 1) = m0 / z;
    theta(0, 0) = 1.0 - theta(0, 1);
    theta(1, 1) = m1 / z;
    theta(1, 0) = 1.0 - theta(1, 1);
    return theta;
}

// ---------------------------------------------------------------------------
// Geweke joint-distribution harness on the 2-leaf binary model. The
// statistics are bounded transforms (tanh of a coefficient, log of tau^2)
// whose moments exist under every configured hyperprior.

struct GewekeStats {
    double g_beta = 0.0;     // tanh(beta_00)
    double g_beta2 = 0.0;    // tanh(beta_00)^2
    double g_logtau = 0.0;   // log tau^2
    double g_logtau2 = 0.0;  // (log tau^2)^2
};

struct GewekeResult {
    std::vector<double> z_scores;  // one per statistic
    double max_abs_z = 0.0;
};

class GewekeHarness {
  public:
    GewekeHarness(const hls::GlsConfig& config, Eigen::Vector2d leaf_totals)
        : config_(config), totals_(leaf_totals) {
        hls::Dataset d;
        d.n_rows = 1;
        d.class_index = 1;
        d.names = {"x", "y"};
        d.cardinalities = {2, 2};
        d.columns = {{0}, {0}};
        d.raw.resize(2);
        d.labels = {{"0", "1"}, {"0", "1"}};
        tree_ = hls::build_tree_ordered(d, 1, std::vector<int>{0});
        design_ = hls::build_design(tree_, false);
    }

    GewekeResult run(int n_forward, int n_chain, std::uint64_t seed) {
        hls::Rng rng(seed);
        std::vector<GewekeStats> fwd;
        fwd.reserve(n_forward);
        for (int i = 0; i < n_forward; ++i) {
            const hls::ShrinkageState s = forward_draw(rng);
            fwd.push_back(stats_of(s));
        }

        // successive-conditional chain: start at a forward draw, then
        // alternate (sweep | data) and (data | state)
        hls::ShrinkageState state = forward_draw(rng);
        std::vector<GewekeStats> chain;
        chain.reserve(n_chain);
        for (int i = 0; i < n_chain; ++i) {
            hls::gibbs_sweep(state, design_, config_, rng);
            redraw_data(state, rng);
            chain.push_back(stats_of(state));
        }

        GewekeResult result;
        for (int q = 0; q < 4; ++q) {
            const auto pick = [&](const GewekeStats& s) {
                switch (q) {
                    case 0: return s.g_beta;
                    case 1: return s.g_beta2;
                    case 2: return s.g_logtau;
                    default: return s.g_logtau2;
                }
            };
            std::vector<double> a, b;
            for (const auto& s : fwd) a.push_back(pick(s));
            for (const auto& s : chain) b.push_back(pick(s));
            const double ma = mean(a), mb = mean(b);
            const double va = var(a, ma), vb = var(b, mb);
            const double essb = hls::effective_sample_size(b);
            const double se =
                std::sqrt(va / static_cast<double>(a.size()) + vb / std::max(essb, 2.0));
            const double z = (ma - mb) / se;
            result.z_scores.push_back(z);
            result.max_abs_z = std::max(result.max_abs_z, std::fabs(z));
        }
        return result;
    }

  private:
    static double mean(const std::vector<double>& v) {
        double s = 0.0;
        for (const double x : v) s += x;
        return s / static_cast<double>(v.size());
    }
    static double var(const std::vector<double>& v, double m) {
        double s = 0.0;
        for (const double x : v) s += (x - m) * (x - m);
        return s / static_cast<double>(v.size() - 1);
    }

    hls::ShrinkageState forward_draw(hls::Rng& rng) {
        hls::ShrinkageState s = hls::ShrinkageState::init(design_, config_);
        if (config_.tau_prior == hls::ScalePrior::HalfCauchy) {
            s.nu_tau = rng.inv_gamma(0.5, 1.0);
            s.tau2 = rng.inv_gamma(0.5, 1.0 / s.nu_tau);
        } else {
            s.tau2 = rng.inv_gamma(config_.ig_shape, config_.ig_scale);
        }
        for (Eigen::Index j = 0; j < s.lambda2.rows(); ++j)
            for (Eigen::Index k = 0; k < s.lambda2.cols(); ++k) {
                if (config_.prior == hls::GlsPrior::Ridge) {
                    s.lambda2(j, k) = 1.0;
                } else if (config_.lambda_prior == hls::ScalePrior::HalfCauchy) {
                    s.nu_lambda(j, k) = rng.inv_gamma(0.5, 1.0);
                    s.lambda2(j, k) = rng.inv_gamma(0.5, 1.0 / s.nu_lambda(j, k));
                } else {
                    s.lambda2(j, k) = rng.inv_gamma(config_.ig_shape, config_.ig_scale);
                }
            }
        for (Eigen::Index j = 0; j < s.coeffs.rows(); ++j)
            for (Eigen::Index k = 0; k < s.coeffs.cols(); ++k)
                s.coeffs(j, k) = rng.normal() * std::sqrt(s.lambda2(j, k) * s.tau2);
        redraw_data(s, rng);
        return s;
    }

    void redraw_data(const hls::ShrinkageState& state, hls::Rng& rng) {
        Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(2, 2);
        for (int leaf = 0; leaf < 2; ++leaf) {
            const double e0 = state.coeffs(leaf, 0), e1 = state.coeffs(leaf, 1);
            const double mx = std::max(e0, e1);
            const double p1 =
                std::exp(e1 - mx) / (std::exp(e0 - mx) + std::exp(e1 - mx));
            const int n = static_cast<int>(totals_[leaf]);
            for (int t = 0; t < n; ++t)
                counts(leaf, rng.uniform() < p1 ? 1 : 0) += 1.0;
        }
        design_.set_counts(std::move(counts));
    }

    GewekeStats stats_of(const hls::ShrinkageState& s) const {
        GewekeStats g;
        g.g_beta = std::tanh(s.coeffs(0, 0));
        g.g_beta2 = g.g_beta * g.g_beta;
        g.g_logtau = std::log(s.tau2);
        g.g_logtau2 = g.g_logtau * g.g_logtau;
        return g;
    }

    hls::GlsConfig config_;
    Eigen::Vector2d totals_;
    hls::CptTree tree_;
    hls::DesignMatrix design_;
};

}  // namespace testsupport
