// Penalized multinomial logistic regression on the sparse design: ridge via
// damped Newton with sparse normal equations, lasso via proximal gradient,
// and interval cross-validation for the ridge strength.
#pragma once

#include <cstdint>
#include <span>

#include "hls/cpt_tree.hpp"

namespace hls {

struct FitOptions {
    double tau = 1.0;
    bool intercept = false;
    int max_iterations = 500;
    double gradient_tol = 1e-6;
};

struct FitReport {
    double objective = 0.0;
    int iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
    std::vector<double> objective_trace;  // accepted objective per iteration
};

struct MapFit {
    CoefficientMatrix coeffs;      // design.cols x |X_c|
    Eigen::RowVectorXd intercept;  // size |X_c| when enabled, else empty
    FitReport report;
};

/// Minimizes NLL(B) + tau ||B||_F^2 (total-count likelihood; intercept
/// unpenalized). Zero-column designs always get the intercept so the fit
/// degenerates to the smoothed class marginal.
MapFit fit_ridge(const DesignMatrix& design, const FitOptions& opts);

/// As fit_ridge with the l1 penalty tau ||B||_1; subgradient optimality 1e-5.
MapFit fit_lasso(const DesignMatrix& design, const FitOptions& opts);

struct CvChoice {
    MapFit fit;
    double chosen_tau = 1.0;
    bool fell_back = false;
};

/// Selects tau from the grid by held-out log loss over internal folds of the
/// count units, then refits on everything. Falls back to tau = 1 when there
/// are fewer count units than folds.
CvChoice fit_ridge_cv(const DesignMatrix& design, std::span<const double> grid, int folds,
                      std::uint64_t seed, const FitOptions& base);

Cpt fitted_cpt(const MapFit& fit, const DesignMatrix& design);

/// Penalized negative log-likelihood and its gradient (dense, loop-based;
/// shared by the optimizers and the finite-difference tests).
double penalized_nll(const DesignMatrix& design, const CoefficientMatrix& coeffs,
                     const Eigen::RowVectorXd& intercept, double tau, bool l1);
void penalized_nll_grad(const DesignMatrix& design, const CoefficientMatrix& coeffs,
                        const Eigen::RowVectorXd& intercept, double tau,
                        CoefficientMatrix& grad_coeffs, Eigen::RowVectorXd& grad_intercept);

}  // namespace hls
