#include "hls/map_fit.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hls/common.hpp"
#include "hls/design_ops.hpp"
#include "hls/kernels.hpp"

namespace hls {
namespace {

using detail::FlatDesign;
using detail::PairPattern;
using detail::RowMajorMatrix;

// Smooth part of the objective: total-count multinomial NLL over the
// (optionally intercept-augmented) design.
struct Evaluator {
    const Eigen::MatrixXd& counts;
    Eigen::VectorXd wtot;
    FlatDesign fd;
    int n_classes;
    RowMajorMatrix eta, theta;
    Eigen::VectorXd lse;

    Evaluator(const DesignMatrix& dm, bool intercept)
        : counts(dm.counts),
          wtot(dm.row_total),
          fd(FlatDesign::from(dm, intercept)),
          n_classes(static_cast<int>(dm.counts.cols())) {
        lse.resize(fd.rows);
    }

    // Fills eta/theta/lse as a side effect.
    double nll(const RowMajorMatrix& coeffs) {
        eta = detail::compute_eta(fd, coeffs);
        kernels::active().logsumexp_rows(eta.data(), static_cast<std::size_t>(fd.rows),
                                         static_cast<std::size_t>(n_classes), lse.data());
        double f = 0.0;
        for (std::int64_t i = 0; i < fd.rows; ++i) {
            if (wtot[i] == 0.0) continue;
            f += wtot[i] * lse[i];
            for (int k = 0; k < n_classes; ++k) f -= counts(i, k) * eta(i, k);
        }
        theta = eta;
        kernels::active().softmax_rows(theta.data(), static_cast<std::size_t>(fd.rows),
                                       static_cast<std::size_t>(n_classes));
        return f;
    }

    // NLL gradient at the point of the last nll() call.
    void grad(RowMajorMatrix& g) const {
        g.setZero();
        Eigen::RowVectorXd resid(n_classes);
        for (std::int64_t i = 0; i < fd.rows; ++i) {
            if (wtot[i] == 0.0) continue;
            resid = wtot[i] * theta.row(i) - counts.row(i);
            for (const std::int64_t j : fd.row_cols(i)) g.row(j) += resid;
        }
    }
};

// vec index for coefficient (column j, class a).
inline std::int64_t vec_index(std::int64_t j, int a, std::int64_t ncols) {
    return static_cast<std::int64_t>(a) * ncols + j;
}

Eigen::SparseMatrix<double> assemble_hessian(const PairPattern& pat, const Evaluator& ev,
                                             double tau, double stabilizer) {
    const int c = ev.n_classes;
    const std::int64_t ncols = pat.ncols;
    const std::size_t n_slots = pat.pairs.size();
    std::vector<double> slot_a(n_slots * c, 0.0);
    std::vector<double> slot_q(n_slots * c * c, 0.0);
    std::vector<double> v(c);
    for (std::int64_t i = 0; i < ev.fd.rows; ++i) {
        const double wi = ev.wtot[i];
        if (wi == 0.0) continue;
        for (int a = 0; a < c; ++a) v[a] = wi * ev.theta(i, a);
        for (const std::int64_t s : pat.row_slots(i)) {
            double* sa = slot_a.data() + s * c;
            double* sq = slot_q.data() + s * c * c;
            for (int a = 0; a < c; ++a) {
                sa[a] += v[a];
                const double va = v[a];
                for (int b = 0; b < c; ++b) sq[a * c + b] += va * ev.theta(i, b);
            }
        }
    }

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * n_slots * c * c + static_cast<std::size_t>(ncols) * c);
    for (std::size_t s = 0; s < n_slots; ++s) {
        const auto [j, jj] = pat.pairs[s];
        const double* sa = slot_a.data() + s * c;
        const double* sq = slot_q.data() + s * c * c;
        for (int a = 0; a < c; ++a)
            for (int b = 0; b < c; ++b) {
                const double val = (a == b ? sa[a] : 0.0) - sq[a * c + b];
                trips.emplace_back(vec_index(j, a, ncols), vec_index(jj, b, ncols), val);
                if (j != jj)
                    trips.emplace_back(vec_index(jj, a, ncols), vec_index(j, b, ncols), val);
            }
    }
    for (std::int64_t j = 0; j < ncols; ++j) {
        const bool penalized = j < ev.fd.base_cols;
        const double d = (penalized ? 2.0 * tau : 0.0) + stabilizer;
        if (d != 0.0)
            for (int a = 0; a < c; ++a) {
                const std::int64_t idx = vec_index(j, a, ncols);
                trips.emplace_back(idx, idx, d);
            }
    }
    Eigen::SparseMatrix<double> h(ncols * c, ncols * c);
    h.setFromTriplets(trips.begin(), trips.end());
    return h;
}

MapFit package_fit(const RowMajorMatrix& full, const FlatDesign& fd, FitReport report) {
    MapFit out;
    out.coeffs = full.topRows(fd.base_cols);
    if (fd.intercept) out.intercept = full.row(fd.base_cols);
    out.report = report;
    return out;
}

double ridge_penalty(const RowMajorMatrix& full, const FlatDesign& fd, double tau) {
    if (tau == 0.0 || fd.base_cols == 0) return 0.0;
    return tau * full.topRows(fd.base_cols).squaredNorm();
}

double l1_penalty(const RowMajorMatrix& full, const FlatDesign& fd, double tau) {
    if (tau == 0.0 || fd.base_cols == 0) return 0.0;
    return tau * full.topRows(fd.base_cols).cwiseAbs().sum();
}

// Largest eigenvalue of U^T diag(w) U by power iteration; bounds the NLL
// curvature (multinomial factor 1/2 applied by the caller).
double gram_spectral_bound(const PairPattern& pat, const Eigen::VectorXd& w,
                           std::int64_t ncols) {
    if (ncols == 0) return 0.0;
    const Eigen::VectorXd zero_prior = Eigen::VectorXd::Zero(ncols);
    const Eigen::SparseMatrix<double> gram = pat.weighted_gram(w, zero_prior);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(ncols, 1.0 / std::sqrt(double(ncols)));
    double lambda = 0.0;
    for (int it = 0; it < 60; ++it) {
        Eigen::VectorXd y = gram * x;
        const double norm = y.norm();
        if (norm == 0.0) return 0.0;
        x = y / norm;
        lambda = norm;
    }
    return lambda;
}

}  // namespace

double penalized_nll(const DesignMatrix& design, const CoefficientMatrix& coeffs,
                     const Eigen::RowVectorXd& intercept, double tau, bool l1) {
    const bool with_b0 = intercept.size() > 0;
    Evaluator ev(design, with_b0);
    RowMajorMatrix full(ev.fd.cols, ev.n_classes);
    full.topRows(design.cols) = coeffs;
    if (with_b0) full.row(design.cols) = intercept;
    const double f = ev.nll(full);
    return f + (l1 ? l1_penalty(full, ev.fd, tau) : ridge_penalty(full, ev.fd, tau));
}

void penalized_nll_grad(const DesignMatrix& design, const CoefficientMatrix& coeffs,
                        const Eigen::RowVectorXd& intercept, double tau,
                        CoefficientMatrix& grad_coeffs, Eigen::RowVectorXd& grad_intercept) {
    const bool with_b0 = intercept.size() > 0;
    Evaluator ev(design, with_b0);
    RowMajorMatrix full(ev.fd.cols, ev.n_classes);
    full.topRows(design.cols) = coeffs;
    if (with_b0) full.row(design.cols) = intercept;
    ev.nll(full);
    RowMajorMatrix g(ev.fd.cols, ev.n_classes);
    ev.grad(g);
    g.topRows(design.cols) += 2.0 * tau * full.topRows(design.cols);
    grad_coeffs = g.topRows(design.cols);
    if (with_b0)
        grad_intercept = g.row(design.cols);
    else
        grad_intercept.resize(0);
}

MapFit fit_ridge(const DesignMatrix& design, const FitOptions& opts) {
    if (opts.tau < 0.0) throw ConfigError("fit_ridge: tau must be non-negative");
    const bool intercept = opts.intercept || design.cols == 0;
    Evaluator ev(design, intercept);
    const int c = ev.n_classes;
    const std::int64_t ncols = ev.fd.cols;
    const std::int64_t m = ncols * c;

    RowMajorMatrix full = RowMajorMatrix::Zero(ncols, c);
    double f = ev.nll(full) + ridge_penalty(full, ev.fd, opts.tau);
    if (!std::isfinite(f)) throw NumericError("fit_ridge: non-finite objective at start");
    FitReport report;
    report.objective_trace.push_back(f);

    const PairPattern pat = PairPattern::build(ev.fd);
    // tau = 0 leaves the softmax gauge free; a tiny curvature stabilizer
    // keeps the factorization SPD without moving theta.
    const double stabilizer = opts.tau == 0.0 ? 1e-10 : 0.0;

    RowMajorMatrix g(ncols, c), trial(ncols, c);
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        ev.grad(g);
        g.topRows(ev.fd.base_cols) += 2.0 * opts.tau * full.topRows(ev.fd.base_cols);
        const double gmax =
            kernels::active().max_abs(g.data(), static_cast<std::size_t>(m));
        report.gradient_norm = gmax;
        if (gmax <= opts.gradient_tol) {
            report.converged = true;
            break;
        }

        Eigen::VectorXd dir(m);
        bool have_newton = false;
        {
            const Eigen::SparseMatrix<double> h =
                assemble_hessian(pat, ev, opts.tau, stabilizer);
            Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(h);
            if (llt.info() == Eigen::Success) {
                Eigen::VectorXd gv(m);
                for (std::int64_t j = 0; j < ncols; ++j)
                    for (int a = 0; a < c; ++a) gv[vec_index(j, a, ncols)] = g(j, a);
                dir = -llt.solve(gv);
                have_newton = std::isfinite(dir.sum());
            }
        }
        Eigen::VectorXd gv(m);
        for (std::int64_t j = 0; j < ncols; ++j)
            for (int a = 0; a < c; ++a) gv[vec_index(j, a, ncols)] = g(j, a);
        if (!have_newton || dir.dot(gv) >= 0.0) dir = -gv;  // indefinite curvature
        const double slope = dir.dot(gv);

        double step = 1.0;
        bool accepted = false;
        while (step >= 1e-14) {
            for (std::int64_t j = 0; j < ncols; ++j)
                for (int a = 0; a < c; ++a)
                    trial(j, a) = full(j, a) + step * dir[vec_index(j, a, ncols)];
            const double ft = ev.nll(trial) + ridge_penalty(trial, ev.fd, opts.tau);
            if (std::isfinite(ft) && ft <= f + 1e-4 * step * slope) {
                full = trial;
                f = ft;
                accepted = true;
                report.objective_trace.push_back(f);
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // stalled; gradient norm reported below
    }
    if (!report.converged) {
        // refresh the gradient norm at the final iterate
        ev.nll(full);
        ev.grad(g);
        g.topRows(ev.fd.base_cols) += 2.0 * opts.tau * full.topRows(ev.fd.base_cols);
        report.gradient_norm =
            kernels::active().max_abs(g.data(), static_cast<std::size_t>(m));
        report.converged = report.gradient_norm <= opts.gradient_tol;
    }
    report.objective = f;
    report.iterations = iter;
    if (!std::isfinite(f))
        throw NumericError("fit_ridge: objective became non-finite (overflow)");
    return package_fit(full, ev.fd, report);
}

MapFit fit_lasso(const DesignMatrix& design, const FitOptions& opts) {
    if (opts.tau < 0.0) throw ConfigError("fit_lasso: tau must be non-negative");
    const bool intercept = opts.intercept || design.cols == 0;
    Evaluator ev(design, intercept);
    const int c = ev.n_classes;
    const std::int64_t ncols = ev.fd.cols;
    const double sub_tol = 1e-5;

    const PairPattern pat = PairPattern::build(ev.fd);
    const double lip = std::max(0.5 * gram_spectral_bound(pat, ev.wtot, ncols), 1e-8);
    const double step = 1.0 / lip;

    RowMajorMatrix x = RowMajorMatrix::Zero(ncols, c);
    RowMajorMatrix z = x, x_prev = x, g(ncols, c);
    double t_momentum = 1.0;
    double fx = ev.nll(x) + l1_penalty(x, ev.fd, opts.tau);

    const auto prox = [&](RowMajorMatrix& b) {
        if (opts.tau == 0.0) return;
        const double thr = opts.tau * step;
        for (std::int64_t j = 0; j < ev.fd.base_cols; ++j)
            for (int a = 0; a < c; ++a) {
                const double v = b(j, a);
                b(j, a) = v > thr ? v - thr : (v < -thr ? v + thr : 0.0);
            }
    };
    FitReport report;
    const auto subgrad_norm = [&](const RowMajorMatrix& b) {
        ev.nll(b);
        ev.grad(g);
        double worst = 0.0;
        for (std::int64_t j = 0; j < ncols; ++j)
            for (int a = 0; a < c; ++a) {
                const bool penalized = j < ev.fd.base_cols;
                double r;
                if (!penalized) {
                    r = std::fabs(g(j, a));
                } else if (b(j, a) != 0.0) {
                    r = std::fabs(g(j, a) + opts.tau * (b(j, a) > 0.0 ? 1.0 : -1.0));
                } else {
                    r = std::max(std::fabs(g(j, a)) - opts.tau, 0.0);
                }
                worst = std::max(worst, r);
            }
        return worst;
    };

    int iter = 0;
    const int max_iter = std::max(opts.max_iterations * 40, 2000);
    for (; iter < max_iter; ++iter) {
        ev.nll(z);
        ev.grad(g);
        RowMajorMatrix x_next = z - step * g;
        prox(x_next);
        const double f_next = ev.nll(x_next) + l1_penalty(x_next, ev.fd, opts.tau);
        if (f_next > fx + 1e-12) {
            // momentum restart keeps the sequence monotone
            z = x;
            t_momentum = 1.0;
            ev.nll(z);
            ev.grad(g);
            RowMajorMatrix x_retry = z - step * g;
            prox(x_retry);
            const double f_retry = ev.nll(x_retry) + l1_penalty(x_retry, ev.fd, opts.tau);
            if (f_retry > fx + 1e-12) break;  // no further progress at this step size
            x_prev = x;
            x = x_retry;
            fx = f_retry;
        } else {
            x_prev = x;
            x = x_next;
            fx = f_next;
        }
        report.objective_trace.push_back(fx);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
        z = x + ((t_momentum - 1.0) / t_next) * (x - x_prev);
        t_momentum = t_next;

        if (iter % 10 == 9 || iter == max_iter - 1) {
            const double r = subgrad_norm(x);
            if (r <= sub_tol) {
                report.converged = true;
                report.gradient_norm = r;
                break;
            }
        }
    }
    if (!report.converged) report.gradient_norm = subgrad_norm(x);
    report.converged = report.gradient_norm <= sub_tol;
    report.objective = fx;
    report.iterations = iter;
    if (!std::isfinite(fx)) throw NumericError("fit_lasso: objective became non-finite");
    return package_fit(x, ev.fd, report);
}

CvChoice fit_ridge_cv(const DesignMatrix& design, std::span<const double> grid, int folds,
                      std::uint64_t seed, const FitOptions& base) {
    if (grid.empty()) throw ConfigError("fit_ridge_cv: empty tau grid");
    if (folds < 2) throw ConfigError("fit_ridge_cv: need at least 2 folds");

    // Count units: one (row, class) entry per observation.
    struct Unit {
        std::int64_t row;
        int cls;
    };
    std::vector<Unit> units;
    for (std::int64_t i = 0; i < design.rows; ++i)
        for (int k = 0; k < design.counts.cols(); ++k) {
            const long long cnt = std::llround(design.counts(i, k));
            for (long long u = 0; u < cnt; ++u) units.push_back({i, k});
        }

    CvChoice choice;
    if (units.size() < static_cast<std::size_t>(folds)) {
        FitOptions opts = base;
        opts.tau = 1.0;
        choice.fit = fit_ridge(design, opts);
        choice.chosen_tau = 1.0;
        choice.fell_back = true;
        return choice;
    }

    Rng rng(Rng::derive(seed, 0xcf01d));
    for (std::size_t i = units.size(); i > 1; --i)
        std::swap(units[i - 1],
                  units[static_cast<std::size_t>(rng.uniform() * static_cast<double>(i))]);

    std::vector<double> loss(grid.size(), 0.0);
    const int c = static_cast<int>(design.counts.cols());
    for (int f = 0; f < folds; ++f) {
        DesignMatrix train = design;
        Eigen::MatrixXd train_counts = Eigen::MatrixXd::Zero(design.rows, c);
        std::vector<Unit> held;
        for (std::size_t u = 0; u < units.size(); ++u) {
            if (static_cast<int>(u % folds) == f)
                held.push_back(units[u]);
            else
                train_counts(units[u].row, units[u].cls) += 1.0;
        }
        train.set_counts(std::move(train_counts));
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            FitOptions opts = base;
            opts.tau = grid[gi];
            const MapFit fit = fit_ridge(train, opts);
            const Cpt theta = fitted_cpt(fit, train);
            for (const Unit& u : held)
                loss[gi] -= std::log(std::max(theta(u.row, u.cls), 1e-300));
        }
    }

    // Ties prefer the larger tau (more shrinkage).
    std::size_t best = 0;
    for (std::size_t gi = 1; gi < grid.size(); ++gi)
        if (loss[gi] <= loss[best] + 1e-12) best = gi;
    FitOptions opts = base;
    opts.tau = grid[best];
    choice.fit = fit_ridge(design, opts);
    choice.chosen_tau = grid[best];
    return choice;
}

Cpt fitted_cpt(const MapFit& fit, const DesignMatrix& design) {
    if (fit.intercept.size() > 0) return predict_cpt(fit.coeffs, fit.intercept, design);
    return predict_cpt(fit.coeffs, design);
}

}  // namespace hls
