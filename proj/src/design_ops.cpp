#include "hls/design_ops.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <unordered_map>

#include "hls/common.hpp"

namespace hls::detail {

FlatDesign FlatDesign::from(const DesignMatrix& dm, bool intercept) {
    FlatDesign fd;
    fd.rows = dm.rows;
    fd.base_cols = dm.cols;
    fd.intercept = intercept;
    fd.cols = dm.cols + (intercept ? 1 : 0);
    fd.row_ptr.reserve(dm.rows + 1);
    fd.row_ptr.push_back(0);
    fd.col.reserve(dm.col_idx.size() + (intercept ? dm.rows : 0));
    for (std::int64_t i = 0; i < dm.rows; ++i) {
        for (const std::int64_t j : dm.row_cols(i)) fd.col.push_back(j);
        if (intercept) fd.col.push_back(dm.cols);
        fd.row_ptr.push_back(static_cast<std::int64_t>(fd.col.size()));
    }
    return fd;
}

RowMajorMatrix compute_eta(const FlatDesign& fd, const RowMajorMatrix& coeffs) {
    const auto c = coeffs.cols();
    RowMajorMatrix eta = RowMajorMatrix::Zero(fd.rows, c);
    for (std::int64_t i = 0; i < fd.rows; ++i) {
        auto row = eta.row(i);
        for (const std::int64_t j : fd.row_cols(i)) row += coeffs.row(j);
    }
    return eta;
}

PairPattern PairPattern::build(const FlatDesign& fd) {
    PairPattern pat;
    pat.ncols = fd.cols;
    std::unordered_map<std::int64_t, std::int64_t> slot_of;  // key: j * cols + j'
    pat.slot_ptr.reserve(fd.rows + 1);
    pat.slot_ptr.push_back(0);
    for (std::int64_t i = 0; i < fd.rows; ++i) {
        const auto cols = fd.row_cols(i);
        for (std::size_t a = 0; a < cols.size(); ++a)
            for (std::size_t b = a; b < cols.size(); ++b) {
                const std::int64_t j = std::min(cols[a], cols[b]);
                const std::int64_t jj = std::max(cols[a], cols[b]);
                const std::int64_t key = j * fd.cols + jj;
                const auto [it, inserted] =
                    slot_of.emplace(key, static_cast<std::int64_t>(pat.pairs.size()));
                if (inserted) pat.pairs.emplace_back(j, jj);
                pat.slots.push_back(it->second);
            }
        pat.slot_ptr.push_back(static_cast<std::int64_t>(pat.slots.size()));
    }
    return pat;
}

std::vector<double> PairPattern::accumulate(const Eigen::VectorXd& w) const {
    std::vector<double> val(pairs.size(), 0.0);
    const std::int64_t rows = static_cast<std::int64_t>(slot_ptr.size()) - 1;
    for (std::int64_t i = 0; i < rows; ++i) {
        const double wi = w[i];
        if (wi == 0.0) continue;
        for (const std::int64_t s : row_slots(i)) val[s] += wi;
    }
    return val;
}

Eigen::SparseMatrix<double> PairPattern::weighted_gram(
    const Eigen::VectorXd& w, const Eigen::VectorXd& prior_diag) const {
    const auto val = accumulate(w);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * pairs.size() + ncols);
    for (std::size_t s = 0; s < pairs.size(); ++s) {
        const auto [j, jj] = pairs[s];
        if (val[s] == 0.0) continue;
        trips.emplace_back(j, jj, val[s]);
        if (j != jj) trips.emplace_back(jj, j, val[s]);
    }
    for (std::int64_t j = 0; j < ncols; ++j)
        if (prior_diag[j] != 0.0) trips.emplace_back(j, j, prior_diag[j]);
    Eigen::SparseMatrix<double> gram(ncols, ncols);
    gram.setFromTriplets(trips.begin(), trips.end());
    return gram;
}

Eigen::VectorXd sample_gaussian_precision(const Eigen::SparseMatrix<double>& prec,
                                          const Eigen::VectorXd& rhs, Rng& rng,
                                          Eigen::VectorXd* mean_out) {
    const std::int64_t n = prec.rows();
    Eigen::VectorXd z(n);
    for (std::int64_t i = 0; i < n; ++i) z[i] = rng.normal();

    double trace = 0.0;
    for (std::int64_t j = 0; j < n; ++j) trace += prec.coeff(j, j);
    double jitter = 1e-8 * trace / std::max<std::int64_t>(n, 1);
    if (jitter <= 0.0) jitter = 1e-8;

    if (n <= 256) {
        Eigen::MatrixXd dense = Eigen::MatrixXd(prec);
        for (int attempt = 0; attempt <= 3; ++attempt) {
            Eigen::LLT<Eigen::MatrixXd> llt(dense);
            if (llt.info() == Eigen::Success) {
                Eigen::VectorXd mu = llt.solve(rhs);
                if (mean_out) *mean_out = mu;
                Eigen::VectorXd noise =
                    llt.matrixU().solve(z);  // cov(L^-T z) = prec^-1
                return mu + noise;
            }
            if (attempt == 3) break;
            dense.diagonal().array() += jitter;
            jitter *= 10.0;
        }
        throw NumericError("gaussian draw: dense Cholesky failed after jitter retries");
    }

    Eigen::SparseMatrix<double> work = prec;
    for (int attempt = 0; attempt <= 3; ++attempt) {
        Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(work);
        if (llt.info() == Eigen::Success) {
            Eigen::VectorXd mu = llt.solve(rhs);
            if (mean_out) *mean_out = mu;
            Eigen::VectorXd y = llt.matrixU().solve(z);
            Eigen::VectorXd noise = llt.permutationPinv() * y;
            return mu + noise;
        }
        if (attempt == 3) break;
        for (std::int64_t j = 0; j < n; ++j) work.coeffRef(j, j) += jitter;
        jitter *= 10.0;
    }
    throw NumericError("gaussian draw: sparse Cholesky failed after jitter retries");
}

}  // namespace hls::detail
