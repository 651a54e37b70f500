// Internal plumbing shared by the penalized fits and the Gibbs sampler:
// an intercept-augmented CSR view of a design matrix and the co-occurrence
// pair pattern behind sparse normal-equation assembly.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "hls/cpt_tree.hpp"

namespace hls {
class Rng;
}

namespace hls::detail {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// CSR view over a DesignMatrix with an optional all-ones intercept column
/// appended as column index `base_cols`.
struct FlatDesign {
    std::int64_t rows = 0;
    std::int64_t cols = 0;       // effective (intercept included)
    std::int64_t base_cols = 0;  // penalized columns
    bool intercept = false;
    std::vector<std::int64_t> row_ptr;
    std::vector<std::int64_t> col;

    static FlatDesign from(const DesignMatrix& dm, bool intercept);

    std::span<const std::int64_t> row_cols(std::int64_t i) const {
        return {col.data() + row_ptr[i],
                static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i])};
    }
};

/// eta = U B with B as (cols x C) row-major.
RowMajorMatrix compute_eta(const FlatDesign& fd, const RowMajorMatrix& coeffs);

/// Unique column pairs (j <= j') co-occurring on some row, with per-row slot
/// lists. Assembling U^T diag(w) U reduces to per-slot accumulation.
struct PairPattern {
    std::int64_t ncols = 0;
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    std::vector<std::int64_t> slots;     // concatenated per row
    std::vector<std::int64_t> slot_ptr;  // size rows + 1

    static PairPattern build(const FlatDesign& fd);

    std::span<const std::int64_t> row_slots(std::int64_t i) const {
        return {slots.data() + slot_ptr[i],
                static_cast<std::size_t>(slot_ptr[i + 1] - slot_ptr[i])};
    }

    /// slot_val[s] = sum over rows containing pair s of w[row].
    std::vector<double> accumulate(const Eigen::VectorXd& w) const;

    /// U^T diag(w) U + diag(prior_diag) as a sparse symmetric matrix.
    Eigen::SparseMatrix<double> weighted_gram(const Eigen::VectorXd& w,
                                              const Eigen::VectorXd& prior_diag) const;
};

/// Draw x ~ N(prec^{-1} rhs, prec^{-1}); jitter-retries (up to 3, scale
/// 1e-8 * trace / dim) on factorization failure. mean_out receives the
/// conditional mean when non-null.
Eigen::VectorXd sample_gaussian_precision(const Eigen::SparseMatrix<double>& prec,
                                          const Eigen::VectorXd& rhs, hls::Rng& rng,
                                          Eigen::VectorXd* mean_out = nullptr);

}  // namespace hls::detail
