// Per-node CPT branching tree and its sparse ancestor-indicator design
// matrix with aggregated multinomial counts.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "hls/data.hpp"
#include "hls/structure.hpp"

namespace hls {

/// Row-stochastic leaf parameter table (leaves x child values).
using Cpt = Eigen::MatrixXd;
/// Per-node coefficients (design columns x child values).
using CoefficientMatrix = Eigen::MatrixXd;

/// Branching tree over ordered parent values. Nodes are enumerated
/// breadth-first, children ordered by parent value; the root carries no
/// coefficient and is excluded from the count N.
struct CptTree {
    int child = -1;
    int child_card = 0;
    std::vector<int> parents;       // ordered; class first when class is a parent
    std::vector<int> parent_cards;
    std::vector<std::int64_t> depth_offset;  // size P+1, depth_offset[0] = 0

    int depth() const { return static_cast<int>(parents.size()); }
    std::int64_t leaf_count() const;
    std::int64_t node_count() const { return depth_offset.empty() ? 0 : depth_offset.back(); }

    /// Node index for the path prefix (values[0..d)), d >= 1.
    std::int64_t node_index(std::span<const int> prefix) const;
    std::int64_t leaf_index(std::span<const int> path) const;
    /// Inverse of leaf_index.
    std::vector<int> leaf_path(std::int64_t leaf) const;
};

/// Tree for `child` using the structure's parent list (class first), with
/// attribute parents re-ordered by descending I(parent; child | class).
CptTree build_tree(const Dataset& data, const NetworkStructure& net, int child);

/// Tree with an explicit parent order (used by the timing harness and tests).
CptTree build_tree_ordered(const Dataset& data, int child, std::span<const int> parents);

/// Sparse 0/1 design. Row i has ones at leaf i's path nodes (self included);
/// exactly p per row before the column drop. The drop removes the final
/// column (deepest, last value path) and is a no-op for trees with fewer
/// than 2 parents.
struct DesignMatrix {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    int path_len = 0;
    bool dropped_last = false;
    std::vector<std::int64_t> row_ptr;  // CSR, size rows + 1
    std::vector<std::int64_t> col_idx;
    Eigen::MatrixXd counts;             // rows x child_card multinomial counts
    Eigen::VectorXd row_total;

    std::int64_t nnz() const { return static_cast<std::int64_t>(col_idx.size()); }
    std::span<const std::int64_t> row_cols(std::int64_t i) const {
        return {col_idx.data() + row_ptr[i],
                static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i])};
    }
    void set_counts(Eigen::MatrixXd c);
    /// Coordinate-format dump "row col 1" per non-zero.
    void write_coo(std::ostream& os) const;
};

DesignMatrix build_design(const CptTree& tree, bool drop_last_column);

/// Per-leaf multinomial counts over the child values.
Eigen::MatrixXd aggregate_counts(const Dataset& data, const CptTree& tree);
Eigen::MatrixXd aggregate_counts(const Dataset& data, const CptTree& tree,
                                 std::span<const std::size_t> rows);

/// One design row per data row (duplicate-count framing), one-hot targets.
DesignMatrix build_design_rowwise(const Dataset& data, const CptTree& tree,
                                  bool drop_last_column);

/// theta = softmax(U B + 1 intercept^T) row-wise.
Cpt predict_cpt(const CoefficientMatrix& coeffs, const DesignMatrix& design);
Cpt predict_cpt(const CoefficientMatrix& coeffs, const Eigen::RowVectorXd& intercept,
                const DesignMatrix& design);

}  // namespace hls
