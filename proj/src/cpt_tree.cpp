#include "hls/cpt_tree.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "hls/common.hpp"
#include "hls/kernels.hpp"

namespace hls {

std::int64_t CptTree::leaf_count() const {
    std::int64_t l = 1;
    for (const int c : parent_cards) l *= c;
    return l;
}

std::int64_t CptTree::node_index(std::span<const int> prefix) const {
    const std::size_t d = prefix.size();
    if (d < 1 || d > parents.size())
        throw ContractViolation("node_index: prefix depth out of range");
    std::int64_t idx = 0;
    for (std::size_t i = 0; i < d; ++i) idx = idx * parent_cards[i] + prefix[i];
    return depth_offset[d - 1] + idx;
}

std::int64_t CptTree::leaf_index(std::span<const int> path) const {
    if (path.size() != parents.size())
        throw ContractViolation("leaf_index: path length must equal parent count");
    std::int64_t idx = 0;
    for (std::size_t i = 0; i < path.size(); ++i) idx = idx * parent_cards[i] + path[i];
    return idx;
}

std::vector<int> CptTree::leaf_path(std::int64_t leaf) const {
    std::vector<int> path(parents.size());
    for (std::size_t i = parents.size(); i-- > 0;) {
        path[i] = static_cast<int>(leaf % parent_cards[i]);
        leaf /= parent_cards[i];
    }
    return path;
}

namespace {

CptTree finish_tree(const Dataset& data, int child, std::vector<int> parents) {
    CptTree tree;
    tree.child = child;
    tree.child_card = data.cardinalities[child];
    tree.parents = std::move(parents);
    tree.parent_cards.reserve(tree.parents.size());
    for (const int p : tree.parents) tree.parent_cards.push_back(data.cardinalities[p]);
    tree.depth_offset.resize(tree.parents.size() + 1);
    tree.depth_offset[0] = 0;
    std::int64_t block = 1;
    for (std::size_t d = 0; d < tree.parents.size(); ++d) {
        block *= tree.parent_cards[d];
        tree.depth_offset[d + 1] = tree.depth_offset[d] + block;
    }
    return tree;
}

}  // namespace

CptTree build_tree(const Dataset& data, const NetworkStructure& net, int child) {
    const auto& raw_parents = net.parents[child];
    std::vector<int> attrs;
    bool has_class = false;
    for (const int p : raw_parents) {
        if (p == net.class_index)
            has_class = true;
        else
            attrs.push_back(p);
    }
    // Attribute parents ordered by descending CMI with the child given the
    // class; ties toward the lower column index.
    std::vector<double> weight(attrs.size());
    for (std::size_t i = 0; i < attrs.size(); ++i)
        weight[i] = cmi_given_class(data, attrs[i], child, net.class_index);
    std::vector<std::size_t> order(attrs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (weight[a] != weight[b]) return weight[a] > weight[b];
        return attrs[a] < attrs[b];
    });
    std::vector<int> parents;
    if (has_class) parents.push_back(net.class_index);
    for (const std::size_t i : order) parents.push_back(attrs[i]);
    return finish_tree(data, child, std::move(parents));
}

CptTree build_tree_ordered(const Dataset& data, int child, std::span<const int> parents) {
    return finish_tree(data, child, std::vector<int>(parents.begin(), parents.end()));
}

void DesignMatrix::set_counts(Eigen::MatrixXd c) {
    if (c.rows() != rows)
        throw ContractViolation("set_counts: count rows do not match design rows");
    counts = std::move(c);
    row_total = counts.rowwise().sum();
}

void DesignMatrix::write_coo(std::ostream& os) const {
    for (std::int64_t i = 0; i < rows; ++i)
        for (const std::int64_t j : row_cols(i)) os << i << ' ' << j << " 1\n";
}

DesignMatrix build_design(const CptTree& tree, bool drop_last_column) {
    DesignMatrix dm;
    const int p = tree.depth();
    const std::int64_t leaves = tree.leaf_count();
    const std::int64_t nodes = tree.node_count();
    // Dropping the single per-leaf column of a depth-1 tree would pin that
    // leaf to the uniform distribution; the intercept-like redundancy only
    // exists from depth 2 up.
    const bool drop = drop_last_column && p >= 2;
    dm.rows = leaves;
    dm.cols = drop ? nodes - 1 : nodes;
    dm.path_len = p;
    dm.dropped_last = drop;
    dm.row_ptr.reserve(leaves + 1);
    dm.row_ptr.push_back(0);
    dm.col_idx.reserve(static_cast<std::size_t>(leaves) * p);
    std::vector<int> path;
    for (std::int64_t leaf = 0; leaf < leaves; ++leaf) {
        path = tree.leaf_path(leaf);
        for (int d = 1; d <= p; ++d) {
            const std::int64_t j = tree.node_index(std::span<const int>(path.data(), d));
            if (drop && j == nodes - 1) continue;
            dm.col_idx.push_back(j);
        }
        dm.row_ptr.push_back(static_cast<std::int64_t>(dm.col_idx.size()));
    }
    dm.counts = Eigen::MatrixXd::Zero(dm.rows, tree.child_card);
    dm.row_total = Eigen::VectorXd::Zero(dm.rows);
    return dm;
}

Eigen::MatrixXd aggregate_counts(const Dataset& data, const CptTree& tree,
                                 std::span<const std::size_t> rows) {
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(tree.leaf_count(), tree.child_card);
    const int p = tree.depth();
    std::vector<int> path(p);
    for (const std::size_t r : rows) {
        for (int d = 0; d < p; ++d) path[d] = data.columns[tree.parents[d]][r];
        counts(tree.leaf_index(path), data.columns[tree.child][r]) += 1.0;
    }
    return counts;
}

Eigen::MatrixXd aggregate_counts(const Dataset& data, const CptTree& tree) {
    std::vector<std::size_t> rows(data.n_rows);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return aggregate_counts(data, tree, rows);
}

DesignMatrix build_design_rowwise(const Dataset& data, const CptTree& tree,
                                  bool drop_last_column) {
    DesignMatrix dm;
    const int p = tree.depth();
    const std::int64_t nodes = tree.node_count();
    const bool drop = drop_last_column && p >= 2;
    dm.rows = static_cast<std::int64_t>(data.n_rows);
    dm.cols = drop ? nodes - 1 : nodes;
    dm.path_len = p;
    dm.dropped_last = drop;
    dm.row_ptr.reserve(dm.rows + 1);
    dm.row_ptr.push_back(0);
    dm.col_idx.reserve(static_cast<std::size_t>(dm.rows) * p);
    dm.counts = Eigen::MatrixXd::Zero(dm.rows, tree.child_card);
    std::vector<int> path(p);
    for (std::size_t r = 0; r < data.n_rows; ++r) {
        for (int d = 0; d < p; ++d) path[d] = data.columns[tree.parents[d]][r];
        for (int d = 1; d <= p; ++d) {
            const std::int64_t j = tree.node_index(std::span<const int>(path.data(), d));
            if (drop && j == nodes - 1) continue;
            dm.col_idx.push_back(j);
        }
        dm.row_ptr.push_back(static_cast<std::int64_t>(dm.col_idx.size()));
        dm.counts(static_cast<std::int64_t>(r), data.columns[tree.child][r]) = 1.0;
    }
    dm.row_total = dm.counts.rowwise().sum();
    return dm;
}

Cpt predict_cpt(const CoefficientMatrix& coeffs, const Eigen::RowVectorXd& intercept,
                const DesignMatrix& design) {
    if (coeffs.rows() != design.cols)
        throw ContractViolation("predict_cpt: coefficient rows do not match design columns");
    const std::int64_t c = intercept.size() > 0 ? intercept.size() : coeffs.cols();
    if (coeffs.cols() > 0 && intercept.size() > 0 && coeffs.cols() != intercept.size())
        throw ContractViolation("predict_cpt: intercept width does not match coefficients");
    Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(design.rows, c);
    if (intercept.size() > 0) eta.rowwise() = intercept;
    for (std::int64_t i = 0; i < design.rows; ++i)
        for (const std::int64_t j : design.row_cols(i)) eta.row(i) += coeffs.row(j);
    // Row-major buffer for the kernel call; Eigen is column-major.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> buf = eta;
    kernels::active().softmax_rows(buf.data(), static_cast<std::size_t>(buf.rows()),
                                   static_cast<std::size_t>(buf.cols()));
    return Cpt(buf);
}

Cpt predict_cpt(const CoefficientMatrix& coeffs, const DesignMatrix& design) {
    return predict_cpt(coeffs, Eigen::RowVectorXd(), design);
}

}  // namespace hls
