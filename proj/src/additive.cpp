#include "hls/additive.hpp"

#include "hls/common.hpp"

namespace hls {

Cpt additive_cpt(const Eigen::MatrixXd& counts, const CptTree& tree, double m) {
    if (m < 0.0) throw ConfigError("additive_cpt: m must be non-negative");
    const std::int64_t leaves = tree.leaf_count();
    const int c = tree.child_card;
    if (counts.rows() != leaves || counts.cols() != c)
        throw ContractViolation("additive_cpt: counts shape does not match tree");
    const int p = tree.depth();

    // Aggregated counts per level: level[d] has prod_{i<=d} card_i rows,
    // level[p] aliases the leaf counts.
    std::vector<Eigen::MatrixXd> level(p + 1);
    level[p] = counts;
    for (int d = p; d-- > 0;) {
        const std::int64_t rows_d = d == 0 ? 1 : tree.depth_offset[d] - tree.depth_offset[d - 1];
        const int card = tree.parent_cards[d];
        level[d] = Eigen::MatrixXd::Zero(rows_d, c);
        for (std::int64_t i = 0; i < level[d + 1].rows(); ++i)
            level[d].row(i / card) += level[d + 1].row(i);
    }

    Cpt theta(leaves, c);
    for (std::int64_t leaf = 0; leaf < leaves; ++leaf) {
        // Nearest level (leaf upward) with at least one sample.
        int d = p;
        std::int64_t idx = leaf;
        while (d > 0 && level[d].row(idx).sum() <= 0.0) {
            idx /= tree.parent_cards[d - 1];
            --d;
        }
        const Eigen::RowVectorXd& n = level[d].row(idx);
        const double total = n.sum();
        const double denom = total + c * m;
        if (denom <= 0.0) {
            theta.row(leaf).setConstant(1.0 / c);
        } else {
            theta.row(leaf) = (n.array() + m) / denom;
        }
    }
    return theta;
}

}  // namespace hls
