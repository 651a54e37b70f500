// Additive (pseudo-count) smoothing with back-off to the nearest sampled
// ancestor; m = 0 gives maximum likelihood.
#pragma once

#include "hls/cpt_tree.hpp"

namespace hls {

struct AdditiveConfig {
    double m = 1.0;
};

/// theta row for each leaf: (n_v + m) / (n_total + |X_c| m), evaluated at the
/// nearest tree level with at least one sample when the leaf is empty; the
/// class-marginal (root) level backs the fully-empty case, uniform if the
/// whole column is empty.
Cpt additive_cpt(const Eigen::MatrixXd& counts, const CptTree& tree, double m);

}  // namespace hls
