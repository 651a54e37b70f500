// Recursive entropy-based discretization with the MDL stopping rule.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hls/data.hpp"

namespace hls {

/// Per-column sorted cut points. A column with no cuts maps everything to
/// bin 0. Values equal to a cut point fall in the upper bin.
struct DiscretizationModel {
    std::vector<std::vector<double>> cuts;  // empty vector for categorical columns

    static int bin_of(double value, const std::vector<double>& cuts);
};

/// Cut points for one column; labels must be in [0, n_classes).
std::vector<double> fit_mdlp(std::span<const double> values, std::span<const int> labels,
                             int n_classes);

/// Fits cuts for every numeric column using only the given training rows.
DiscretizationModel fit_discretization(const Dataset& data,
                                       std::span<const std::size_t> train_rows);

/// Replaces numeric columns by categorical bins (cardinality = cuts + 1).
Dataset apply_discretization(const DiscretizationModel& model, const Dataset& data);

}  // namespace hls
