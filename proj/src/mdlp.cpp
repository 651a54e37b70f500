#include "hls/mdlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hls/common.hpp"

namespace hls {
namespace {

double entropy_bits(std::span<const int> counts, int total) {
    if (total == 0) return 0.0;
    double h = 0.0;
    for (const int c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    return h;
}

int distinct_classes(std::span<const int> counts) {
    int k = 0;
    for (const int c : counts)
        if (c > 0) ++k;
    return k;
}

struct SortedColumn {
    std::vector<double> values;  // ascending
    std::vector<int> labels;
    // Group boundaries between distinct values: group g spans
    // [starts[g], starts[g+1]).
    std::vector<std::size_t> starts;
};

// Recursion over [group lo, group hi) of the sorted column.
void mdlp_recurse(const SortedColumn& col, std::size_t glo, std::size_t ghi, int n_classes,
                  std::vector<double>& cuts) {
    const std::size_t ilo = col.starts[glo];
    const std::size_t ihi = col.starts[ghi];
    const int n = static_cast<int>(ihi - ilo);
    if (ghi - glo < 2 || n < 2) return;

    std::vector<int> total(n_classes, 0);
    for (std::size_t i = ilo; i < ihi; ++i) ++total[col.labels[i]];
    const double ent_s = entropy_bits(total, n);
    if (ent_s == 0.0) return;

    // Scan candidate boundaries between value groups; skip non-boundaries
    // (both neighbour groups pure with the same class).
    std::vector<int> left(n_classes, 0);
    std::vector<int> group(n_classes, 0);
    double best = -1.0;
    std::size_t best_group = 0;
    std::vector<int> best_left;
    for (std::size_t g = glo; g + 1 < ghi; ++g) {
        std::fill(group.begin(), group.end(), 0);
        for (std::size_t i = col.starts[g]; i < col.starts[g + 1]; ++i)
            ++group[col.labels[i]];
        for (int c = 0; c < n_classes; ++c) left[c] += group[c];
        const int pure = distinct_classes(group) == 1
                             ? static_cast<int>(std::find_if(group.begin(), group.end(),
                                                             [](int v) { return v > 0; }) -
                                                group.begin())
                             : -1;
        // Look ahead at the next group to decide whether this is a class
        // boundary.
        std::vector<int> next(n_classes, 0);
        for (std::size_t i = col.starts[g + 1]; i < col.starts[g + 2]; ++i)
            ++next[col.labels[i]];
        const int next_pure = distinct_classes(next) == 1
                                  ? static_cast<int>(std::find_if(next.begin(), next.end(),
                                                                  [](int v) { return v > 0; }) -
                                                     next.begin())
                                  : -1;
        if (pure >= 0 && next_pure >= 0 && pure == next_pure) continue;

        const int n1 = static_cast<int>(col.starts[g + 1] - ilo);
        const int n2 = n - n1;
        std::vector<int> right(n_classes);
        for (int c = 0; c < n_classes; ++c) right[c] = total[c] - left[c];
        const double w_ent = (static_cast<double>(n1) / n) * entropy_bits(left, n1) +
                             (static_cast<double>(n2) / n) * entropy_bits(right, n2);
        const double gain = ent_s - w_ent;
        if (gain > best + 1e-12) {
            best = gain;
            best_group = g;
            best_left = left;
        }
    }
    if (best < 0.0) return;

    // MDL acceptance: gain must exceed log2(n-1)/n + delta/n.
    const int n1 = static_cast<int>(col.starts[best_group + 1] - ilo);
    const int n2 = n - n1;
    std::vector<int> right(n_classes);
    for (int c = 0; c < n_classes; ++c) right[c] = total[c] - best_left[c];
    const int k = distinct_classes(total);
    const int k1 = distinct_classes(best_left);
    const int k2 = distinct_classes(right);
    const double ent1 = entropy_bits(best_left, n1);
    const double ent2 = entropy_bits(right, n2);
    const double delta = std::log2(std::pow(3.0, k) - 2.0) -
                         (k * ent_s - k1 * ent1 - k2 * ent2);
    const double threshold = std::log2(static_cast<double>(n) - 1.0) / n + delta / n;
    const double gain = ent_s - (static_cast<double>(n1) / n) * ent1 -
                        (static_cast<double>(n2) / n) * ent2;
    if (gain <= threshold) return;

    const double cut = 0.5 * (col.values[col.starts[best_group + 1] - 1] +
                              col.values[col.starts[best_group + 1]]);
    cuts.push_back(cut);
    mdlp_recurse(col, glo, best_group + 1, n_classes, cuts);
    mdlp_recurse(col, best_group + 1, ghi, n_classes, cuts);
}

}  // namespace

int DiscretizationModel::bin_of(double value, const std::vector<double>& cuts) {
    return static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), value) -
                            cuts.begin());
}

std::vector<double> fit_mdlp(std::span<const double> values, std::span<const int> labels,
                             int n_classes) {
    if (values.size() != labels.size())
        throw ContractViolation("fit_mdlp: values and labels must have equal length");
    if (values.empty()) throw ContractViolation("fit_mdlp: need at least one sample");

    SortedColumn col;
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    col.values.reserve(values.size());
    col.labels.reserve(values.size());
    for (const std::size_t i : order) {
        col.values.push_back(values[i]);
        col.labels.push_back(labels[i]);
    }
    col.starts.push_back(0);
    for (std::size_t i = 1; i < col.values.size(); ++i)
        if (col.values[i] != col.values[i - 1]) col.starts.push_back(i);
    col.starts.push_back(col.values.size());

    std::vector<double> cuts;
    mdlp_recurse(col, 0, col.starts.size() - 1, n_classes, cuts);
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

DiscretizationModel fit_discretization(const Dataset& data,
                                       std::span<const std::size_t> train_rows) {
    DiscretizationModel model;
    model.cuts.resize(data.n_cols());
    const auto& y = data.columns[data.class_index];
    const int n_classes = data.cardinalities[data.class_index];
    std::vector<double> vals;
    std::vector<int> labels;
    for (std::size_t j = 0; j < data.n_cols(); ++j) {
        if (!data.is_numeric(j)) continue;
        vals.clear();
        labels.clear();
        for (const std::size_t r : train_rows) {
            vals.push_back(data.raw[j][r]);
            labels.push_back(y[r]);
        }
        model.cuts[j] = fit_mdlp(vals, labels, n_classes);
    }
    return model;
}

Dataset apply_discretization(const DiscretizationModel& model, const Dataset& data) {
    Dataset out = data;
    for (std::size_t j = 0; j < data.n_cols(); ++j) {
        if (!data.is_numeric(j)) continue;
        const auto& cuts = model.cuts[j];
        out.columns[j].resize(data.n_rows);
        for (std::size_t r = 0; r < data.n_rows; ++r)
            out.columns[j][r] = DiscretizationModel::bin_of(data.raw[j][r], cuts);
        out.raw[j].clear();
        out.cardinalities[j] = static_cast<int>(cuts.size()) + 1;
        out.labels[j].resize(out.cardinalities[j]);
        for (int b = 0; b < out.cardinalities[j]; ++b)
            out.labels[j][b] = "bin" + std::to_string(b);
    }
    return out;
}

}  // namespace hls
