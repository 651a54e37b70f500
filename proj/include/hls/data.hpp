// Dataset ingestion, fold splitting, and synthetic table generation.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace hls {

enum class ColumnType { Categorical, Numeric };

struct Schema {
    std::string class_column;
    // Columns not listed default to categorical.
    std::unordered_map<std::string, ColumnType> types;

    static Schema from_file(const std::string& path);
};

/// Categorical data table. Numeric columns keep raw values until a
/// DiscretizationModel is applied; their cardinality is 0 (unset) until then.
/// Immutable once loaded, safe to share across parallel workers.
struct Dataset {
    std::vector<std::string> names;
    std::vector<std::vector<int>> columns;        // codes; empty for raw numeric
    std::vector<std::vector<double>> raw;         // raw values; empty for categorical
    std::vector<std::vector<std::string>> labels; // code -> label, categorical only
    std::vector<int> cardinalities;               // 0 while numeric/undiscretized
    int class_index = -1;
    std::size_t n_rows = 0;

    bool is_numeric(std::size_t j) const { return !raw[j].empty(); }
    std::size_t n_cols() const { return columns.size(); }

    /// Attribute column indices (every column except the class).
    std::vector<int> attribute_indices() const;

    /// Row-subset copy (used by cross-validation).
    Dataset subset(std::span<const std::size_t> rows) const;

    /// Encode a raw categorical label for column j; unseen labels map to the
    /// reserved last bin (cardinality - 1).
    int encode(std::size_t j, const std::string& value) const;

    void check_invariants() const;
};

Dataset load_csv(const std::string& path, const Schema& schema);

struct FoldPlan {
    int k = 0;
    std::vector<int> assignment;  // per-row fold id in [0, k)
};

/// Stratified k-fold assignment; deterministic in (dataset, k, seed), fold
/// sizes differ by at most one.
FoldPlan make_folds(const Dataset& data, int k, std::uint64_t seed);

/// Correlated-Gaussian table: p_parents parent columns plus a child column
/// (last, marked as the class), each discretized into equal-frequency bins.
Dataset gen_synthetic(int p_parents, int cardinality, std::size_t n_samples,
                      std::uint64_t seed);

}  // namespace hls
