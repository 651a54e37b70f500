// Structure learners: TAN and kDB over mutual-information statistics.
#pragma once

#include <string>
#include <vector>

#include "hls/data.hpp"

namespace hls {

/// Plug-in MI/CMI estimates in nats over the dataset's attribute columns.
struct MiTable {
    int class_index = -1;
    std::vector<int> attributes;           // attribute column indices
    std::vector<double> mi_with_class;     // indexed like `attributes`
    std::vector<std::vector<double>> cmi;  // symmetric, indexed like `attributes`

    double mi(int attr_col) const;
    double cmi_between(int a_col, int b_col) const;
};

struct NetworkStructure {
    enum class Kind { Tan, Kdb };
    Kind kind = Kind::Tan;
    int k = 0;  // kDB only
    int class_index = -1;
    int n_cols = 0;
    // parents[j] for attribute column j: ordered parent columns, class first.
    // Empty for the class column itself.
    std::vector<std::vector<int>> parents;

    std::string to_json(const std::vector<std::string>& names) const;
    /// Topological-sort check over the attribute-only subgraph.
    bool is_acyclic() const;
};

MiTable compute_mi_tables(const Dataset& data);

/// I(X_a; X_b | X_cond) in nats for two categorical columns.
double cmi_given_class(const Dataset& data, int a_col, int b_col, int cond_col);

NetworkStructure learn_tan(const MiTable& table);
NetworkStructure learn_kdb(const MiTable& table, int k);

}  // namespace hls
