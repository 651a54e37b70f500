#include "hls/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hls/common.hpp"

namespace hls {
namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// RFC-4180 subset: quoted fields with doubled quotes, comma separator.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted)
        throw ParseError("unterminated quote on line " + std::to_string(line_no));
    out.push_back(cur);
    return out;
}

}  // namespace

Schema Schema::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open schema file: " + path);
    Schema schema;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("schema line " + std::to_string(line_no) +
                              ": expected key=value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key == "class") {
            schema.class_column = val;
        } else if (val == "categorical") {
            schema.types[key] = ColumnType::Categorical;
        } else if (val == "numeric") {
            schema.types[key] = ColumnType::Numeric;
        } else {
            throw ConfigError("schema line " + std::to_string(line_no) +
                              ": unknown type '" + val + "'");
        }
    }
    if (schema.class_column.empty())
        throw ConfigError("schema is missing the class column (class=<name>)");
    return schema;
}

std::vector<int> Dataset::attribute_indices() const {
    std::vector<int> idx;
    idx.reserve(n_cols() - 1);
    for (int j = 0; j < static_cast<int>(n_cols()); ++j)
        if (j != class_index) idx.push_back(j);
    return idx;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.names = names;
    out.labels = labels;
    out.cardinalities = cardinalities;
    out.class_index = class_index;
    out.n_rows = rows.size();
    out.columns.resize(n_cols());
    out.raw.resize(n_cols());
    for (std::size_t j = 0; j < n_cols(); ++j) {
        if (is_numeric(j)) {
            out.raw[j].reserve(rows.size());
            for (const std::size_t r : rows) out.raw[j].push_back(raw[j][r]);
        } else {
            out.columns[j].reserve(rows.size());
            for (const std::size_t r : rows) out.columns[j].push_back(columns[j][r]);
        }
    }
    return out;
}

int Dataset::encode(std::size_t j, const std::string& value) const {
    const auto& dict = labels[j];
    for (std::size_t code = 0; code < dict.size(); ++code)
        if (dict[code] == value) return static_cast<int>(code);
    return cardinalities[j] - 1;  // reserved bin for unseen values
}

void Dataset::check_invariants() const {
    if (n_rows < 1) throw ContractViolation("dataset: n_rows must be >= 1");
    for (std::size_t j = 0; j < n_cols(); ++j) {
        if (is_numeric(j)) continue;
        if (cardinalities[j] < 1)
            throw ContractViolation("dataset: cardinality[" + std::to_string(j) +
                                    "] must be >= 1");
        for (const int v : columns[j])
            if (v < 0 || v >= cardinalities[j])
                throw ContractViolation("dataset: cell value out of range in column " +
                                        std::to_string(j));
    }
}

Dataset load_csv(const std::string& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open csv file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty csv file: " + path);

    Dataset data;
    data.names = split_csv_line(line, 1);
    const std::size_t p = data.names.size();
    for (const auto& [name, type] : schema.types) {
        (void)type;
        if (std::find(data.names.begin(), data.names.end(), name) == data.names.end())
            throw ConfigError("schema names unknown column '" + name + "'");
    }
    {
        const auto it =
            std::find(data.names.begin(), data.names.end(), schema.class_column);
        if (it == data.names.end())
            throw ConfigError("schema class column '" + schema.class_column +
                              "' not present in csv header");
        data.class_index = static_cast<int>(it - data.names.begin());
    }

    std::vector<ColumnType> types(p, ColumnType::Categorical);
    for (std::size_t j = 0; j < p; ++j) {
        const auto it = schema.types.find(data.names[j]);
        if (it != schema.types.end()) types[j] = it->second;
    }
    if (types[data.class_index] == ColumnType::Numeric)
        throw ConfigError("class column must be categorical");

    data.columns.resize(p);
    data.raw.resize(p);
    data.labels.resize(p);
    data.cardinalities.assign(p, 0);
    std::vector<std::unordered_map<std::string, int>> codebook(p);

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line, line_no);
        if (cells.size() != p)
            throw ParseError("row " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " fields, expected " +
                             std::to_string(p));
        for (std::size_t j = 0; j < p; ++j) {
            const std::string cell = trim(cells[j]);
            if (types[j] == ColumnType::Numeric) {
                double v = 0.0;
                const auto [ptr, ec] =
                    std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (ec != std::errc{} || ptr != cell.data() + cell.size())
                    throw ParseError("row " + std::to_string(line_no) +
                                     ": bad numeric value '" + cell + "'");
                data.raw[j].push_back(v);
            } else {
                auto [it, inserted] =
                    codebook[j].emplace(cell, static_cast<int>(codebook[j].size()));
                if (inserted) data.labels[j].push_back(cell);
                data.columns[j].push_back(it->second);
            }
        }
        ++data.n_rows;
    }
    if (data.n_rows == 0) throw ParseError("csv has a header but no data rows: " + path);
    for (std::size_t j = 0; j < p; ++j)
        if (types[j] == ColumnType::Categorical)
            data.cardinalities[j] = static_cast<int>(data.labels[j].size());
    return data;
}

FoldPlan make_folds(const Dataset& data, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("make_folds: k must be >= 2");
    if (static_cast<std::size_t>(k) > data.n_rows)
        throw ConfigError("make_folds: k exceeds the number of rows");
    const auto& y = data.columns[data.class_index];
    const int n_classes = data.cardinalities[data.class_index];

    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t r = 0; r < data.n_rows; ++r) by_class[y[r]].push_back(r);

    Rng rng(Rng::derive(seed, 0x0f01d5));
    FoldPlan plan;
    plan.k = k;
    plan.assignment.assign(data.n_rows, -1);
    // Deal shuffled class groups onto folds with one running counter, so
    // fold sizes stay balanced globally while classes spread evenly.
    std::size_t counter = 0;
    for (auto& group : by_class) {
        for (std::size_t i = group.size(); i > 1; --i)
            std::swap(group[i - 1],
                      group[static_cast<std::size_t>(rng.uniform() * static_cast<double>(i))]);
        for (const std::size_t r : group) plan.assignment[r] = static_cast<int>(counter++ % k);
    }
    return plan;
}

Dataset gen_synthetic(int p_parents, int cardinality, std::size_t n_samples,
                      std::uint64_t seed) {
    if (p_parents < 1) throw ConfigError("gen_synthetic: p_parents must be >= 1");
    if (cardinality < 2) throw ConfigError("gen_synthetic: cardinality must be >= 2");
    const int d = p_parents + 1;
    Rng rng(Rng::derive(seed, 0x5e17));

    // Random SPD correlation matrix: normalized Gram of a Gaussian matrix.
    std::vector<std::vector<double>> g(d, std::vector<double>(d));
    for (auto& row : g)
        for (auto& v : row) v = rng.normal();
    std::vector<std::vector<double>> corr(d, std::vector<double>(d, 0.0));
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double s = 0.0;
            for (int t = 0; t < d; ++t) s += g[t][a] * g[t][b];
            corr[a][b] = s;
        }
    for (int a = 0; a < d; ++a) {
        const double sa = std::sqrt(corr[a][a]);
        for (int b = 0; b < d; ++b) corr[a][b] /= sa * std::sqrt(corr[b][b]);
    }

    // Cholesky of the correlation matrix (SPD by construction; tiny jitter
    // guards rank-deficient Gram draws).
    std::vector<std::vector<double>> chol(d, std::vector<double>(d, 0.0));
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b <= a; ++b) {
            double s = corr[a][b];
            for (int t = 0; t < b; ++t) s -= chol[a][t] * chol[b][t];
            if (a == b) {
                chol[a][a] = std::sqrt(std::max(s, 1e-12));
            } else {
                chol[a][b] = s / chol[b][b];
            }
        }
    }

    std::vector<std::vector<double>> z(d, std::vector<double>(n_samples));
    std::vector<double> iid(d);
    for (std::size_t r = 0; r < n_samples; ++r) {
        for (int t = 0; t < d; ++t) iid[t] = rng.normal();
        for (int a = 0; a < d; ++a) {
            double s = 0.0;
            for (int t = 0; t <= a; ++t) s += chol[a][t] * iid[t];
            z[a][r] = s;
        }
    }

    Dataset data;
    data.class_index = p_parents;  // the child column
    data.n_rows = n_samples;
    data.columns.resize(d);
    data.raw.resize(d);
    data.labels.resize(d);
    data.cardinalities.assign(d, cardinality);
    std::vector<std::size_t> order(n_samples);
    for (int a = 0; a < d; ++a) {
        data.names.push_back(a == p_parents ? "child" : "x" + std::to_string(a));
        data.labels[a].resize(cardinality);
        for (int v = 0; v < cardinality; ++v) data.labels[a][v] = std::to_string(v);
        // Equal-frequency binning: rank r gets bin floor(r * cardinality / n).
        std::iota(order.begin(), order.end(), std::size_t{0});
        const auto& col = z[a];
        std::sort(order.begin(), order.end(),
                  [&](std::size_t i, std::size_t j) { return col[i] < col[j]; });
        data.columns[a].resize(n_samples);
        for (std::size_t rank = 0; rank < n_samples; ++rank) {
            const int bin = static_cast<int>(
                (rank * static_cast<std::size_t>(cardinality)) / n_samples);
            data.columns[a][order[rank]] = std::min(bin, cardinality - 1);
        }
    }
    return data;
}

}  // namespace hls
