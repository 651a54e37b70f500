#include "hls/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include <nlohmann/json.hpp>

#include "hls/common.hpp"

namespace hls {
namespace {

int attr_pos(const std::vector<int>& attrs, int col) {
    const auto it = std::find(attrs.begin(), attrs.end(), col);
    if (it == attrs.end())
        throw ContractViolation("column " + std::to_string(col) + " is not an attribute");
    return static_cast<int>(it - attrs.begin());
}

}  // namespace

double MiTable::mi(int attr_col) const { return mi_with_class[attr_pos(attributes, attr_col)]; }

double MiTable::cmi_between(int a_col, int b_col) const {
    return cmi[attr_pos(attributes, a_col)][attr_pos(attributes, b_col)];
}

double cmi_given_class(const Dataset& data, int a_col, int b_col, int cond_col) {
    const auto& y = data.columns[cond_col];
    const int cy = data.cardinalities[cond_col];
    const int ca = data.cardinalities[a_col];
    const int cb = data.cardinalities[b_col];
    const auto& xa = data.columns[a_col];
    const auto& xb = data.columns[b_col];
    const double n = static_cast<double>(data.n_rows);
    std::vector<double> nabc(static_cast<std::size_t>(ca) * cb * cy, 0.0);
    std::vector<double> nac(static_cast<std::size_t>(ca) * cy, 0.0);
    std::vector<double> nbc(static_cast<std::size_t>(cb) * cy, 0.0);
    std::vector<double> nc(cy, 0.0);
    for (std::size_t r = 0; r < data.n_rows; ++r) {
        const int va = xa[r], vb = xb[r], c = y[r];
        nabc[(static_cast<std::size_t>(va) * cb + vb) * cy + c] += 1.0;
        nac[static_cast<std::size_t>(va) * cy + c] += 1.0;
        nbc[static_cast<std::size_t>(vb) * cy + c] += 1.0;
        nc[c] += 1.0;
    }
    double cmi = 0.0;
    for (int va = 0; va < ca; ++va)
        for (int vb = 0; vb < cb; ++vb)
            for (int c = 0; c < cy; ++c) {
                const double nj = nabc[(static_cast<std::size_t>(va) * cb + vb) * cy + c];
                if (nj > 0.0)
                    cmi += (nj / n) * std::log(nc[c] * nj /
                                               (nac[static_cast<std::size_t>(va) * cy + c] *
                                                nbc[static_cast<std::size_t>(vb) * cy + c]));
            }
    return std::max(cmi, 0.0);
}

MiTable compute_mi_tables(const Dataset& data) {
    for (std::size_t j = 0; j < data.n_cols(); ++j)
        if (data.is_numeric(j))
            throw ContractViolation("compute_mi_tables: column " + std::to_string(j) +
                                    " is not categorical");
    MiTable table;
    table.class_index = data.class_index;
    table.attributes = data.attribute_indices();
    const std::size_t p = table.attributes.size();
    const auto& y = data.columns[data.class_index];
    const int cy = data.cardinalities[data.class_index];
    const double n = static_cast<double>(data.n_rows);

    table.mi_with_class.assign(p, 0.0);
    for (std::size_t a = 0; a < p; ++a) {
        const int col = table.attributes[a];
        const int ca = data.cardinalities[col];
        std::vector<double> joint(static_cast<std::size_t>(ca) * cy, 0.0);
        std::vector<double> mx(ca, 0.0), my(cy, 0.0);
        for (std::size_t r = 0; r < data.n_rows; ++r) {
            const int v = data.columns[col][r];
            joint[static_cast<std::size_t>(v) * cy + y[r]] += 1.0;
            mx[v] += 1.0;
            my[y[r]] += 1.0;
        }
        double mi = 0.0;
        for (int v = 0; v < ca; ++v)
            for (int c = 0; c < cy; ++c) {
                const double nvc = joint[static_cast<std::size_t>(v) * cy + c];
                if (nvc > 0.0) mi += (nvc / n) * std::log(n * nvc / (mx[v] * my[c]));
            }
        table.mi_with_class[a] = std::max(mi, 0.0);
    }

    table.cmi.assign(p, std::vector<double>(p, 0.0));
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a + 1; b < p; ++b) pairs.emplace_back(a, b);
    parallel_for(pairs.size(), [&](std::size_t idx) {
        const auto [a, b] = pairs[idx];
        const double cmi = cmi_given_class(data, table.attributes[a],
                                           table.attributes[b], data.class_index);
        table.cmi[a][b] = cmi;
        table.cmi[b][a] = cmi;
    });
    return table;
}

NetworkStructure learn_tan(const MiTable& table) {
    const std::size_t p = table.attributes.size();
    if (p < 1) throw ContractViolation("learn_tan: need at least one attribute");

    NetworkStructure net;
    net.kind = NetworkStructure::Kind::Tan;
    net.class_index = table.class_index;
    net.n_cols = static_cast<int>(p) + 1;
    {
        int max_col = table.class_index;
        for (const int c : table.attributes) max_col = std::max(max_col, c);
        net.n_cols = max_col + 1;
    }
    net.parents.assign(net.n_cols, {});

    // Kruskal with ties broken toward the lowest (i, j) attribute pair.
    struct Edge {
        double w;
        std::size_t a, b;
    };
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a + 1; b < p; ++b) edges.push_back({table.cmi[a][b], a, b});
    std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
        if (x.w != y.w) return x.w > y.w;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    std::vector<std::size_t> uf(p);
    std::iota(uf.begin(), uf.end(), std::size_t{0});
    const auto find = [&](std::size_t x) {
        while (uf[x] != x) x = uf[x] = uf[uf[x]];
        return x;
    };
    std::vector<std::vector<std::size_t>> adj(p);
    std::size_t taken = 0;
    for (const auto& e : edges) {
        const auto ra = find(e.a), rb = find(e.b);
        if (ra == rb) continue;
        uf[ra] = rb;
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
        if (++taken == p - 1) break;
    }

    // Root the tree at attribute 0 and direct edges away from it.
    std::vector<int> tree_parent(p, -1);
    std::vector<bool> seen(p, false);
    std::queue<std::size_t> bfs;
    bfs.push(0);
    seen[0] = true;
    while (!bfs.empty()) {
        const std::size_t u = bfs.front();
        bfs.pop();
        for (const std::size_t v : adj[u]) {
            if (seen[v]) continue;
            seen[v] = true;
            tree_parent[v] = static_cast<int>(u);
            bfs.push(v);
        }
    }
    for (std::size_t a = 0; a < p; ++a) {
        auto& par = net.parents[table.attributes[a]];
        par.push_back(table.class_index);
        if (tree_parent[a] >= 0) par.push_back(table.attributes[tree_parent[a]]);
    }
    return net;
}

NetworkStructure learn_kdb(const MiTable& table, int k) {
    if (k < 0) throw ConfigError("learn_kdb: K must be >= 0");
    const std::size_t p = table.attributes.size();
    NetworkStructure net;
    net.kind = NetworkStructure::Kind::Kdb;
    net.k = k;
    net.class_index = table.class_index;
    {
        int max_col = table.class_index;
        for (const int c : table.attributes) max_col = std::max(max_col, c);
        net.n_cols = max_col + 1;
    }
    net.parents.assign(net.n_cols, {});

    // Rank attributes by descending I(X;Y); ties toward lower column index.
    std::vector<std::size_t> rank(p);
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
        if (table.mi_with_class[a] != table.mi_with_class[b])
            return table.mi_with_class[a] > table.mi_with_class[b];
        return table.attributes[a] < table.attributes[b];
    });

    for (std::size_t r = 0; r < p; ++r) {
        const std::size_t a = rank[r];
        auto& par = net.parents[table.attributes[a]];
        par.push_back(table.class_index);
        // Candidates: attributes ranked earlier; keep the top-K by CMI.
        std::vector<std::size_t> cand(rank.begin(), rank.begin() + r);
        std::sort(cand.begin(), cand.end(), [&](std::size_t x, std::size_t y) {
            if (table.cmi[a][x] != table.cmi[a][y]) return table.cmi[a][x] > table.cmi[a][y];
            return table.attributes[x] < table.attributes[y];
        });
        const std::size_t take = std::min<std::size_t>(k, cand.size());
        for (std::size_t i = 0; i < take; ++i)
            par.push_back(table.attributes[cand[i]]);
    }
    return net;
}

bool NetworkStructure::is_acyclic() const {
    // Kahn's algorithm over attribute-to-attribute edges.
    std::vector<int> indeg(n_cols, 0);
    std::vector<std::vector<int>> out(n_cols);
    for (int j = 0; j < n_cols; ++j) {
        if (j == class_index) continue;
        for (const int par : parents[j]) {
            if (par == class_index) continue;
            out[par].push_back(j);
            ++indeg[j];
        }
    }
    std::queue<int> q;
    int visited = 0, total = 0;
    for (int j = 0; j < n_cols; ++j) {
        if (j == class_index) continue;
        ++total;
        if (indeg[j] == 0) q.push(j);
    }
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        ++visited;
        for (const int v : out[u])
            if (--indeg[v] == 0) q.push(v);
    }
    return visited == total;
}

std::string NetworkStructure::to_json(const std::vector<std::string>& names) const {
    nlohmann::json doc;
    doc["kind"] = kind == Kind::Tan ? "tan" : "kdb";
    if (kind == Kind::Kdb) doc["k"] = k;
    doc["class"] = names[class_index];
    nlohmann::json nodes = nlohmann::json::object();
    for (int j = 0; j < n_cols; ++j) {
        if (j == class_index) continue;
        nlohmann::json par = nlohmann::json::array();
        for (const int q : parents[j]) par.push_back(names[q]);
        nodes[names[j]] = par;
    }
    doc["parents"] = nodes;
    return doc.dump(2);
}

}  // namespace hls
