#include "hls/classifier.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "hls/common.hpp"

namespace hls {
namespace {

std::vector<double> interval_grid(double lo, double hi, int points) {
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    return grid;
}

std::vector<double> naive_log_grid() {
    std::vector<double> grid;
    for (int e = -4; e <= 4; ++e) grid.push_back(std::pow(10.0, e));
    return grid;
}

Cpt fit_node_theta(const CptTree& tree, const Eigen::MatrixXd& counts,
                   const SmootherConfig& cfg, std::uint64_t seed) {
    switch (cfg.family) {
        case SmootherFamily::Mle:
            return additive_cpt(counts, tree, 0.0);
        case SmootherFamily::Additive:
            return additive_cpt(counts, tree, cfg.m);
        default:
            break;
    }
    DesignMatrix design = build_design(tree, cfg.drop_last_column);
    design.set_counts(counts);
    FitOptions opts;
    opts.tau = cfg.tau;
    opts.intercept = cfg.intercept || tree.depth() == 0;
    switch (cfg.family) {
        case SmootherFamily::MapRidge: {
            const MapFit fit = fit_ridge(design, opts);
            return fitted_cpt(fit, design);
        }
        case SmootherFamily::MapLasso: {
            const MapFit fit = fit_lasso(design, opts);
            return fitted_cpt(fit, design);
        }
        case SmootherFamily::MapRidgeCv: {
            const std::vector<double> grid =
                cfg.naive_cv ? naive_log_grid() : interval_grid(0.0, 5.0, 11);
            const CvChoice choice = fit_ridge_cv(design, grid, 5, seed, opts);
            return fitted_cpt(choice.fit, design);
        }
        case SmootherFamily::Bayes: {
            GlsConfig gls = cfg.gls;
            gls.seed = seed;
            gls.intercept = opts.intercept;
            if (design.counts.cols() == 1) return Cpt::Ones(design.rows, 1);
            return fit_bayes(design, gls).theta;
        }
        default:
            throw ConfigError("unknown smoother family");
    }
}

}  // namespace

SmootherConfig SmootherConfig::parse(const std::string& spec) {
    SmootherConfig cfg;
    cfg.tag = spec;
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);

    if (head == "mle") {
        cfg.family = SmootherFamily::Mle;
    } else if (head == "add") {
        cfg.family = SmootherFamily::Additive;
        cfg.m = arg.empty() ? 1.0 : std::stod(arg);
        if (cfg.m < 0.0) throw ConfigError("add smoother: m must be non-negative");
    } else if (head == "hls-nb") {
        cfg.family = SmootherFamily::MapRidge;
        cfg.tau = arg.empty() ? 1.0 : std::stod(arg);
    } else if (head == "hls-lasso") {
        cfg.family = SmootherFamily::MapLasso;
        cfg.tau = arg.empty() ? 1.0 : std::stod(arg);
    } else if (head == "hls-cv") {
        cfg.family = SmootherFamily::MapRidgeCv;
        if (arg == "naive")
            cfg.naive_cv = true;
        else if (!arg.empty())
            throw ConfigError("hls-cv takes no argument except ':naive'");
    } else if (head == "hls-bayes") {
        cfg.family = SmootherFamily::Bayes;
        if (arg == "ridge-ig" || arg.empty()) {
            cfg.gls.prior = GlsPrior::Ridge;
            cfg.gls.tau_prior = ScalePrior::InverseGamma;
        } else if (arg == "ridge-hc") {
            cfg.gls.prior = GlsPrior::Ridge;
            cfg.gls.tau_prior = ScalePrior::HalfCauchy;
        } else if (arg == "hs") {
            cfg.gls.prior = GlsPrior::Horseshoe;
            cfg.gls.tau_prior = ScalePrior::HalfCauchy;
            cfg.gls.lambda_prior = ScalePrior::HalfCauchy;
        } else if (arg == "hs-ig") {
            cfg.gls.prior = GlsPrior::Horseshoe;
            cfg.gls.tau_prior = ScalePrior::InverseGamma;
            cfg.gls.lambda_prior = ScalePrior::InverseGamma;
        } else {
            throw ConfigError("unknown hls-bayes variant: " + arg);
        }
    } else {
        throw ConfigError("unknown smoother: " + spec);
    }
    return cfg;
}

StructureConfig StructureConfig::parse(const std::string& spec) {
    StructureConfig cfg;
    cfg.tag = spec;
    if (spec == "tan") {
        cfg.kind = NetworkStructure::Kind::Tan;
        return cfg;
    }
    if (spec.rfind("kdb:", 0) == 0) {
        cfg.kind = NetworkStructure::Kind::Kdb;
        cfg.k = std::stoi(spec.substr(4));
        if (cfg.k < 0) throw ConfigError("kdb: K must be >= 0");
        return cfg;
    }
    throw ConfigError("unknown structure: " + spec + " (expected tan or kdb:K)");
}

BncModel train(const Dataset& data, const StructureConfig& structure,
               const SmootherConfig& smoother, std::uint64_t seed) {
    data.check_invariants();
    for (std::size_t j = 0; j < data.n_cols(); ++j)
        if (data.is_numeric(j))
            throw ConfigError("train: column " + std::to_string(j) +
                              " is numeric; discretize first");

    const MiTable table = compute_mi_tables(data);
    BncModel model;
    model.structure = structure.kind == NetworkStructure::Kind::Tan
                          ? learn_tan(table)
                          : learn_kdb(table, structure.k);
    model.smoothing = smoother.tag;
    model.names = data.names;
    model.labels = data.labels;
    model.cardinalities = data.cardinalities;
    model.cuts.assign(data.n_cols(), {});
    model.numeric.assign(data.n_cols(), false);
    model.class_index = data.class_index;

    model.class_node.tree = build_tree_ordered(data, data.class_index, {});
    model.class_node.theta =
        fit_node_theta(model.class_node.tree, aggregate_counts(data, model.class_node.tree),
                       smoother, Rng::derive(seed, 0xc1a55));

    const std::vector<int> attrs = data.attribute_indices();
    model.nodes.resize(attrs.size());
    parallel_for(attrs.size(), [&](std::size_t i) {
        const int col = attrs[i];
        NodeModel node;
        node.tree = build_tree(data, model.structure, col);
        node.theta = fit_node_theta(node.tree, aggregate_counts(data, node.tree), smoother,
                                    Rng::derive(seed, static_cast<std::uint64_t>(col)));
        model.nodes[i] = std::move(node);
    });
    return model;
}

Eigen::VectorXd predict_posterior(const BncModel& model, std::span<const int> row) {
    const int n_classes = model.class_node.tree.child_card;
    Eigen::VectorXd ll(n_classes);
    std::vector<int> path;
    for (int k = 0; k < n_classes; ++k) {
        double acc = std::log(std::max(model.class_node.theta(0, k), 1e-300));
        for (const NodeModel& node : model.nodes) {
            const CptTree& tree = node.tree;
            path.resize(tree.parents.size());
            for (std::size_t d = 0; d < tree.parents.size(); ++d) {
                const int col = tree.parents[d];
                int v = col == model.class_index ? k : row[col];
                v = std::clamp(v, 0, tree.parent_cards[d] - 1);
                path[d] = v;
            }
            const int xv =
                std::clamp(row[tree.child], 0, tree.child_card - 1);
            acc += std::log(std::max(node.theta(tree.leaf_index(path), xv), 1e-300));
        }
        ll[k] = acc;
    }
    const double mx = ll.maxCoeff();
    Eigen::VectorXd post = (ll.array() - mx).exp();
    post /= post.sum();
    return post;
}

int predict_class(const BncModel& model, std::span<const int> row) {
    const Eigen::VectorXd post = predict_posterior(model, row);
    int best = 0;
    for (int k = 1; k < post.size(); ++k)
        if (post[k] > post[best]) best = k;  // ties keep the lowest index
    return best;
}

std::vector<int> BncModel::encode_row(std::span<const std::string> cells) const {
    if (cells.size() != names.size())
        throw ParseError("record has " + std::to_string(cells.size()) +
                         " fields, expected " + std::to_string(names.size()));
    std::vector<int> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
        if (numeric[j]) {
            row[j] = DiscretizationModel::bin_of(std::stod(cells[j]), cuts[j]);
        } else {
            int code = cardinalities[j] - 1;  // reserved bin for unseen labels
            for (std::size_t v = 0; v < labels[j].size(); ++v)
                if (labels[j][v] == cells[j]) {
                    code = static_cast<int>(v);
                    break;
                }
            row[j] = code;
        }
    }
    return row;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
    return m;
}

nlohmann::json node_to_json(const NodeModel& node) {
    nlohmann::json doc;
    doc["child"] = node.tree.child;
    doc["child_card"] = node.tree.child_card;
    doc["parents"] = node.tree.parents;
    doc["parent_cards"] = node.tree.parent_cards;
    doc["theta"] = matrix_to_json(node.theta);
    return doc;
}

NodeModel node_from_json(const nlohmann::json& doc) {
    NodeModel node;
    node.tree.child = doc.at("child").get<int>();
    node.tree.child_card = doc.at("child_card").get<int>();
    node.tree.parents = doc.at("parents").get<std::vector<int>>();
    node.tree.parent_cards = doc.at("parent_cards").get<std::vector<int>>();
    node.tree.depth_offset.resize(node.tree.parents.size() + 1);
    node.tree.depth_offset[0] = 0;
    std::int64_t block = 1;
    for (std::size_t d = 0; d < node.tree.parents.size(); ++d) {
        block *= node.tree.parent_cards[d];
        node.tree.depth_offset[d + 1] = node.tree.depth_offset[d] + block;
    }
    node.theta = matrix_from_json(doc.at("theta"));
    return node;
}

}  // namespace

std::string BncModel::to_json() const {
    nlohmann::json doc;
    doc["format_version"] = format_version;
    doc["smoothing"] = smoothing;
    doc["names"] = names;
    doc["labels"] = labels;
    doc["cuts"] = cuts;
    doc["numeric"] = numeric;
    doc["cardinalities"] = cardinalities;
    doc["class_index"] = class_index;
    doc["structure"]["kind"] =
        structure.kind == NetworkStructure::Kind::Tan ? "tan" : "kdb";
    doc["structure"]["k"] = structure.k;
    doc["structure"]["class_index"] = structure.class_index;
    doc["structure"]["n_cols"] = structure.n_cols;
    doc["structure"]["parents"] = structure.parents;
    doc["class_node"] = node_to_json(class_node);
    nlohmann::json node_docs = nlohmann::json::array();
    for (const NodeModel& node : nodes) node_docs.push_back(node_to_json(node));
    doc["nodes"] = node_docs;
    return doc.dump();
}

BncModel BncModel::from_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    BncModel model;
    model.format_version = doc.at("format_version").get<int>();
    if (model.format_version != 1)
        throw ConfigError("unsupported model format version " +
                          std::to_string(model.format_version));
    model.smoothing = doc.at("smoothing").get<std::string>();
    model.names = doc.at("names").get<std::vector<std::string>>();
    model.labels = doc.at("labels").get<std::vector<std::vector<std::string>>>();
    model.cuts = doc.at("cuts").get<std::vector<std::vector<double>>>();
    model.numeric = doc.at("numeric").get<std::vector<bool>>();
    model.cardinalities = doc.at("cardinalities").get<std::vector<int>>();
    model.class_index = doc.at("class_index").get<int>();
    const auto& s = doc.at("structure");
    model.structure.kind = s.at("kind").get<std::string>() == "tan"
                               ? NetworkStructure::Kind::Tan
                               : NetworkStructure::Kind::Kdb;
    model.structure.k = s.at("k").get<int>();
    model.structure.class_index = s.at("class_index").get<int>();
    model.structure.n_cols = s.at("n_cols").get<int>();
    model.structure.parents = s.at("parents").get<std::vector<std::vector<int>>>();
    model.class_node = node_from_json(doc.at("class_node"));
    for (const auto& node : doc.at("nodes")) model.nodes.push_back(node_from_json(node));
    return model;
}

}  // namespace hls
