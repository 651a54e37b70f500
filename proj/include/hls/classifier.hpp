// Assembles per-node CPTs into a Bayesian network classifier.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hls/additive.hpp"
#include "hls/cpt_tree.hpp"
#include "hls/data.hpp"
#include "hls/gibbs.hpp"
#include "hls/map_fit.hpp"
#include "hls/mdlp.hpp"
#include "hls/structure.hpp"

namespace hls {

enum class SmootherFamily { Mle, Additive, MapRidge, MapRidgeCv, MapLasso, Bayes };

struct SmootherConfig {
    SmootherFamily family = SmootherFamily::MapRidge;
    double m = 1.0;    // additive pseudo-counts
    double tau = 1.0;  // map penalty strength
    bool naive_cv = false;  // wide log-grid CV instead of the [0, 5] interval
    GlsConfig gls;
    bool drop_last_column = true;
    bool intercept = false;
    std::string tag;  // canonical string form

    /// Parses "mle", "add:m", "hls-nb[:tau]", "hls-cv[:naive]",
    /// "hls-lasso:tau", "hls-bayes:{ridge-ig,ridge-hc,hs,hs-ig}".
    static SmootherConfig parse(const std::string& spec);
};

struct StructureConfig {
    NetworkStructure::Kind kind = NetworkStructure::Kind::Tan;
    int k = 1;
    std::string tag;

    /// Parses "tan" or "kdb:K".
    static StructureConfig parse(const std::string& spec);
};

struct NodeModel {
    CptTree tree;
    Cpt theta;
};

struct BncModel {
    int format_version = 1;
    NetworkStructure structure;
    NodeModel class_node;            // zero-parent tree over Y
    std::vector<NodeModel> nodes;    // one per attribute column, in column order
    std::string smoothing;
    // Prediction-time encoders.
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> labels;
    std::vector<std::vector<double>> cuts;  // per-column, empty if categorical
    std::vector<bool> numeric;              // columns binned through cuts
    std::vector<int> cardinalities;
    int class_index = -1;

    std::string to_json() const;
    static BncModel from_json(const std::string& text);

    /// Encodes one raw CSV record (string cells in column order).
    std::vector<int> encode_row(std::span<const std::string> cells) const;
};

/// Learns the structure on the (fully categorical) dataset and fits every
/// node's CPT with the configured smoother. Deterministic given the seed.
BncModel train(const Dataset& data, const StructureConfig& structure,
               const SmootherConfig& smoother, std::uint64_t seed);

/// Class posterior P(y | x) for an encoded row, log-space accumulation with
/// log-sum-exp normalization.
Eigen::VectorXd predict_posterior(const BncModel& model, std::span<const int> row);

/// argmax of predict_posterior; ties break toward the lowest class index.
int predict_class(const BncModel& model, std::span<const int> row);

}  // namespace hls
