// Cross-validated benchmarking, Win-Draw-Loss aggregation, and the timing
// harness.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hls/classifier.hpp"
#include "hls/data.hpp"

namespace hls {

struct ModelConfig {
    StructureConfig structure;
    SmootherConfig smoother;

    std::string tag() const { return structure.tag + "+" + smoother.tag; }
};

struct EvalResult {
    std::string dataset;
    std::string model;
    std::size_t n_rows = 0;
    std::vector<double> fold_zero_one;              // per-fold error rate
    std::vector<double> fold_log_loss;              // per-fold mean -ln p
    std::vector<std::vector<double>> row_log_loss;  // per-fold per-test-row scores
    double fit_seconds = 0.0;

    double mean_zero_one() const;
    double mean_log_loss() const;
};

/// Per fold: refit discretization on the training rows, train, score the
/// held-out rows. Deterministic given the fold plan and seed.
EvalResult run_cv(const Dataset& raw, const std::string& dataset_name,
                  const ModelConfig& config, const FoldPlan& folds, std::uint64_t seed);

enum class LossKind { ZeroOne, LogLoss };

struct WdlRecord {
    int wins = 0;
    int draws = 0;
    int losses = 0;
};

/// Per-dataset comparison of mean losses for A vs B; |diff| <= tolerance is
/// a draw. Datasets are matched by name and must coincide.
WdlRecord wdl(std::span<const EvalResult> results_a, std::span<const EvalResult> results_b,
              LossKind loss, double draw_tolerance);

struct TimingConfig {
    int p_parents = 4;
    int cardinality = 2;
    std::size_t n_samples = 1000;
    int repetitions = 10;
    double tau = 1.0;
    std::uint64_t seed = 7;
};

/// Minimum wall-clock seconds over repetitions of the parameter-learning
/// call alone. "hls-fast" fits on leaf-aggregated multinomial counts,
/// "hls-slow" on the per-sample duplicated design; construction is excluded
/// from the timed region in both.
double time_fit(const TimingConfig& config, const std::string& variant);

}  // namespace hls
