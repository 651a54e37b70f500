#include "hls/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "hls/common.hpp"
#include "hls/map_fit.hpp"
#include "hls/mdlp.hpp"

namespace hls {
namespace {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double EvalResult::mean_zero_one() const { return mean_of(fold_zero_one); }
double EvalResult::mean_log_loss() const { return mean_of(fold_log_loss); }

EvalResult run_cv(const Dataset& raw, const std::string& dataset_name,
                  const ModelConfig& config, const FoldPlan& folds, std::uint64_t seed) {
    EvalResult result;
    result.dataset = dataset_name;
    result.model = config.tag();
    result.n_rows = raw.n_rows;

    bool any_numeric = false;
    for (std::size_t j = 0; j < raw.n_cols(); ++j) any_numeric |= raw.is_numeric(j);

    for (int f = 0; f < folds.k; ++f) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t r = 0; r < raw.n_rows; ++r)
            (folds.assignment[r] == f ? test_rows : train_rows).push_back(r);
        if (train_rows.empty() || test_rows.empty())
            throw ConfigError("run_cv: fold " + std::to_string(f) + " is degenerate");

        Dataset full = raw;
        if (any_numeric) {
            const DiscretizationModel disc = fit_discretization(raw, train_rows);
            full = apply_discretization(disc, raw);
        }
        const Dataset train_data = full.subset(train_rows);

        const auto t0 = std::chrono::steady_clock::now();
        const BncModel model = train(train_data, config.structure, config.smoother,
                                     Rng::derive(seed, static_cast<std::uint64_t>(f)));
        const auto t1 = std::chrono::steady_clock::now();
        result.fit_seconds += std::chrono::duration<double>(t1 - t0).count();

        std::vector<double> scores;
        scores.reserve(test_rows.size());
        int errors = 0;
        std::vector<int> row(full.n_cols());
        for (const std::size_t r : test_rows) {
            for (std::size_t j = 0; j < full.n_cols(); ++j) row[j] = full.columns[j][r];
            const int truth = row[full.class_index];
            const Eigen::VectorXd post = predict_posterior(model, row);
            scores.push_back(-std::log(std::max(post[truth], 1e-300)));
            if (predict_class(model, row) != truth) ++errors;
        }
        result.fold_zero_one.push_back(static_cast<double>(errors) /
                                       static_cast<double>(test_rows.size()));
        result.fold_log_loss.push_back(mean_of(scores));
        result.row_log_loss.push_back(std::move(scores));
    }
    return result;
}

WdlRecord wdl(std::span<const EvalResult> results_a, std::span<const EvalResult> results_b,
              LossKind loss, double draw_tolerance) {
    std::map<std::string, const EvalResult*> by_name;
    for (const EvalResult& r : results_b) by_name[r.dataset] = &r;
    if (by_name.size() != results_a.size() || results_a.size() != results_b.size())
        throw ConfigError("wdl: result sets do not cover the same datasets");

    WdlRecord record;
    for (const EvalResult& a : results_a) {
        const auto it = by_name.find(a.dataset);
        if (it == by_name.end())
            throw ConfigError("wdl: dataset '" + a.dataset + "' missing from second set");
        const EvalResult& b = *it->second;
        const double la = loss == LossKind::ZeroOne ? a.mean_zero_one() : a.mean_log_loss();
        const double lb = loss == LossKind::ZeroOne ? b.mean_zero_one() : b.mean_log_loss();
        if (std::fabs(la - lb) <= draw_tolerance)
            ++record.draws;
        else if (la < lb)
            ++record.wins;
        else
            ++record.losses;
    }
    return record;
}

double time_fit(const TimingConfig& config, const std::string& variant) {
    if (config.repetitions < 1) throw ConfigError("time_fit: repetitions must be >= 1");
    const Dataset data = gen_synthetic(config.p_parents, config.cardinality,
                                       config.n_samples, config.seed);
    std::vector<int> parents(config.p_parents);
    std::iota(parents.begin(), parents.end(), 0);
    const CptTree tree = build_tree_ordered(data, config.p_parents, parents);

    FitOptions opts;
    opts.tau = config.tau;

    DesignMatrix design;
    if (variant == "hls-fast") {
        design = build_design(tree, true);
        design.set_counts(aggregate_counts(data, tree));
    } else if (variant == "hls-slow") {
        design = build_design_rowwise(data, tree, true);
    } else {
        throw ConfigError("time_fit: unknown variant '" + variant +
                          "' (expected hls-fast or hls-slow)");
    }

    double best = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < config.repetitions; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        const MapFit fit = fit_ridge(design, opts);
        const auto t1 = std::chrono::steady_clock::now();
        (void)fit;
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

}  // namespace hls
