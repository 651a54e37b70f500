// Command-line front end: train / predict / bench / timing.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <nlohmann/json.hpp>

#include "hls/common.hpp"
#include "hls/evaluation.hpp"
#include "hls/mdlp.hpp"

namespace fs = std::filesystem;

namespace {

hls::Dataset load_discretized(const std::string& csv, const std::string& schema_path,
                              std::vector<std::vector<double>>* cuts_out,
                              std::vector<bool>* numeric_out) {
    const hls::Schema schema = hls::Schema::from_file(schema_path);
    hls::Dataset data = hls::load_csv(csv, schema);
    std::vector<bool> numeric(data.n_cols(), false);
    for (std::size_t j = 0; j < data.n_cols(); ++j) numeric[j] = data.is_numeric(j);
    if (numeric_out) *numeric_out = numeric;
    bool any = false;
    for (std::size_t j = 0; j < data.n_cols(); ++j) any |= data.is_numeric(j);
    if (any) {
        std::vector<std::size_t> all(data.n_rows);
        std::iota(all.begin(), all.end(), std::size_t{0});
        const hls::DiscretizationModel disc = hls::fit_discretization(data, all);
        if (cuts_out) *cuts_out = disc.cuts;
        data = hls::apply_discretization(disc, data);
    } else if (cuts_out) {
        cuts_out->assign(data.n_cols(), {});
    }
    return data;
}

int cmd_train(const std::string& csv, const std::string& schema_path,
              const std::string& structure, const std::string& smoother,
              std::uint64_t seed, const std::string& out_path) {
    std::vector<std::vector<double>> cuts;
    std::vector<bool> numeric;
    const hls::Dataset data = load_discretized(csv, schema_path, &cuts, &numeric);
    hls::BncModel model =
        hls::train(data, hls::StructureConfig::parse(structure),
                   hls::SmootherConfig::parse(smoother), seed);
    model.cuts = cuts;
    model.numeric = numeric;
    std::ofstream out(out_path);
    if (!out) throw hls::ConfigError("cannot write model file: " + out_path);
    out << model.to_json() << '\n';
    std::cout << "trained " << model.smoothing << " on " << data.n_rows
              << " rows -> " << out_path << '\n';
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& csv,
                const std::string& out_path) {
    std::ifstream in(model_path);
    if (!in) throw hls::ConfigError("cannot open model file: " + model_path);
    std::stringstream buf;
    buf << in.rdbuf();
    const hls::BncModel model = hls::BncModel::from_json(buf.str());

    std::ifstream data(csv);
    if (!data) throw hls::ConfigError("cannot open csv file: " + csv);
    std::string line;
    if (!std::getline(data, line)) throw hls::ParseError("empty csv: " + csv);

    std::ostream* os = &std::cout;
    std::ofstream file_out;
    if (!out_path.empty()) {
        file_out.open(out_path);
        if (!file_out) throw hls::ConfigError("cannot write: " + out_path);
        os = &file_out;
    }
    const int n_classes = model.class_node.tree.child_card;
    *os << "predicted";
    for (int k = 0; k < n_classes; ++k)
        *os << ",p_" << model.labels[model.class_index][k];
    *os << '\n';

    // Column order in the csv may differ from training; map by header name.
    std::vector<std::string> header;
    {
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    std::vector<int> source(model.names.size(), -1);
    for (std::size_t j = 0; j < model.names.size(); ++j) {
        for (std::size_t h = 0; h < header.size(); ++h)
            if (header[h] == model.names[j]) source[j] = static_cast<int>(h);
        if (source[j] < 0 && static_cast<int>(j) != model.class_index)
            throw hls::ConfigError("csv is missing column '" + model.names[j] + "'");
    }

    std::size_t line_no = 1;
    while (std::getline(data, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        std::vector<std::string> ordered(model.names.size(), "");
        for (std::size_t j = 0; j < model.names.size(); ++j)
            if (source[j] >= 0 && source[j] < static_cast<int>(cells.size()))
                ordered[j] = cells[source[j]];
        const std::vector<int> row = model.encode_row(ordered);
        const Eigen::VectorXd post = hls::predict_posterior(model, row);
        const int cls = hls::predict_class(model, row);
        *os << model.labels[model.class_index][cls];
        for (int k = 0; k < n_classes; ++k) *os << ',' << post[k];
        *os << '\n';
    }
    return 0;
}

int cmd_bench(const std::string& data_dir, const std::vector<std::string>& model_specs,
              int folds, std::uint64_t seed, const std::string& out_dir) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(data_dir)) {
        if (entry.path().extension() == ".csv") names.push_back(entry.path().stem());
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) throw hls::ConfigError("no .csv files under " + data_dir);

    fs::create_directories(out_dir);
    fs::create_directories(fs::path(out_dir) / "reports");

    std::vector<hls::ModelConfig> configs;
    for (const std::string& spec : model_specs) {
        const auto plus = spec.find('+');
        if (plus == std::string::npos)
            throw hls::ConfigError("model spec must be <structure>+<smoother>: " + spec);
        hls::ModelConfig cfg;
        cfg.structure = hls::StructureConfig::parse(spec.substr(0, plus));
        cfg.smoother = hls::SmootherConfig::parse(spec.substr(plus + 1));
        configs.push_back(cfg);
    }

    std::ofstream summary(fs::path(out_dir) / "summary.csv");
    summary << "dataset,model,zero_one,log_loss,fit_seconds\n";
    std::map<std::string, std::vector<hls::EvalResult>> by_model;
    for (const std::string& name : names) {
        const std::string csv = (fs::path(data_dir) / (name + ".csv")).string();
        const std::string schema = (fs::path(data_dir) / (name + ".schema")).string();
        const hls::Schema sc = hls::Schema::from_file(schema);
        const hls::Dataset raw = hls::load_csv(csv, sc);
        const hls::FoldPlan plan = hls::make_folds(raw, folds, seed);
        for (const hls::ModelConfig& cfg : configs) {
            const hls::EvalResult res = hls::run_cv(raw, name, cfg, plan, seed);
            by_model[cfg.tag()].push_back(res);
            summary << name << ',' << cfg.tag() << ',' << res.mean_zero_one() << ','
                    << res.mean_log_loss() << ',' << res.fit_seconds << '\n';
            for (int f = 0; f < plan.k; ++f) {
                nlohmann::json rep;
                rep["dataset"] = name;
                rep["model"] = cfg.tag();
                rep["fold"] = f;
                rep["zero_one"] = res.fold_zero_one[f];
                rep["log_loss"] = res.fold_log_loss[f];
                rep["row_log_loss"] = res.row_log_loss[f];
                std::string fname = name + "__" + cfg.tag() + "__fold" + std::to_string(f) +
                                    ".json";
                std::replace(fname.begin(), fname.end(), ':', '-');
                std::ofstream rf(fs::path(out_dir) / "reports" / fname);
                rf << rep.dump() << '\n';
            }
            std::cout << name << " " << cfg.tag() << " 0/1=" << std::setprecision(4)
                      << res.mean_zero_one() << " log=" << res.mean_log_loss() << '\n';
        }
    }

    std::ofstream wdl_csv(fs::path(out_dir) / "wdl.csv");
    wdl_csv << "model_a,model_b,loss,wins,draws,losses\n";
    for (std::size_t a = 0; a < configs.size(); ++a)
        for (std::size_t b = 0; b < configs.size(); ++b) {
            if (a == b) continue;
            const auto& ra = by_model[configs[a].tag()];
            const auto& rb = by_model[configs[b].tag()];
            const hls::WdlRecord w01 = hls::wdl(ra, rb, hls::LossKind::ZeroOne, 1e-12);
            const hls::WdlRecord wll = hls::wdl(ra, rb, hls::LossKind::LogLoss, 1e-12);
            wdl_csv << configs[a].tag() << ',' << configs[b].tag() << ",zero_one,"
                    << w01.wins << ',' << w01.draws << ',' << w01.losses << '\n';
            wdl_csv << configs[a].tag() << ',' << configs[b].tag() << ",log_loss,"
                    << wll.wins << ',' << wll.draws << ',' << wll.losses << '\n';
            std::cout << configs[a].tag() << " vs " << configs[b].tag() << ": 0/1 "
                      << w01.wins << '-' << w01.draws << '-' << w01.losses << ", log "
                      << wll.wins << '-' << wll.draws << '-' << wll.losses << '\n';
        }
    return 0;
}

int cmd_timing(int parents, int cardinality, std::size_t samples, int reps,
               const std::string& variant, std::uint64_t seed) {
    hls::TimingConfig cfg;
    cfg.p_parents = parents;
    cfg.cardinality = cardinality;
    cfg.n_samples = samples;
    cfg.repetitions = reps;
    cfg.seed = seed;
    const double secs = hls::time_fit(cfg, variant);
    std::cout << variant << " cardinality=" << cardinality << " samples=" << samples
              << " parents=" << parents << " min_seconds=" << std::setprecision(6) << secs
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian network classifiers with hierarchically smoothed CPTs"};
    app.require_subcommand(1);

    std::string csv, schema, structure = "tan", smoother = "hls-nb", out, model_path;
    std::string data_dir, out_dir = "bench_out", variant = "hls-fast";
    std::vector<std::string> models;
    std::uint64_t seed = 1;
    int folds = 10, parents = 4, cardinality = 2, reps = 10;
    std::size_t samples = 1000;

    auto* tr = app.add_subcommand("train", "fit a model and write it as JSON");
    tr->add_option("--data", csv, "csv file")->required();
    tr->add_option("--schema", schema, "schema file")->required();
    tr->add_option("--structure", structure, "tan | kdb:K");
    tr->add_option("--smoother", smoother,
                   "mle | add:m | hls-nb[:tau] | hls-cv[:naive] | hls-lasso:tau | "
                   "hls-bayes:{ridge-ig,ridge-hc,hs,hs-ig}");
    tr->add_option("--seed", seed, "rng seed");
    tr->add_option("--out", out, "output model path")->required();

    auto* pr = app.add_subcommand("predict", "score rows with a trained model");
    pr->add_option("--model", model_path, "model JSON path")->required();
    pr->add_option("--data", csv, "csv file")->required();
    pr->add_option("--out", out, "output path (default stdout)");

    auto* be = app.add_subcommand("bench", "cross-validated comparison over a dataset dir");
    be->add_option("--data-dir", data_dir, "directory of <name>.csv + <name>.schema")
        ->required();
    be->add_option("--models", models, "model specs <structure>+<smoother>")->required();
    be->add_option("--folds", folds, "fold count");
    be->add_option("--seed", seed, "rng seed");
    be->add_option("--out-dir", out_dir, "report directory");

    auto* ti = app.add_subcommand("timing", "synthetic-data fit timing");
    ti->add_option("--parents", parents, "parent count");
    ti->add_option("--cardinality", cardinality, "per-column cardinality");
    ti->add_option("--samples", samples, "sample count");
    ti->add_option("--reps", reps, "repetitions (minimum reported)");
    ti->add_option("--variant", variant, "hls-fast | hls-slow");
    ti->add_option("--seed", seed, "rng seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (tr->parsed()) return cmd_train(csv, schema, structure, smoother, seed, out);
        if (pr->parsed()) return cmd_predict(model_path, csv, out);
        if (be->parsed()) return cmd_bench(data_dir, models, folds, seed, out_dir);
        if (ti->parsed()) return cmd_timing(parents, cardinality, samples, reps, variant, seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
