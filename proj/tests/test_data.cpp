#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "hls/common.hpp"
#include "hls/data.hpp"
#include "hls/mdlp.hpp"

using namespace hls;
namespace fs = std::filesystem;

namespace {

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& name, const std::string& content) {
        path = fs::temp_directory_path() / name;
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

// Entropy in bits of a label multiset.
double ent(const std::vector<int>& labels) {
    std::vector<int> counts(*std::max_element(labels.begin(), labels.end()) + 1, 0);
    for (const int l : labels) ++counts[l];
    double h = 0.0;
    for (const int c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / labels.size();
        h -= p * std::log2(p);
    }
    return h;
}

}  // namespace

TEST_CASE("load_csv encodes labels in first-appearance order") {
    const TempFile schema_f("t1.schema", "class = class\n");
    const TempFile csv_f("t1.csv", "color,class\nred,0\nblue,1\nred,0\n");
    const Dataset d = load_csv(csv_f.path.string(), Schema::from_file(schema_f.path.string()));
    CHECK(d.n_rows == 3);
    CHECK(d.cardinalities == std::vector<int>{2, 2});
    CHECK(d.class_index == 1);
    CHECK(d.columns[0] == std::vector<int>{0, 1, 0});
    CHECK(d.labels[0] == std::vector<std::string>{"red", "blue"});
}

TEST_CASE("load_csv reports row arity errors with the row number") {
    const TempFile schema_f("t2.schema", "class = y\n");
    const TempFile csv_f("t2.csv", "x,y\na,0\nb\n");
    try {
        load_csv(csv_f.path.string(), Schema::from_file(schema_f.path.string()));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("3") != std::string::npos);
    }
}

TEST_CASE("load_csv keeps numeric columns raw until discretization") {
    const TempFile schema_f("t3.schema", "class = y\nx = numeric\n");
    const TempFile csv_f("t3.csv", "x,y\n3.5,a\n1.0,b\n2.2,a\n");
    const Dataset d = load_csv(csv_f.path.string(), Schema::from_file(schema_f.path.string()));
    CHECK(d.is_numeric(0));
    CHECK(d.cardinalities[0] == 0);  // unset until discretization
    CHECK(d.raw[0] == std::vector<double>{3.5, 1.0, 2.2});
}

TEST_CASE("load_csv rejects unknown schema columns") {
    const TempFile schema_f("t4.schema", "class = y\nnosuch = numeric\n");
    const TempFile csv_f("t4.csv", "x,y\na,0\n");
    CHECK_THROWS_AS(load_csv(csv_f.path.string(), Schema::from_file(schema_f.path.string())),
                    ConfigError);
}

TEST_CASE("fit_mdlp splits a clean two-class column once") {
    const std::vector<double> values{1, 2, 3, 4};
    const std::vector<int> labels{0, 0, 1, 1};
    const auto cuts = fit_mdlp(values, labels, 2);
    // Exhaustive check of the 3 candidate boundaries: only (2,3) passes the
    // MDL rule; gain at 2.5 is 1 bit vs threshold (log2(3) + log2(7) - 2)/4.
    REQUIRE(cuts.size() == 1);
    CHECK(cuts[0] > 2.0);
    CHECK(cuts[0] < 3.0);
}

TEST_CASE("fit_mdlp emits nothing for pure or constant columns") {
    CHECK(fit_mdlp(std::vector<double>{1, 2, 3}, std::vector<int>{1, 1, 1}, 2).empty());
    CHECK(fit_mdlp(std::vector<double>{5, 5, 5, 5}, std::vector<int>{0, 1, 0, 1}, 2).empty());
}

TEST_CASE("mdlp cuts land only on class-boundary positions (brute force, len <= 8)") {
    // Enumerate every label assignment over small sorted value arrays and
    // check the Fayyad-Irani boundary property for the emitted cuts.
    Rng rng(11);
    int checked = 0;
    for (int n = 2; n <= 8; ++n) {
        std::vector<double> values(n);
        for (int i = 0; i < n; ++i) values[i] = i + 1;
        const int total = 1 << n;
        for (int mask = 0; mask < total; ++mask) {
            std::vector<int> labels(n);
            for (int i = 0; i < n; ++i) labels[i] = (mask >> i) & 1;
            const auto cuts = fit_mdlp(values, labels, 2);
            for (const double cut : cuts) {
                // the two values straddling the cut must carry distinct labels
                int lo = -1, hi = -1;
                for (int i = 0; i < n; ++i) {
                    if (values[i] < cut) lo = i;
                    if (values[i] > cut && hi < 0) hi = i;
                }
                REQUIRE(lo >= 0);
                REQUIRE(hi >= 0);
                CHECK(labels[lo] != labels[hi]);
            }
            ++checked;
        }
    }
    CHECK(checked > 400);
}

TEST_CASE("discretization bins by upper-bin convention and is monotone") {
    const std::vector<double> one_cut{2.5};
    CHECK(DiscretizationModel::bin_of(2.5, one_cut) == 1);
    CHECK(DiscretizationModel::bin_of(2.4999, one_cut) == 0);
    CHECK(DiscretizationModel::bin_of(99.0, {}) == 0);
    const std::vector<double> two_cuts{1.0, 3.0};
    CHECK(DiscretizationModel::bin_of(2.0, two_cuts) == 1);

    Rng rng(3);
    std::vector<double> cuts{-1.0, 0.5, 2.0, 7.5};
    double prev_v = -100.0;
    for (int i = 0; i < 1000; ++i) {
        const double v = prev_v + rng.uniform() * 0.3;
        CHECK(DiscretizationModel::bin_of(prev_v, cuts) <=
              DiscretizationModel::bin_of(v, cuts));
        prev_v = v;
    }
}

TEST_CASE("apply_discretization turns numeric columns categorical") {
    const TempFile schema_f("t5.schema", "class = y\nx = numeric\n");
    const TempFile csv_f("t5.csv", "x,y\n1,a\n2,a\n3,b\n4,b\n");
    const Dataset d = load_csv(csv_f.path.string(), Schema::from_file(schema_f.path.string()));
    std::vector<std::size_t> rows{0, 1, 2, 3};
    const DiscretizationModel m = fit_discretization(d, rows);
    const Dataset out = apply_discretization(m, d);
    CHECK_FALSE(out.is_numeric(0));
    CHECK(out.cardinalities[0] == 2);
    CHECK(out.columns[0] == std::vector<int>{0, 0, 1, 1});
    out.check_invariants();
}

TEST_CASE("make_folds partitions rows with balanced sizes") {
    const TempFile schema_f("t6.schema", "class = y\n");
    std::string csv = "x,y\n";
    for (int i = 0; i < 10; ++i) csv += "v" + std::to_string(i % 3) + "," +
                                        std::to_string(i % 2) + "\n";
    const TempFile csv_f("t6.csv", csv);
    const Dataset d = load_csv(csv_f.path.string(), Schema::from_file(schema_f.path.string()));

    const FoldPlan p10 = make_folds(d, 10, 5);
    std::vector<int> sizes10(10, 0);
    for (const int f : p10.assignment) ++sizes10[f];
    for (const int s : sizes10) CHECK(s == 1);

    const FoldPlan p3 = make_folds(d, 3, 5);
    std::vector<int> sizes3(3, 0);
    for (const int f : p3.assignment) {
        REQUIRE(f >= 0);
        REQUIRE(f < 3);
        ++sizes3[f];
    }
    std::sort(sizes3.begin(), sizes3.end());
    CHECK(sizes3 == std::vector<int>{3, 3, 4});

    const FoldPlan again = make_folds(d, 3, 5);
    CHECK(again.assignment == p3.assignment);
    CHECK_THROWS_AS(make_folds(d, 11, 5), ConfigError);
}

TEST_CASE("fold assignment is stratified when class counts permit") {
    const TempFile schema_f("t7.schema", "class = y\n");
    std::string csv = "x,y\n";
    for (int i = 0; i < 40; ++i) csv += "a," + std::to_string(i % 2) + "\n";
    const TempFile csv_f("t7.csv", csv);
    const Dataset d = load_csv(csv_f.path.string(), Schema::from_file(schema_f.path.string()));
    const FoldPlan plan = make_folds(d, 4, 9);
    // 20 rows per class, 4 folds -> every fold holds 5 of each class
    for (int f = 0; f < 4; ++f) {
        int c0 = 0, c1 = 0;
        for (std::size_t r = 0; r < d.n_rows; ++r)
            if (plan.assignment[r] == f) (d.columns[1][r] == 0 ? c0 : c1)++;
        CHECK(c0 == 5);
        CHECK(c1 == 5);
    }
}

TEST_CASE("gen_synthetic produces the requested table shape deterministically") {
    const Dataset a = gen_synthetic(4, 2, 1000, 123);
    CHECK(a.n_cols() == 5);
    CHECK(a.n_rows == 1000);
    for (const int c : a.cardinalities) CHECK(c == 2);
    a.check_invariants();

    const Dataset b = gen_synthetic(4, 2, 1000, 123);
    for (std::size_t j = 0; j < a.n_cols(); ++j) CHECK(a.columns[j] == b.columns[j]);

    const Dataset c5 = gen_synthetic(4, 5, 2000, 9);
    CHECK(c5.n_cols() == 5);
    for (const int c : c5.cardinalities) CHECK(c == 5);
}

TEST_CASE("gen_synthetic marginals are equal-frequency within 2/sqrt(n)") {
    for (const int card : {2, 5}) {
        const std::size_t n = 4000;
        const Dataset d = gen_synthetic(3, card, n, 77);
        for (std::size_t j = 0; j < d.n_cols(); ++j) {
            std::vector<int> counts(card, 0);
            for (const int v : d.columns[j]) ++counts[v];
            for (const int c : counts) {
                const double freq = static_cast<double>(c) / static_cast<double>(n);
                CHECK(std::fabs(freq - 1.0 / card) <= 2.0 / std::sqrt(double(n)));
            }
        }
    }
}

TEST_CASE("dataset subset preserves metadata") {
    const Dataset d = gen_synthetic(2, 3, 50, 1);
    const std::vector<std::size_t> rows{0, 5, 10, 49};
    const Dataset s = d.subset(rows);
    CHECK(s.n_rows == 4);
    CHECK(s.cardinalities == d.cardinalities);
    CHECK(s.columns[0][3] == d.columns[0][49]);
}
