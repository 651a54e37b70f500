#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/rational.hpp>
#include <vector>

#include "hls/additive.hpp"
#include "hls/common.hpp"

using namespace hls;

namespace {

Dataset cards_only(std::vector<int> cards) {
    Dataset d;
    d.n_rows = 1;
    d.class_index = static_cast<int>(cards.size()) - 1;
    for (std::size_t j = 0; j < cards.size(); ++j) {
        d.names.push_back("c" + std::to_string(j));
        d.cardinalities.push_back(cards[j]);
        d.columns.push_back({0});
        d.raw.emplace_back();
        d.labels.emplace_back(cards[j], "v");
    }
    return d;
}

using Rat = boost::rational<long long>;

}  // namespace

TEST_CASE("additive formula on a populated leaf") {
    const Dataset d = cards_only({2, 2});
    const CptTree tree = build_tree_ordered(d, 1, std::vector<int>{0});
    Eigen::MatrixXd counts(2, 2);
    counts << 3, 7, 1, 1;
    const Cpt theta = additive_cpt(counts, tree, 1.0);
    CHECK(theta(0, 0) == doctest::Approx(4.0 / 12.0));
    CHECK(theta(0, 1) == doctest::Approx(8.0 / 12.0));
}

TEST_CASE("m = 0 reproduces maximum likelihood") {
    const Dataset d = cards_only({2, 2});
    const CptTree tree = build_tree_ordered(d, 1, std::vector<int>{0});
    Eigen::MatrixXd counts(2, 2);
    counts << 3, 7, 2, 2;
    const Cpt theta = additive_cpt(counts, tree, 0.0);
    CHECK(theta(0, 0) == doctest::Approx(0.3));
    CHECK(theta(0, 1) == doctest::Approx(0.7));
}

TEST_CASE("zero-sample leaf backs off to the nearest sampled ancestor") {
    const Dataset d = cards_only({2, 2, 2});
    const CptTree tree = build_tree_ordered(d, 2, std::vector<int>{0, 1});
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(4, 2);
    counts(0, 0) = 1;  // leaf (0,0): [1, 0]
    counts(2, 1) = 2;  // leaf (1,0): [0, 2]
    const Cpt theta = additive_cpt(counts, tree, 1.0);
    // leaf (0,1) is empty; its depth-1 ancestor (x0=0) has counts [1,0]
    CHECK(theta(1, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(theta(1, 1) == doctest::Approx(1.0 / 3.0));
    // leaf (1,1) is empty; ancestor (x0=1) has counts [0,2]
    CHECK(theta(3, 0) == doctest::Approx(1.0 / 4.0));
    CHECK(theta(3, 1) == doctest::Approx(3.0 / 4.0));
    // back-off only fires on empty leaves: leaf (1,0) keeps its own counts,
    // not the root aggregate [1,2]
    CHECK(theta(2, 0) == doctest::Approx(1.0 / 4.0));
    CHECK(theta(0, 0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("fully empty subtree falls back to the class-marginal root") {
    const Dataset d = cards_only({2, 2, 2});
    const CptTree tree = build_tree_ordered(d, 2, std::vector<int>{0, 1});
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(4, 2);
    counts(0, 0) = 1;
    counts(0, 1) = 2;  // everything lives in leaf (0,0)
    const Cpt theta = additive_cpt(counts, tree, 1.0);
    // leaves under x0=1: ancestor empty, root holds [1,2]
    CHECK(theta(2, 0) == doctest::Approx(2.0 / 5.0));
    CHECK(theta(3, 1) == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("uniform fallback when the entire column is empty") {
    const Dataset d = cards_only({2, 3, 3});
    const CptTree tree = build_tree_ordered(d, 2, std::vector<int>{0, 1});
    const Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(6, 3);
    for (const double m : {0.0, 1.0}) {
        const Cpt theta = additive_cpt(counts, tree, m);
        for (Eigen::Index i = 0; i < theta.rows(); ++i)
            for (Eigen::Index k = 0; k < 3; ++k)
                CHECK(theta(i, k) == doctest::Approx(1.0 / 3.0));
    }
}

TEST_CASE("rows sum to one exactly (rational cross-check on small cases)") {
    Rng rng(31);
    const Dataset d = cards_only({2, 2, 2});
    const CptTree tree = build_tree_ordered(d, 2, std::vector<int>{0, 1});
    for (int rep = 0; rep < 50; ++rep) {
        Eigen::MatrixXd counts(4, 2);
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 2; ++k)
                counts(i, k) = static_cast<int>(rng.uniform() * 4.0);
        for (const long long m_num : {0LL, 1LL, 2LL}) {
            const Cpt theta = additive_cpt(counts, tree, static_cast<double>(m_num));
            for (int i = 0; i < 4; ++i) {
                // independent rational evaluation with the same back-off walk
                long long n0 = static_cast<long long>(counts(i, 0));
                long long n1 = static_cast<long long>(counts(i, 1));
                if (n0 + n1 == 0) {
                    const int anc = i / 2;
                    n0 = static_cast<long long>(counts(2 * anc, 0) + counts(2 * anc + 1, 0));
                    n1 = static_cast<long long>(counts(2 * anc, 1) + counts(2 * anc + 1, 1));
                }
                if (n0 + n1 == 0) {
                    n0 = static_cast<long long>(counts.col(0).sum());
                    n1 = static_cast<long long>(counts.col(1).sum());
                }
                if (n0 + n1 + m_num == 0) continue;  // uniform fallback case
                const Rat t0(n0 + m_num, n0 + n1 + 2 * m_num);
                const Rat t1(n1 + m_num, n0 + n1 + 2 * m_num);
                CHECK(t0 + t1 == Rat(1));
                CHECK(theta(i, 0) ==
                      doctest::Approx(boost::rational_cast<double>(t0)).epsilon(1e-15));
                CHECK(theta(i, 1) ==
                      doctest::Approx(boost::rational_cast<double>(t1)).epsilon(1e-15));
                CHECK(theta(i, 0) + theta(i, 1) == doctest::Approx(1.0).epsilon(1e-15));
            }
        }
    }
}

TEST_CASE("theta interpolates monotonically from MLE to uniform as m grows") {
    const Dataset d = cards_only({2, 2});
    const CptTree tree = build_tree_ordered(d, 1, std::vector<int>{0});
    Eigen::MatrixXd counts(2, 2);
    counts << 9, 1, 4, 6;
    double prev = 1.0;
    for (const double m : {0.0, 0.5, 1.0, 2.0, 10.0, 1000.0}) {
        const Cpt theta = additive_cpt(counts, tree, m);
        CHECK(theta(0, 0) <= prev + 1e-15);  // cell above 1/2 decays toward 1/2
        CHECK(theta(0, 0) >= 0.5);
        prev = theta(0, 0);
    }
    const Cpt huge = additive_cpt(counts, tree, 1e9);
    CHECK(huge(0, 0) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("m = 1/2 and m = 1 give the Jeffreys and uniform-prior estimates") {
    const Dataset d = cards_only({2, 3});
    const CptTree tree = build_tree_ordered(d, 1, std::vector<int>{0});
    Eigen::MatrixXd counts(2, 3);
    counts << 2, 0, 3, 1, 1, 1;
    const Cpt jeffreys = additive_cpt(counts, tree, 0.5);
    CHECK(jeffreys(0, 1) == doctest::Approx((0 + 0.5) / (5 + 3 * 0.5)));
    const Cpt uniform_prior = additive_cpt(counts, tree, 1.0);
    CHECK(uniform_prior(0, 1) == doctest::Approx((0 + 1.0) / (5 + 3 * 1.0)));
}

TEST_CASE("negative m is rejected") {
    const Dataset d = cards_only({2, 2});
    const CptTree tree = build_tree_ordered(d, 1, std::vector<int>{0});
    const Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS(additive_cpt(counts, tree, -0.1), ConfigError);
}
