#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hls/common.hpp"
#include "hls/kernels.hpp"

using hls::Rng;
namespace kn = hls::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double scale = 10.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = scale * (rng.uniform() - 0.5);
    return v;
}

}  // namespace

TEST_CASE("vexp matches std::exp across the double range") {
    const kn::Ops* avx2 = kn::avx2_ops();
    if (!avx2) return;  // scalar-only host
    std::vector<double> in;
    for (double x = -745.0; x <= 709.5; x += 0.37) in.push_back(x);
    in.insert(in.end(), {0.0, -0.0, 1.0, -1.0, 709.7, 709.9, -745.2, -746.0, 1000.0,
                         -1000.0, 1e-300, -1e-300});
    std::vector<double> out(in.size());
    avx2->vexp(in.data(), out.data(), in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        const double ref = std::exp(in[i]);
        if (std::isinf(ref)) {
            CHECK(std::isinf(out[i]));
        } else {
            CHECK(std::fabs(out[i] - ref) <= 1e-14 * ref + 1e-300);
        }
    }
    // NaN propagates
    const double nan_in = std::numeric_limits<double>::quiet_NaN();
    double nan_out[4];
    const double nan_vec[4] = {nan_in, 1.0, nan_in, -2.0};
    avx2->vexp(nan_vec, nan_out, 4);
    CHECK(std::isnan(nan_out[0]));
    CHECK(std::isnan(nan_out[2]));
    CHECK(nan_out[1] == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("scalar and avx2 variants agree") {
    const kn::Ops* avx2 = kn::avx2_ops();
    if (!avx2) return;
    const kn::Ops& sc = kn::scalar_ops();
    Rng rng(42);
    for (const std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{3},
                                std::size_t{4}, std::size_t{7}, std::size_t{64},
                                std::size_t{1001}}) {
        const auto x = random_vec(n, rng);
        const auto y = random_vec(n, rng);

        CHECK(sc.dot(x.data(), y.data(), n) ==
              doctest::Approx(avx2->dot(x.data(), y.data(), n)).epsilon(1e-12));
        CHECK(sc.sum(x.data(), n) == doctest::Approx(avx2->sum(x.data(), n)).epsilon(1e-12));
        CHECK(sc.max_abs(x.data(), n) == avx2->max_abs(x.data(), n));

        auto ya = y, yb = y;
        sc.axpy(0.37, x.data(), ya.data(), n);
        avx2->axpy(0.37, x.data(), yb.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(ya[i] == doctest::Approx(yb[i]));

        auto ea = x, eb = x;
        sc.vexp(x.data(), ea.data(), n);
        avx2->vexp(x.data(), eb.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::fabs(ea[i] - eb[i]) <= 1e-13 * std::fabs(ea[i]) + 1e-300);
    }
    for (const std::size_t cols : {std::size_t{1}, std::size_t{2}, std::size_t{3},
                                   std::size_t{5}, std::size_t{8}, std::size_t{13}}) {
        const std::size_t rows = 37;
        const auto m = random_vec(rows * cols, rng, 30.0);
        auto ma = m, mb = m;
        sc.softmax_rows(ma.data(), rows, cols);
        avx2->softmax_rows(mb.data(), rows, cols);
        for (std::size_t i = 0; i < m.size(); ++i)
            CHECK(ma[i] == doctest::Approx(mb[i]).epsilon(1e-12));

        std::vector<double> la(rows), lb(rows);
        sc.logsumexp_rows(m.data(), rows, cols, la.data());
        avx2->logsumexp_rows(m.data(), rows, cols, lb.data());
        for (std::size_t i = 0; i < rows; ++i)
            CHECK(la[i] == doctest::Approx(lb[i]).epsilon(1e-13));
    }
}

TEST_CASE("softmax rows sum to one and survive extreme inputs") {
    Rng rng(7);
    for (const std::string variant : {"scalar", "avx2"}) {
        const kn::Ops* ops = variant == "scalar" ? &kn::scalar_ops() : kn::avx2_ops();
        if (!ops) continue;
        const std::size_t rows = 50, cols = 4;
        auto m = random_vec(rows * cols, rng, 400.0);  // would overflow a naive exp
        m[0] = 1e4;
        m[1] = -1e4;
        ops->softmax_rows(m.data(), rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
                CHECK(m[r * cols + c] >= 0.0);
                s += m[r * cols + c];
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("logsumexp agrees with direct evaluation on small values") {
    const double m[6] = {0.1, 0.4, -0.2, 1.0, 2.0, 3.0};
    double out[2];
    kn::scalar_ops().logsumexp_rows(m, 2, 3, out);
    CHECK(out[0] ==
          doctest::Approx(std::log(std::exp(0.1) + std::exp(0.4) + std::exp(-0.2))));
    CHECK(out[1] ==
          doctest::Approx(std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0))));
}

TEST_CASE("dispatcher honors force()") {
    CHECK_NOTHROW(kn::force("scalar"));
    CHECK(std::string(kn::active().name) == "scalar");
    if (kn::avx2_ops()) {
        kn::force("avx2");
        CHECK(std::string(kn::active().name) == "avx2");
    }
    CHECK_THROWS_AS(kn::force("nope"), hls::ConfigError);
    if (kn::avx2_ops())
        kn::force("avx2");
    else
        kn::force("scalar");
}
