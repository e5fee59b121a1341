#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sfi/errors.hpp"
#include "sfi/filters.hpp"
#include "sfi/hashing.hpp"
#include "sfi/sampling.hpp"
#include "sfi/signal.hpp"

using namespace sfi;
using boost::math::quadrature::gauss_kronrod;

namespace {

double integrate_density(const TimeDistribution& d, double lo, double hi) {
    auto fn = [&d](double t) { return d.density(t); };
    // split at the kinks so each piece is smooth
    std::vector<double> cuts{lo, hi};
    for (double s : {-1.0, 1.0}) {
        const double kink = d.center + s * d.T * (1.0 - 1.0 / d.k);
        if (kink > lo && kink < hi) {
            cuts.push_back(kink);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        acc += gauss_kronrod<double, 61>::integrate(fn, cuts[i], cuts[i + 1], 15, 1e-13);
    }
    return acc;
}

double ks_against(const TimeDistribution& d, std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double F = d.cdf(v[i]);
        ks = std::max({ks, std::abs((i + 1) / n - F), std::abs(F - i / n)});
    }
    return ks;
}

} // namespace

TEST_CASE("normalization constant in closed form") {
    const auto d = build_dist(std::exp(2.0), 1.0);
    CHECK(d.c == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(d.density(0.0) == doctest::Approx(d.c));
    const double k = d.k;
    CHECK(d.density(1.0 - 1.0 / (2.0 * k)) == doctest::Approx(d.c * k));
    CHECK(d.density(-(1.0 - 1.0 / (2.0 * k))) == doctest::Approx(d.c * k));
    CHECK(d.density(1.01) == 0.0);
}

TEST_CASE("densities integrate to one") {
    for (double k : {2.0, 4.0, 7.5, 64.0}) {
        for (double T : {0.5, 1.0, 3.0}) {
            const auto d = build_dist(k, T);
            CHECK(std::abs(integrate_density(d, -T, T) - 1.0) < 1e-9);
            const double inner = T * (1.0 - 1.0 / k);
            const auto r = build_dist(k, T, Interval{-inner - 0.3 * (T - inner), inner + 0.7 * (T - inner)});
            CHECK(r.kind == DistKind::restricted);
            CHECK(std::abs(integrate_density(r, r.lo(), r.hi()) - 1.0) < 1e-9);
            CHECK(r.density(r.hi() + 1e-9) == 0.0);
            const auto w = build_window_dist(k, 2.0 * T);
            CHECK(std::abs(integrate_density(w, 0.0, 2.0 * T) - 1.0) < 1e-9);
            CHECK(w.density(T) == doctest::Approx(w.c / T));
        }
    }
}

TEST_CASE("cdf and inverse cdf") {
    const auto d = build_window_dist(4.0, 2.0, Interval{0.2, 1.9});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ut(0.2, 1.9);
    for (int i = 0; i < 50; ++i) {
        const double t = ut(rng);
        CHECK(d.cdf(t) == doctest::Approx(integrate_density(d, 0.2, t)).epsilon(1e-9));
        CHECK(d.inv_cdf(d.cdf(t)) == doctest::Approx(t).epsilon(1e-9));
    }
    CHECK(d.cdf(0.0) == 0.0);
    CHECK(d.cdf(2.0) == doctest::Approx(1.0));
}

TEST_CASE("U must nest the bulk") {
    CHECK_THROWS_AS(build_dist(4.0, 1.0, Interval{-0.5, 1.0}), InvalidInput);
    CHECK_THROWS_AS(build_dist(4.0, 1.0, Interval{-1.2, 1.0}), InvalidInput);
    CHECK_THROWS_AS(build_dist(1.5, 1.0), InvalidInput);
    CHECK_NOTHROW(build_dist(4.0, 1.0, Interval{-0.75, 0.75}));
}

TEST_CASE("draws follow the analytic cdf") {
    for (double k : {2.0, 16.0}) {
        const auto d = build_window_dist(k, 1.0);
        std::mt19937_64 rng(static_cast<std::uint64_t>(k));
        const auto set = draw_weighted(d, 100000, rng);
        CHECK(ks_against(d, set.times) < 0.01);
    }
}

TEST_CASE("single draw weight") {
    const auto d = build_window_dist(4.0, 2.0);
    std::mt19937_64 rng(1);
    const auto set = draw_weighted(d, 1, rng);
    REQUIRE(set.times.size() == 1);
    REQUIRE(set.weights.size() == 1);
    CHECK(set.times[0] >= 0.0);
    CHECK(set.times[0] <= 2.0);
    CHECK(set.weights[0] == doctest::Approx(1.0 / (2.0 * d.density(set.times[0]))));
    CHECK_THROWS_AS(draw_weighted(d, 0, rng), InvalidInput);
}

TEST_CASE("constant function norm from the weights") {
    // s >= 10 k log k; the weight variance sets how large s must be for 5%
    for (int k : {2, 4}) {
        const auto d = build_window_dist(k, 1.0);
        const int s = 1000;
        REQUIRE(s >= 10.0 * k * std::log(k));
        std::mt19937_64 rng(40 + k);
        int ok = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto set = draw_weighted(d, s, rng);
            double sum = 0.0;
            for (double w : set.weights) {
                sum += w;
            }
            ok += std::abs(sum - 1.0) <= 0.05 ? 1 : 0;
        }
        CHECK(ok >= 95);
    }
}

TEST_CASE("weighted_norm_sq basics") {
    std::vector<cplx> zeros(5, cplx(0.0, 0.0));
    std::vector<double> w(5, 0.3);
    CHECK(weighted_norm_sq(zeros, w) == 0.0);
    std::vector<cplx> one{cplx(3.0, 4.0)};
    std::vector<double> w1{0.5};
    CHECK(weighted_norm_sq(one, w1) == doctest::Approx(12.5));
    CHECK_THROWS_AS(weighted_norm_sq(one, w), InvalidInput);
}

TEST_CASE("single-sample estimates are unbiased") {
    const auto d = build_window_dist(4.0, 1.0);
    std::vector<std::function<cplx(double)>> fns{
        [](double) { return cplx(1.0, 0.0); },
        [](double t) { return cplx(t * t, 0.0); },
        [](double t) { return std::exp(cplx(0.0, kTwoPi * 3.3 * t)) + 0.5 * std::exp(cplx(0.0, kTwoPi * 7.1 * t)); },
    };
    std::mt19937_64 rng(77);
    for (const auto& f : fns) {
        const double truth = t_norm_sq(sample_on_grid(f, 1.0, 100001), 1.0);
        double acc = 0.0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            const auto set = draw_weighted(d, 1, rng);
            const cplx v = f(set.times[0]);
            acc += set.weights[0] * std::norm(v);
        }
        CHECK(std::abs(acc / n / truth - 1.0) < 0.02);
    }
}

TEST_CASE("weighted norm concentrates for sparse signals") {
    const int k = 2;
    const int s = static_cast<int>(std::ceil(50.0 * k * std::log2(k)));
    const auto d = build_window_dist(k, 1.0);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> uf(-1000.0, 1000.0);
    std::normal_distribution<double> nd;
    int ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        SparseSignal x;
        for (int i = 0; i < k; ++i) {
            x.tones.push_back({uf(rng), cplx(nd(rng), nd(rng))});
        }
        const double truth = exact_norm_sq(x, 1.0);
        const auto set = draw_weighted(d, s, rng);
        std::vector<cplx> v;
        for (double t : set.times) {
            v.push_back(eval_sparse(x, t));
        }
        const double est = weighted_norm_sq(v, set.weights);
        ok += (est >= 0.8 * truth && est <= 1.2 * truth) ? 1 : 0;
    }
    CHECK(ok >= 90);
}

TEST_CASE("weighted norm concentrates for a filtered heavy bin") {
    const int k = 2;
    const auto h = build_filter_h(k, 0.1, 1.0);
    const auto g = build_filter_g(k, 0.01, 16);
    const auto d = build_window_dist(k, 1.0);
    const int s = static_cast<int>(std::ceil(50.0 * k * std::log2(k)));
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> uf(-1000.0, 1000.0);
    int ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const SparseSignal x{{{uf(rng), {1.0, 0.0}}, {uf(rng), {0.0, 0.7}}}, 1000.0};
        const auto p = draw_hash_params(400.0, 16, 1000.0, rng);
        const int j = hash_bin(p, x.tones[0].freq);
        auto xf = [&x](double t) { return eval_sparse(x, t); };
        auto z = [&](double t) { return hash_to_bins_fn(xf, h, g, p, t / p.sigma).values[j]; };
        const double truth = t_norm_sq(sample_on_grid(z, 1.0, 4001), 1.0);
        const auto set = draw_weighted(d, s, rng);
        std::vector<cplx> v;
        for (double t : set.times) {
            v.push_back(z(t));
        }
        const double est = weighted_norm_sq(v, set.weights);
        ok += (est >= 0.8 * truth && est <= 1.2 * truth) ? 1 : 0;
    }
    CHECK(ok >= 90);
}
