#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sfi/errors.hpp"
#include "sfi/signal.hpp"
#include "sfi/signal_estimation.hpp"

using namespace sfi;

namespace {

// sum_j sum_n c_jn tau^n e^{2 pi i f_j t} with std::pow and no phase reduction
cplx naive_mixed(const MixedPolySignal& s, double t) {
    const double tau = 2.0 * t / s.T - 1.0;
    cplx acc{0.0, 0.0};
    for (std::size_t j = 0; j < s.freqs.size(); ++j) {
        for (std::size_t n = 0; n < s.coeffs[j].size(); ++n) {
            acc += s.coeffs[j][n] * std::pow(tau, static_cast<double>(n)) *
                   std::exp(cplx(0.0, kTwoPi * s.freqs[j] * t));
        }
    }
    return acc;
}

double grid_error(const std::function<cplx(double)>& a, const std::function<cplx(double)>& b, double T) {
    const auto v = sample_on_grid([&](double t) { return a(t) - b(t); }, T, 20001);
    return std::sqrt(t_norm_sq(v, T));
}

} // namespace

TEST_CASE("weighted sketch") {
    std::mt19937_64 rng(1);
    const auto one = weighted_sketch(1, 4, 1.0, rng);
    REQUIRE(one.times.size() == 1);
    CHECK(one.dprime[0] == doctest::Approx(1.0));
    CHECK(one.weights[0] > 0.0);

    const auto many = weighted_sketch(500, 8, 2.0, rng);
    double s = 0.0;
    for (std::size_t i = 0; i < many.times.size(); ++i) {
        CHECK(many.weights[i] > 0.0);
        CHECK(many.times[i] >= 0.0);
        CHECK(many.times[i] <= 2.0);
        s += many.dprime[i];
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
    CHECK_THROWS_AS(weighted_sketch(0, 2, 1.0, rng), InvalidInput);
}

TEST_CASE("sketch weights estimate the constant norm") {
    for (int k : {2, 8}) {
        const int m = static_cast<int>(std::ceil(10.0 * k * std::log2(k)));
        std::mt19937_64 rng(10 + k);
        int ok = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto plan = weighted_sketch(m, k, 1.0, rng);
            double sum = 0.0;
            for (double w : plan.weights) {
                sum += w;
            }
            ok += std::abs(sum - 1.0) <= 0.1 ? 1 : 0;
        }
        CHECK(ok >= 90);
    }
}

TEST_CASE("helpers") {
    CHECK(dedup_frequencies({1.0, 1.005, 2.0, 1.02}, 0.01) == std::vector<double>{1.0, 2.0, 1.02});
    CHECK(default_degree(1.0, 1.0, 2) == 9);
    CHECK(default_degree(100.0, 1.0, 2) == 64);
    CHECK(signal_estimation_samples(3, 2.0) == 12);
    const auto M = chebyshev_monomials(4);
    CHECK(M[3] == std::vector<double>{0.0, -3.0, 0.0, 4.0, 0.0});
    CHECK(M[4] == std::vector<double>{1.0, 0.0, -8.0, 0.0, 8.0});
}

TEST_CASE("mixed polynomial evaluation") {
    MixedPolySignal z{{3.0, -7.0}, 2, 1.0, {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}};
    for (double t : {0.0, 0.3, 1.0}) {
        CHECK(mixed_poly_eval(z, t) == cplx(0.0, 0.0));
    }
    MixedPolySignal one{{12.5}, 0, 2.0, {{cplx(1.0, 0.0)}}};
    for (double t : {0.0, 0.17, 1.9}) {
        CHECK(std::abs(mixed_poly_eval(one, t) - std::exp(cplx(0.0, kTwoPi * 12.5 * t))) < 1e-12);
    }
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        MixedPolySignal s;
        s.T = 1.5;
        s.d = 6;
        for (int j = 0; j < 3; ++j) {
            s.freqs.push_back(300.0 * u(rng));
            std::vector<cplx> c;
            for (int n = 0; n <= s.d; ++n) {
                c.emplace_back(u(rng), u(rng));
            }
            s.coeffs.push_back(c);
        }
        std::vector<double> ts;
        for (int i = 0; i < 10; ++i) {
            ts.push_back(0.75 * (u(rng) + 1.0));
        }
        const auto v = mixed_poly_eval(s, ts);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            CHECK(std::abs(v[i] - naive_mixed(s, ts[i])) < 1e-9);
        }
    }
}

TEST_CASE("exact model class is interpolated") {
    std::mt19937_64 rng(3);
    const SparseSignal x{{{41.3, {0.6, -0.2}}}, 100.0};
    auto o = make_oracle(x, NoiseSpec{}, 1.0, 0);
    const auto s = signal_estimation(o, {41.3}, 0, 1.0, rng);
    REQUIRE(s.coeffs.size() == 1);
    CHECK(std::abs(s.coeffs[0][0] - cplx(0.6, -0.2)) < 1e-6);
    CHECK(grid_error([&](double t) { return mixed_poly_eval(s, t); }, [&](double t) { return eval_sparse(x, t); },
                     1.0) < 1e-9);
}

TEST_CASE("polynomial absorbs a small frequency offset") {
    std::mt19937_64 rng(4);
    const SparseSignal x{{{20.5, {1.0, 0.0}}}, 100.0};
    auto o = make_oracle(x, NoiseSpec{}, 1.0, 0);
    const auto s = signal_estimation(o, {20.0}, 8, 1.0, rng);
    const double err =
        grid_error([&](double t) { return mixed_poly_eval(s, t); }, [&](double t) { return eval_sparse(x, t); }, 1.0);
    CHECK(err <= 0.05 * std::sqrt(exact_norm_sq(x, 1.0)));
}

TEST_CASE("regression is first-order optimal") {
    const SparseSignal x{{{100.0, {1.0, 0.0}}, {-250.3, {0.0, 0.8}}}, 1000.0};
    auto o = make_oracle(x, NoiseSpec{NoiseKind::hashed_gaussian, 0.3, 0}, 1.0, 9);
    const std::vector<double> freqs{100.2, -250.0};
    const int d = 3;
    std::mt19937_64 rng(5);
    std::mt19937_64 replay = rng;
    const auto s = signal_estimation(o, freqs, d, 1.0, rng);
    // same draw the estimator used
    const int p = 2 * (d + 1);
    const auto plan = weighted_sketch(std::max(p, signal_estimation_samples(p, 2.0)), p, 1.0, replay);
    std::vector<cplx> b;
    for (double t : plan.times) {
        b.push_back(o(t));
    }
    auto resid = [&](const MixedPolySignal& m) {
        double r = 0.0;
        for (std::size_t i = 0; i < plan.times.size(); ++i) {
            r += plan.weights[i] * std::norm(mixed_poly_eval(m, plan.times[i]) - b[i]);
        }
        return r;
    };
    const double r0 = resid(s);
    CHECK(r0 > 0.0);
    std::normal_distribution<double> nd;
    for (int dir = 0; dir < 20; ++dir) {
        auto m = s;
        double norm = 0.0;
        std::vector<cplx> step;
        for (int i = 0; i < p; ++i) {
            step.emplace_back(nd(rng), nd(rng));
            norm += std::norm(step.back());
        }
        norm = std::sqrt(norm);
        for (int j = 0; j < 2; ++j) {
            for (int n = 0; n <= d; ++n) {
                m.coeffs[j][n] += 1e-4 * step[j * (d + 1) + n] / norm;
            }
        }
        CHECK(resid(m) >= r0 * (1.0 - 1e-12));
    }
}

TEST_CASE("set query with known frequencies under noise") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> uf(-1000.0, 1000.0);
    std::normal_distribution<double> nd;
    int ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        SparseSignal x;
        x.F = 1000.0;
        for (int i = 0; i < 2; ++i) {
            x.tones.push_back({uf(rng), cplx(nd(rng), nd(rng))});
        }
        const auto g = make_noise_model(x, NoiseSpec{NoiseKind::hashed_gaussian, 0.1, 0}, 1.0, 100 + trial);
        auto o = make_oracle(x, NoiseSpec{NoiseKind::hashed_gaussian, 0.1, 0}, 1.0, 100 + trial);
        const auto s =
            signal_estimation(o, {x.tones[0].freq, x.tones[1].freq}, default_degree(1.0, 1.0, 2), 1.0, rng);
        const auto ev = sample_on_grid([&](double t) { return mixed_poly_eval(s, t) - eval_sparse(x, t); }, 1.0, 8001);
        const auto gv = sample_on_grid([&](double t) { return g(t); }, 1.0, 8001);
        ok += t_norm_sq(ev, 1.0) <= 25.0 * t_norm_sq(gv, 1.0) ? 1 : 0;
    }
    CHECK(ok >= 90);
}

TEST_CASE("signal estimation input checks") {
    std::mt19937_64 rng(7);
    auto o = make_oracle(SparseSignal{}, NoiseSpec{}, 1.0, 0);
    CHECK_THROWS_AS(signal_estimation(o, {}, 2, 1.0, rng), InvalidInput);
    CHECK_THROWS_AS(signal_estimation(o, {1.0}, -1, 1.0, rng), InvalidInput);
    // duplicates within 1/(100 T) collapse to one frequency
    const auto s = signal_estimation(o, {5.0, 5.001, 9.0}, 1, 1.0, rng);
    CHECK(s.freqs == std::vector<double>{5.0, 9.0});
}

TEST_CASE("polynomial to Fourier conversion") {
    MixedPolySignal c{{7.0}, 0, 1.0, {{cplx(2.0, 1.0)}}};
    const auto y0 = poly_to_fourier(c, 1.0, 1e-6);
    REQUIRE(y0.size() == 1);
    CHECK(y0.tones[0].freq == 7.0);
    CHECK(y0.tones[0].coeff == cplx(2.0, 1.0));

    // P(t) = t on [0,1] is (tau + 1)/2
    MixedPolySignal lin{{0.0}, 1, 1.0, {{cplx(0.5, 0.0), cplx(0.5, 0.0)}}};
    const auto y1 = poly_to_fourier(lin, 1.0, 1e-3);
    CHECK(y1.size() == 2);
    double mx = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double t = i / 10000.0;
        mx = std::max(mx, std::abs(eval_sparse(y1, t) - cplx(t, 0.0)));
    }
    CHECK(mx <= 1e-3);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MixedPolySignal s;
    s.T = 2.0;
    s.d = 3;
    s.freqs = {10.0, -40.0, 90.0};
    s.coeffs = {{cplx(1.0, 0.0), cplx(0.2, 0.1), cplx(0.0, 0.0), cplx(0.0, 0.0)},
                {cplx(0.3, -0.3), cplx(0.0, 0.0), cplx(0.1, 0.0), cplx(0.05, 0.0)},
                {cplx(0.0, 1.0), cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)}};
    const double eps = 1e-4;
    const auto y = poly_to_fourier(s, 2.0, eps);
    CHECK(y.size() == 2 + 4 + 1);
    std::uniform_real_distribution<double> ut(0.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double t = ut(rng);
        worst = std::max(worst, std::abs(eval_sparse(y, t) - mixed_poly_eval(s, t)));
    }
    CHECK(worst <= eps);
    CHECK_THROWS_AS(poly_to_fourier(s, 2.0, 0.0), InvalidInput);
}
