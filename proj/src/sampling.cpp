#include "sfi/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "sfi/errors.hpp"

namespace sfi {

namespace {

// integral_0^t of the unnormalized shape divided by T; odd in t.
double primitive(double k, double T, double t) {
    const double x = std::abs(t) / T;
    const double edge = 1.0 - 1.0 / k;
    double v;
    if (x <= edge) {
        v = -std::log1p(-x);
    } else {
        v = std::log(k) + k * (x - edge);
    }
    return t < 0.0 ? -v : v;
}

double primitive_inverse(double k, double T, double g) {
    const double ag = std::abs(g);
    const double lk = std::log(k);
    double x;
    if (ag <= lk) {
        x = -std::expm1(-ag);
    } else {
        x = (1.0 - 1.0 / k) + (ag - lk) / k;
    }
    return g < 0.0 ? -x * T : x * T;
}

} // namespace

double TimeDistribution::density(double t) const {
    const double x = t - center;
    if (x < lo() || x > hi()) {
        return 0.0;
    }
    const double r = std::abs(x) / T;
    if (r <= 1.0 - 1.0 / k) {
        return c / ((1.0 - r) * T);
    }
    return c * k / T;
}

double TimeDistribution::cdf(double t) const {
    const double x = std::clamp(t - center, lo(), hi());
    return c * (primitive(k, T, x) - primitive(k, T, lo()));
}

double TimeDistribution::inv_cdf(double p) const {
    const double g = p / c + primitive(k, T, lo());
    const double x = std::clamp(primitive_inverse(k, T, g), lo(), hi());
    return x + center;
}

TimeDistribution build_dist(double k, double T, std::optional<Interval> U) {
    if (!(k >= 2.0)) {
        throw InvalidInput("build_dist: k must be at least 2");
    }
    if (!(T > 0.0)) {
        throw InvalidInput("build_dist: T must be positive");
    }
    TimeDistribution d;
    d.k = k;
    d.T = T;
    if (U) {
        const double inner = T * (1.0 - 1.0 / k);
        const double tol = 1e-12 * T;
        if (!(U->L <= -inner + tol && U->R >= inner - tol && U->L >= -T - tol && U->R <= T + tol)) {
            throw InvalidInput("build_dist: U must satisfy [-T(1-1/k), T(1-1/k)] within U within [-T, T]");
        }
        d.kind = DistKind::restricted;
        d.U = Interval{std::max(U->L, -T), std::min(U->R, T)};
    }
    const double mass = primitive(k, T, d.hi()) - primitive(k, T, d.lo());
    d.c = 1.0 / mass;
    return d;
}

TimeDistribution build_window_dist(double k, double T_obs, std::optional<Interval> U_obs) {
    const double half = 0.5 * T_obs;
    std::optional<Interval> U;
    if (U_obs) {
        U = Interval{U_obs->L - half, U_obs->R - half};
    }
    auto d = build_dist(k, half, U);
    d.center = half;
    return d;
}

WeightedSampleSet draw_weighted(const TimeDistribution& dist, int s, std::mt19937_64& rng) {
    if (s < 1) {
        throw InvalidInput("draw_weighted: s must be at least 1");
    }
    WeightedSampleSet out;
    out.source = dist;
    out.times.reserve(static_cast<std::size_t>(s));
    out.weights.reserve(static_cast<std::size_t>(s));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double win = dist.window();
    for (int i = 0; i < s; ++i) {
        const double t = dist.inv_cdf(unif(rng));
        out.times.push_back(t);
        out.weights.push_back(1.0 / (win * s * dist.density(t)));
    }
    return out;
}

double weighted_norm_sq(std::span<const cplx> values, std::span<const double> w) {
    if (values.size() != w.size()) {
        throw InvalidInput("weighted_norm_sq: length mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        acc += w[i] * std::norm(values[i]);
    }
    return acc;
}

} // namespace sfi
