#include "sfi/significant_samples.hpp"

#include <cmath>

#include "sfi/errors.hpp"

namespace sfi {

GoodIntervalU compute_good_interval(const FilterH& h, double beta) {
    if (!(beta >= 0.0) || !(beta < 0.1 * h.T)) {
        throw InvalidInput("compute_good_interval: beta must lie in [0, T/10)");
    }
    const double half = h.flat_halfwidth() / h.alpha_h * 0.5 * h.T;
    GoodIntervalU U{0.5 * h.T - half, 0.5 * h.T + half - beta};
    const double floor_val = 1.0 - h.delta1;
    auto ok = [&](const GoodIntervalU& u) {
        if (!(u.R > u.L)) {
            return false;
        }
        // table nodes inside [L, R + beta], plus both ends
        const double lo = u.L;
        const double hi = u.R + beta;
        if (eval_h(h, lo) <= floor_val || eval_h(h, hi) <= floor_val) {
            return false;
        }
        const auto i0 = static_cast<std::size_t>(std::ceil((lo - h.t_lo) / h.step));
        for (std::size_t i = i0; i < h.table.size(); ++i) {
            const double t = h.t_lo + h.step * static_cast<double>(i);
            if (t > hi) {
                break;
            }
            if (h.table[i] <= floor_val) {
                return false;
            }
        }
        return true;
    };
    while (!ok(U)) {
        U.L += h.step;
        U.R -= h.step;
        if (!(U.R > U.L)) {
            throw ConfigError("compute_good_interval: no time keeps H above 1 - delta1; filter too aggressive");
        }
    }
    return U;
}

double nesting_k(const GoodIntervalU& U, double T, double k) {
    const double half = 0.5 * T;
    const double m = std::min(half - U.L, U.R - half);
    if (!(m > 0.0)) {
        throw ConfigError("nesting_k: good interval does not contain the window center");
    }
    if (m >= half) {
        return k;
    }
    const double kmax = 1.0 / (1.0 - m / half);
    if (kmax < 2.0) {
        throw ConfigError("nesting_k: good interval too short for the restricted distribution");
    }
    return std::min(k, kmax);
}

int default_significant_s(int k, double c_s) {
    const double v = c_s * k * std::log2(std::max(2, k));
    return std::max(1, static_cast<int>(std::ceil(v)));
}

SignificantSampleBatch generate_significant_samples(const SampleOracle& oracle, const FilterH& h,
                                                    const FilterG& g, const HashParams& p, double beta, int s,
                                                    std::mt19937_64& rng) {
    if (s < 1) {
        throw InvalidInput("generate_significant_samples: s must be at least 1");
    }
    const double T = h.T;
    const GoodIntervalU U = compute_good_interval(h, beta);
    const double kd = nesting_k(U, T, std::max(2, h.k));
    const auto dist = build_window_dist(kd, T, Interval{U.L, U.R});
    const auto first = draw_weighted(dist, s, rng);

    const int B = p.B;
    std::vector<std::vector<cplx>> za(static_cast<std::size_t>(s));
    std::vector<std::vector<cplx>> zb(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i) {
        const double t = first.times[static_cast<std::size_t>(i)];
        za[static_cast<std::size_t>(i)] = hash_to_bins(oracle, h, g, p, t / p.sigma).values;
        zb[static_cast<std::size_t>(i)] = hash_to_bins(oracle, h, g, p, (t + beta) / p.sigma).values;
    }

    SignificantSampleBatch out;
    out.beta = beta;
    out.bins.resize(static_cast<std::size_t>(B));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> mass(static_cast<std::size_t>(s));
    for (int j = 0; j < B; ++j) {
        double total = 0.0;
        for (int i = 0; i < s; ++i) {
            const double m = first.weights[static_cast<std::size_t>(i)] *
                             std::norm(za[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
            mass[static_cast<std::size_t>(i)] = m;
            total += m;
        }
        // One uniform per bin regardless of degeneracy keeps rng streams aligned.
        const double r = unif(rng) * total;
        BinPair& bp = out.bins[static_cast<std::size_t>(j)];
        if (!(total > 0.0) || !std::isfinite(total)) {
            bp.degenerate = true;
            continue;
        }
        int pick = s - 1;
        double acc = 0.0;
        for (int i = 0; i < s; ++i) {
            acc += mass[static_cast<std::size_t>(i)];
            if (r < acc) {
                pick = i;
                break;
            }
        }
        bp.za = za[static_cast<std::size_t>(pick)][static_cast<std::size_t>(j)];
        bp.zab = zb[static_cast<std::size_t>(pick)][static_cast<std::size_t>(j)];
        bp.alpha = first.times[static_cast<std::size_t>(pick)];
        bp.degenerate = (std::abs(bp.za) == 0.0);
    }
    return out;
}

} // namespace sfi
