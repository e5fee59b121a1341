#include "sfi/frequency_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sfi/errors.hpp"

namespace sfi {

int search_iterations(double F, double Delta, int num) {
    if (num < 6) {
        throw InvalidInput("search_iterations: num must be at least 6");
    }
    if (!(F > 0.0 && Delta > 0.0)) {
        throw InvalidInput("search_iterations: F and Delta must be positive");
    }
    const double ratio = 2.0 * search_half_width(F, num) / (num * Delta);
    if (ratio <= 1.0) {
        return 1;
    }
    return std::max(1, static_cast<int>(std::ceil(std::log(ratio) / std::log(num / 5.0))));
}

SearchConfig resolve_search(const SearchConfig& cfg, double F, double Delta, int k) {
    SearchConfig out = cfg;
    if (out.D_iters < 1) {
        out.D_iters = search_iterations(F, Delta, out.num);
    }
    if (out.s < 1) {
        out.s = default_significant_s(k);
    }
    return out;
}

double search_half_width(double F, int num) {
    return F * (1.0 + 2.0 / num);
}

double search_length(double F, int num, int d) {
    return 2.0 * search_half_width(F, num) * std::pow(5.0 / num, d);
}

SampleTensor precompute_samples(const SampleOracle& oracle, const FilterH& h, const FilterG& g,
                                const HashParams& p, double F, double T, const SearchConfig& cfg,
                                std::mt19937_64& rng) {
    if (cfg.num < 6 || cfg.D_iters < 1 || cfg.R_votes < 1) {
        throw InvalidInput("precompute_samples: invalid search configuration");
    }
    if (!(cfg.c_beta > 0.0)) {
        throw InvalidInput("precompute_samples: c_beta must be positive");
    }
    (void)T;
    const int s = cfg.s > 0 ? cfg.s : default_significant_s(h.k);
    SampleTensor t;
    t.D = cfg.D_iters;
    t.R = cfg.R_votes;
    t.B = p.B;
    t.beta.resize(static_cast<std::size_t>(t.D * t.R));
    t.entries.resize(static_cast<std::size_t>(t.D * t.R * t.B));
    for (int d = 0; d < t.D; ++d) {
        const double bhat = cfg.c_beta * cfg.num / search_length(F, cfg.num, d);
        std::uniform_real_distribution<double> ub(0.5 * bhat, bhat);
        for (int r = 0; r < t.R; ++r) {
            const double beta = ub(rng);
            t.beta[static_cast<std::size_t>(d * t.R + r)] = beta;
            const auto batch = generate_significant_samples(oracle, h, g, p, beta, s, rng);
            for (int j = 0; j < t.B; ++j) {
                const auto& bp = batch.bins[static_cast<std::size_t>(j)];
                t.at(d, r, j) = TensorEntry{bp.za, bp.zab, bp.degenerate};
            }
        }
    }
    return t;
}

std::vector<double> theta_candidates(cplx za, cplx zab, double beta, double L, double len) {
    std::vector<double> out;
    const double phi = std::arg(zab / za);
    const long s_lo = static_cast<long>(std::ceil(beta * L - 10.0));
    const long s_hi = static_cast<long>(std::floor(beta * (L + len) + 10.0));
    for (long s = s_lo; s <= s_hi; ++s) {
        out.push_back((phi + kTwoPi * static_cast<double>(s)) / (kTwoPi * beta));
    }
    return out;
}

AryResult ary_search(const SampleTensor& tensor, int d, int j, double L, double len, const SearchConfig& cfg) {
    AryResult res;
    const int num = cfg.num;
    res.votes.assign(static_cast<std::size_t>(num), 0);
    const double width = len / num;
    std::vector<char> hit(static_cast<std::size_t>(num));
    for (int r = 0; r < tensor.R; ++r) {
        const auto& e = tensor.at(d, r, j);
        if (e.degenerate || std::abs(e.za) == 0.0) {
            continue;
        }
        ++res.rounds_used;
        std::fill(hit.begin(), hit.end(), 0);
        for (double f : theta_candidates(e.za, e.zab, tensor.beta_at(d, r), L, len)) {
            const double pos = (f - L) / width;
            if (pos >= 0.0 && pos < num) {
                hit[static_cast<std::size_t>(pos)] = 1;
            }
        }
        for (int q = 0; q < num; ++q) {
            res.votes[static_cast<std::size_t>(q)] += hit[static_cast<std::size_t>(q)];
        }
    }
    if (res.rounds_used == 0) {
        return res;
    }
    const double need = 0.5 * res.rounds_used;
    for (int q = 0; q < num; ++q) {
        int sum = 0;
        for (int o = 0; o < 3 && q + o < num; ++o) {
            sum += res.votes[static_cast<std::size_t>(q + o)];
        }
        if (sum >= need) {
            res.ok = true;
            res.q = q;
            res.new_left = L + q * width;
            return res;
        }
    }
    return res;
}

double refine_in_window(const SampleTensor& tensor, int j, double L, double len) {
    const double mid = L + 0.5 * len;
    const int d = tensor.D - 1;
    std::vector<double> picks;
    int used = 0;
    for (int r = 0; r < tensor.R; ++r) {
        const auto& e = tensor.at(d, r, j);
        if (e.degenerate || std::abs(e.za) == 0.0) {
            continue;
        }
        ++used;
        double best = 0.0;
        double gap = std::numeric_limits<double>::infinity();
        for (double f : theta_candidates(e.za, e.zab, tensor.beta_at(d, r), L, len)) {
            if (f >= L && f < L + len && std::abs(f - mid) < gap) {
                gap = std::abs(f - mid);
                best = f;
            }
        }
        if (std::isfinite(gap)) {
            picks.push_back(best);
        }
    }
    if (picks.empty() || 2 * picks.size() < static_cast<std::size_t>(used)) {
        return mid;
    }
    const auto m = picks.begin() + static_cast<std::ptrdiff_t>(picks.size() / 2);
    std::nth_element(picks.begin(), m, picks.end());
    return *m;
}

std::optional<double> frequency_estimation_z(const SampleTensor& tensor, int j, double F, double T, double Delta,
                                             const SearchConfig& cfg, SearchTrace* trace) {
    (void)T;
    (void)Delta;
    double L = -search_half_width(F, cfg.num);
    double len = 2.0 * search_half_width(F, cfg.num);
    for (int d = 0; d < tensor.D; ++d) {
        if (trace) {
            trace->lefts.push_back(L);
            trace->lengths.push_back(len);
        }
        auto step = ary_search(tensor, d, j, L, len, cfg);
        const bool ok = step.ok;
        if (trace) {
            trace->steps.push_back(step);
        }
        if (!ok) {
            return std::nullopt;
        }
        L = step.new_left;
        len = 5.0 * len / cfg.num;
    }
    if (trace) {
        trace->lefts.push_back(L);
        trace->lengths.push_back(len);
    }
    return refine_in_window(tensor, j, L, len);
}

FrequencyList frequency_estimation_x(const SampleOracle& oracle, const FilterH& h, const FilterG& g,
                                     const HashParams& p, double F, double T, double Delta,
                                     const SearchConfig& cfg, std::mt19937_64& rng) {
    const SearchConfig rc = resolve_search(cfg, F, Delta, h.k);
    const auto tensor = precompute_samples(oracle, h, g, p, F, T, rc, rng);
    FrequencyList out;
    for (int j = 0; j < p.B; ++j) {
        if (auto f = frequency_estimation_z(tensor, j, F, T, Delta, rc)) {
            out.entries.push_back({j, *f});
        }
    }
    return out;
}

} // namespace sfi
