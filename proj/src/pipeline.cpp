#include "sfi/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "sfi/errors.hpp"

namespace sfi {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int next_pow2_int(double x) {
    int p = 1;
    while (p < x) {
        p *= 2;
    }
    return p;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x2545f4914f6cdd1dULL));
}

std::vector<double> cluster_frequencies(std::vector<double> freqs, double radius) {
    std::sort(freqs.begin(), freqs.end());
    std::vector<double> out;
    std::size_t i = 0;
    while (i < freqs.size()) {
        std::size_t j = i + 1;
        double sum = freqs[i];
        while (j < freqs.size() && freqs[j] - freqs[j - 1] < radius) {
            sum += freqs[j];
            ++j;
        }
        out.push_back(sum / static_cast<double>(j - i));
        i = j;
    }
    return out;
}

int boost_rounds(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw InvalidInput("boost_rounds: rho must lie in (0,1)");
    }
    return std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / rho) - 1e-12)));
}

ResolvedPipeline resolve_pipeline(const PipelineConfig& cfg) {
    if (cfg.k < 1) {
        throw ConfigError("pipeline: k must be at least 1");
    }
    if (!(cfg.F > 0.0 && cfg.T > 0.0)) {
        throw ConfigError("pipeline: F and T must be positive");
    }
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
        throw ConfigError("pipeline: delta must lie in (0,1)");
    }
    if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) {
        throw ConfigError("pipeline: rho must lie in (0,1)");
    }
    ResolvedPipeline rp;
    rp.cfg = cfg;
    const double delta1 = cfg.delta1 > 0.0 ? cfg.delta1 : cfg.delta / cfg.k;
    if (delta1 > cfg.delta / cfg.k * (1.0 + 1e-12)) {
        throw ConfigError("pipeline: delta1 must not exceed delta/k");
    }
    rp.cfg.delta1 = delta1;
    rp.B = cfg.B > 0 ? cfg.B : std::max(2, next_pow2_int(cfg.c_B * cfg.k));
    if ((rp.B & (rp.B - 1)) != 0) {
        throw ConfigError("pipeline: B must be a power of two");
    }
    try {
        rp.h = build_filter_h(cfg.k, delta1, cfg.T, cfg.h);
        rp.g = build_filter_g(cfg.k, cfg.delta, rp.B, cfg.g);
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    if (cfg.hash_delta > 0.0) {
        rp.hash_delta = cfg.hash_delta;
    } else {
        const double no_wrap = rp.B > 2 ? 4.0 * cfg.F / (rp.B - 2) : 4.0 * cfg.F;
        rp.hash_delta = std::max(no_wrap, cfg.c_foot * rp.g.l / cfg.T);
    }
    rp.delta_res = cfg.delta_res > 0.0 ? cfg.delta_res : 1.0 / cfg.T;
    rp.merge_radius = cfg.merge_radius > 0.0 ? cfg.merge_radius : 2.0 * rp.delta_res;
    rp.degree = cfg.degree >= 0 ? cfg.degree : default_degree(cfg.T, rp.delta_res, cfg.k);
    if (cfg.search.num < 6) {
        throw ConfigError("pipeline: num must be at least 6");
    }
    rp.search = resolve_search(cfg.search, cfg.F, rp.delta_res, cfg.k);
    const double beta_max = rp.search.c_beta * rp.search.num / search_length(cfg.F, rp.search.num, rp.search.D_iters - 1);
    if (!(beta_max < 0.1 * cfg.T)) {
        throw ConfigError("pipeline: the finest search step needs beta >= T/10; raise delta_res or lower c_beta");
    }
    rp.R_p = boost_rounds(cfg.rho);
    return rp;
}

RunResult constant_prob_run(const SampleOracle& oracle, const ResolvedPipeline& rp, std::mt19937_64& rng) {
    const auto& cfg = rp.cfg;
    RunResult out;
    out.p = draw_hash_params(rp.hash_delta, rp.B, cfg.F, rng, cfg.sigma_range);

    auto t0 = std::chrono::steady_clock::now();
    std::uint64_t q0 = oracle.query_count();
    out.freqs = frequency_estimation_x(oracle, rp.h, rp.g, out.p, cfg.F, cfg.T, rp.delta_res, rp.search, rng);
    out.queries_freq = oracle.query_count() - q0;
    out.time_freq = seconds_since(t0);

    out.y.F = cfg.F;
    if (out.freqs.entries.empty()) {
        return out;
    }
    t0 = std::chrono::steady_clock::now();
    q0 = oracle.query_count();
    std::vector<double> fl;
    for (const auto& e : out.freqs.entries) {
        fl.push_back(e.freq);
    }
    fl = cluster_frequencies(std::move(fl), rp.merge_radius);
    const auto mixed = signal_estimation(oracle, fl, rp.degree, cfg.T, rng, cfg.se);
    out.queries_signal = oracle.query_count() - q0;

    double scale = 0.0;
    for (double t : uniform_grid(cfg.T, 257)) {
        scale = std::max(scale, std::abs(mixed_poly_eval(mixed, t)));
    }
    scale = std::max(scale, 1e-300);
    // d+1 close tones reach only about 1e-3 relative in double precision at
    // moderate degree, so relax by decades up to 1e-2 before giving up.
    for (double eps = cfg.conv_eps * scale;; eps *= 10.0) {
        try {
            out.y = poly_to_fourier(mixed, cfg.T, eps);
            out.conv_eps_used = eps / scale;
            break;
        } catch (const ConversionFailure&) {
            if (eps >= 1e-2 * scale) {
                out.conversion_failed = true;
                out.y = SparseSignal{};
                break;
            }
        }
    }
    out.y.F = std::max(out.y.F, cfg.F);
    out.time_signal = seconds_since(t0);
    return out;
}

SparseSignal constant_prob_interpolate(const SampleOracle& oracle, const PipelineConfig& cfg) {
    const auto rp = resolve_pipeline(cfg);
    std::mt19937_64 rng(derive_seed(cfg.seed, 1));
    auto run = constant_prob_run(oracle, rp, rng);
    if (run.conversion_failed) {
        throw ConversionFailure("poly_to_fourier: no tone spacing reached the requested accuracy");
    }
    return std::move(run.y);
}

MergeResult merge_signals_detail(const std::vector<SparseSignal>& candidates, double T, double rho,
                                 double merge_factor, double merge_c, std::mt19937_64& rng) {
    if (candidates.empty()) {
        throw InvalidInput("merge_signals: need at least one candidate");
    }
    MergeResult res;
    const std::size_t n = candidates.size();
    res.distances.assign(n, std::vector<double>(n, 0.0));
    res.medians.assign(n, 0.0);
    if (n == 1) {
        return res;
    }
    std::size_t K = 1;
    for (const auto& c : candidates) {
        K = std::max(K, c.size());
    }
    const double Rp = static_cast<double>(n);
    const double kk = static_cast<double>(K);
    const int m = std::max(
        1, static_cast<int>(std::ceil(merge_c * kk * std::log2(kk + 1.0) * std::log(Rp * Rp / rho + 1.0))));
    const auto plan = weighted_sketch(m, std::max(2.0, merge_factor * kk), T, rng);
    std::vector<std::vector<cplx>> vals(n, std::vector<cplx>(plan.times.size()));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < plan.times.size(); ++s) {
            vals[i][s] = eval_sparse(candidates[i], plan.times[s]);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t s = 0; s < plan.times.size(); ++s) {
                acc += plan.weights[s] * std::norm(vals[i][s] - vals[j][s]);
            }
            res.distances[i][j] = acc;
            res.distances[j][i] = acc;
        }
    }
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto row = res.distances[i];
        std::sort(row.begin(), row.end());
        res.medians[i] = row[(n - 1) / 2];
        if (i == 0 || res.medians[i] < best) {
            best = res.medians[i];
            res.chosen = i;
        }
    }
    return res;
}

SparseSignal merge_signals(const std::vector<SparseSignal>& candidates, double T, const PipelineConfig& cfg,
                           std::mt19937_64& rng) {
    const auto r = merge_signals_detail(candidates, T, cfg.rho, cfg.merge_factor, cfg.merge_c, rng);
    return candidates[r.chosen];
}

RecoveryReport high_prob_interpolate(const SampleOracle& oracle, const ResolvedPipeline& rp) {
    RecoveryReport rep;
    rep.runs = rp.R_p;
    std::vector<SparseSignal> cands;
    std::vector<std::size_t> cand_run;
    for (int r = 0; r < rp.R_p; ++r) {
        std::mt19937_64 rng(derive_seed(rp.cfg.seed, static_cast<std::uint64_t>(r) + 1));
        auto run = constant_prob_run(oracle, rp, rng);
        rep.run_queries_freq.push_back(run.queries_freq);
        rep.run_queries_signal.push_back(run.queries_signal);
        rep.run_freq_counts.push_back(run.freqs.entries.size());
        rep.run_params.push_back(run.p);
        rep.run_freqs.push_back(run.freqs);
        rep.queries_freq += run.queries_freq;
        rep.queries_signal += run.queries_signal;
        rep.time_freq += run.time_freq;
        rep.time_signal += run.time_signal;
        if (run.conversion_failed) {
            rep.failed_runs.push_back(r);
            continue;
        }
        cand_run.push_back(static_cast<std::size_t>(r));
        cands.push_back(std::move(run.y));
    }
    rep.queries_total = rep.queries_freq + rep.queries_signal;
    if (cands.empty()) {
        throw ConversionFailure("high_prob_interpolate: every run failed the tone conversion");
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 mrng(derive_seed(rp.cfg.seed, 0x6d65726765ULL));
    const auto m = merge_signals_detail(cands, rp.cfg.T, rp.cfg.rho, rp.cfg.merge_factor, rp.cfg.merge_c, mrng);
    rep.chosen = cand_run[m.chosen];
    rep.output = cands[m.chosen];
    rep.time_merge = seconds_since(t0);
    return rep;
}

RecoveryReport high_prob_interpolate(const SampleOracle& oracle, const PipelineConfig& cfg) {
    return high_prob_interpolate(oracle, resolve_pipeline(cfg));
}

} // namespace sfi
