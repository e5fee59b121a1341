// One PASS/FAIL line per acceptance criterion; nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sfi/diagnostics.hpp"
#include "sfi/experiment.hpp"
#include "sfi/filters.hpp"
#include "sfi/frequency_estimation.hpp"
#include "sfi/hashing.hpp"
#include "sfi/pipeline.hpp"
#include "sfi/sampling.hpp"
#include "sfi/signal.hpp"
#include "sfi/signal_estimation.hpp"
#include "sfi/significant_samples.hpp"

using namespace sfi;

namespace {

int failures = 0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

void report(int id, const std::string& name, double budget_s, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s; %.1fs of %.0fs%s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                o.detail.c_str(), secs, budget_s, in_time ? "" : " (over budget)");
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

SparseSignal unit_tones(int k, double F, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uf(-F, F);
    std::uniform_real_distribution<double> up(0.0, kTwoPi);
    SparseSignal x;
    x.F = F;
    for (int i = 0; i < k; ++i) {
        x.tones.push_back({uf(rng), std::polar(1.0, up(rng))});
    }
    return x;
}

SparseSignal gaussian_tones(int k, double F, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uf(-F, F);
    std::normal_distribution<double> nd;
    SparseSignal x;
    x.F = F;
    for (int i = 0; i < k; ++i) {
        x.tones.push_back({uf(rng), cplx(nd(rng), nd(rng))});
    }
    return x;
}

double grid_norm(const std::function<cplx(double)>& f, double T, std::size_t n) {
    return std::sqrt(t_norm_sq(sample_on_grid(f, T, n), T));
}

Outcome filters() {
    int bad = 0;
    std::string where;
    auto fail = [&](const std::string& w) {
        if (bad++ == 0) {
            where = w;
        }
    };
    for (int k : {1, 2, 4}) {
        const auto h = build_filter_h(k, 0.1, 1.0);
        if (std::abs(eval_h(h, 0.5) - 1.0) > 1e-9) {
            fail("H(T/2) != 1");
        }
        const double lim = h.flat_halfwidth() / h.alpha_h;
        for (std::size_t i = 0; i < h.table.size(); ++i) {
            const double v = h.table[i];
            if (std::abs(v) > 1.01) {
                fail("|H| > 1.01");
            }
            const double t = h.t_lo + h.step * static_cast<double>(i);
            if (std::abs(2.0 * t - 1.0) < lim && (v < 1.0 - h.delta1 || v > 1.0 + 1e-12)) {
                fail("H outside [1 - delta1, 1] on the interior");
            }
        }
    }
    for (int k : {2, 4}) {
        const auto g = build_filter_g(k, 0.01, 16);
        const double tol = g.tolerance();
        const int n = 10000;
        const double umax = 3.0 * g.stop_edge();
        for (int i = 0; i < n; ++i) {
            const double u = -umax + 2.0 * umax * i / (n - 1);
            const double v = eval_g_hat(g, u * kTwoPi * (1.0 - g.alpha_g));
            if (std::abs(u) <= g.pass_edge()) {
                if (v < 1.0 - tol || v > 1.0 + 1e-12) {
                    fail("G^ pass band");
                }
            } else if (std::abs(u) >= g.stop_edge()) {
                if (std::abs(v) > tol) {
                    fail("G^ stop band");
                }
            } else if (v < -tol || v > 1.0 + 1e-12) {
                fail("G^ transition band");
            }
        }
    }
    const auto g = build_filter_g(2, 0.01, 16);
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> uf(-1000.0, 1000.0);
    const auto p = draw_hash_params(4000.0 / 14.0, 16, 1000.0, rng);
    double smin = 1e300;
    double smax = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double f = uf(rng);
        double s = 0.0;
        for (int j = 0; j < g.B; ++j) {
            s += std::pow(eval_g_bin_hat(g, p.sigma, p.b, j, f), 2);
        }
        smin = std::min(smin, s);
        smax = std::max(smax, s);
    }
    if (smin < 0.2 || smax > 3.0) {
        fail("bin energy sum outside [0.2, 3]");
    }
    std::string d = bad == 0 ? "all H and G band checks hold" : std::to_string(bad) + " violations, first: " + where;
    d += fmt(", bin energy sum in [%.4f", smin) + fmt(", %.4f]", smax);
    return {bad == 0, d};
}

// z_j(sigma a) as the plain comb sum
cplx comb_sum(const std::function<cplx(double)>& x, const FilterH& h, const FilterG& g, const HashParams& p,
              double a, int j) {
    cplx acc{0.0, 0.0};
    for (int m = -g.m_max; m <= g.m_max; ++m) {
        const double t = p.sigma * (a - m);
        const double ph = -p.sigma * p.b * m + static_cast<double>(j) * m / p.B;
        acc += x(t) * eval_h(h, t) * g.sample(m) * std::exp(cplx(0.0, kTwoPi * ph));
    }
    return acc;
}

Outcome hashing() {
    const double F = 1000.0;
    const auto h = build_filter_h(1, 0.1, 1.0);
    const auto g = build_filter_g(1, 0.01, 8);
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = gaussian_tones(1, F, rng);
        const auto p = draw_hash_params(200.0, 8, F, rng);
        const double a = ut(rng) / p.sigma;
        auto xf = [&x](double t) { return eval_sparse(x, t); };
        const auto bins = hash_to_bins_fn(xf, h, g, p, a);
        double scale = 0.0;
        std::vector<cplx> direct;
        for (int j = 0; j < 8; ++j) {
            direct.push_back(comb_sum(xf, h, g, p, a, j));
            scale = std::max(scale, std::abs(direct.back()));
        }
        for (int j = 0; j < 8; ++j) {
            worst = std::max(worst, std::abs(bins.values[static_cast<std::size_t>(j)] - direct[j]) / scale);
        }
    }
    return {worst <= 1e-5, fmt("max relative deviation %.2e (limit 1e-5)", worst)};
}

Outcome energy() {
    std::string d;
    bool pass = true;
    for (int k : {2, 4}) {
        const int s = static_cast<int>(std::ceil(50.0 * k * std::log2(k)));
        const auto dist = build_window_dist(k, 1.0);
        std::mt19937_64 rng(103 + k);
        int ok = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto x = gaussian_tones(k, 1000.0, rng);
            const double truth = exact_norm_sq(x, 1.0);
            const auto set = draw_weighted(dist, s, rng);
            std::vector<cplx> v;
            for (double t : set.times) {
                v.push_back(eval_sparse(x, t));
            }
            const double est = weighted_norm_sq(v, set.weights);
            ok += (est >= 0.8 * truth && est <= 1.2 * truth) ? 1 : 0;
        }
        pass = pass && ok >= 90;
        d += (d.empty() ? "" : ", ") + std::string("k=") + std::to_string(k) + " s=" + std::to_string(s) + ": " +
             std::to_string(ok) + "/100";
    }
    return {pass, d + " within 20% (need 90)"};
}

Outcome significant() {
    const int k = 2;
    const double F = 1000.0;
    const auto h = build_filter_h(k, 0.1, 1.0);
    const auto g = build_filter_g(k, 0.01, 16);
    const double delta0 = 4.0 * F / 14.0;
    const double beta = 1e-4;
    std::mt19937_64 rng(104);
    std::uniform_real_distribution<double> uf(-F, F);
    int ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double f0 = uf(rng);
        const SparseSignal x{{{f0, {1.0, -0.4}}}, F};
        auto o = make_oracle(x, NoiseSpec{}, 1.0, 0);
        const auto p = draw_hash_params(delta0, 16, F, rng);
        const auto batch = generate_significant_samples(o, h, g, p, beta, default_significant_s(k), rng);
        const auto& b = batch.bins[static_cast<std::size_t>(hash_bin(p, f0))];
        if (b.degenerate) {
            continue;
        }
        const cplx dz = b.zab - b.za * std::exp(cplx(0.0, kTwoPi * f0 * beta));
        ok += std::norm(dz) <= 0.01 * std::norm(b.za) ? 1 : 0;
    }
    return {ok >= 60, std::to_string(ok) + "/100 bins pass the local test (need 60)"};
}

// Synthetic vote rounds: uniform phase with probability rho, else a small error.
SampleTensor synthetic_tensor(double f0, int R, double F, const SearchConfig& cfg, double rho, std::mt19937_64& rng) {
    SampleTensor t;
    t.D = 1;
    t.R = R;
    t.B = 1;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> nd(0.0, 0.01);
    const double bhat = cfg.c_beta * cfg.num / search_length(F, cfg.num, 0);
    for (int r = 0; r < R; ++r) {
        const double beta = bhat * (0.5 + 0.5 * u01(rng));
        t.beta.push_back(beta);
        const double ph = u01(rng) < rho ? kTwoPi * u01(rng) : kTwoPi * f0 * beta + nd(rng);
        const cplx za(0.3, -1.1);
        t.entries.push_back({za, za * std::exp(cplx(0.0, ph)), false});
    }
    return t;
}

Outcome frequency() {
    PipelineConfig pc;
    pc.k = 4;
    pc.F = 1000.0;
    pc.search.num = 16;
    const auto rp = resolve_pipeline(pc);
    const auto ctx = make_diag_context(rp.h, rp.g);
    InstanceSpec spec;
    spec.k = 4;
    spec.F = pc.F;
    std::mt19937_64 rng(105);
    int all_found = 0;
    int heavy_total = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        const auto x = draw_instance(spec, 2.0 * rp.hash_delta, rng);
        const NoiseSpec ns{NoiseKind::hashed_gaussian, 0.1, 0};
        const auto gm = make_noise_model(x, ns, 1.0, 500 + trial);
        auto o = make_oracle(x, gm, 1.0, 500 + trial);
        const double xn = exact_norm_sq(x, 1.0);
        const double gn = t_norm_sq(sample_on_grid([&gm](double t) { return gm(t); }, 1.0, 8001), 1.0);
        const double N2 = gn + pc.delta * xn;
        const auto p = draw_hash_params(rp.hash_delta, rp.B, pc.F, rng);
        const auto fl = frequency_estimation_x(o, rp.h, rp.g, p, pc.F, 1.0, rp.delta_res, rp.search, rng);
        bool all = true;
        for (const auto& t : x.tones) {
            if (!heavy_frequency(ctx, x, t.freq, N2, pc.k, 1.0)) {
                continue;
            }
            ++heavy_total;
            double best = 1e300;
            for (const auto& e : fl.entries) {
                best = std::min(best, std::abs(e.freq - t.freq));
            }
            all = all && best <= 10.0 * rp.delta_res;
        }
        all_found += all ? 1 : 0;
    }

    SearchConfig cfg;
    const double F = 1000.0;
    const double L = -search_half_width(F, cfg.num);
    const double len = search_length(F, cfg.num, 0);
    const double width = len / cfg.num;
    std::uniform_real_distribution<double> uf(-F, F);
    int far_ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double f0 = uf(rng);
        const int qstar = static_cast<int>((f0 - L) / width);
        const auto t = synthetic_tensor(f0, 24, F, cfg, 0.1, rng);
        const auto res = ary_search(t, 0, 0, L, len, cfg);
        bool small = true;
        for (int q = 0; q < cfg.num; ++q) {
            if (std::abs(q - qstar) >= 3) {
                small = small && res.votes[static_cast<std::size_t>(q)] <= 12;
            }
        }
        far_ok += small ? 1 : 0;
    }
    const bool pass = all_found >= 85 && far_ok >= 95;
    return {pass, std::to_string(all_found) + "/100 trials recover every heavy tone within 10 Delta (need 85, " +
                      std::to_string(heavy_total) + " heavy tones); far-region votes <= R/2 in " +
                      std::to_string(far_ok) + "/100 (need 95)"};
}

Outcome set_query() {
    std::mt19937_64 rng(106);
    int ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = gaussian_tones(2, 1000.0, rng);
        const NoiseSpec ns{NoiseKind::hashed_gaussian, 0.1, 0};
        const auto g = make_noise_model(x, ns, 1.0, 600 + trial);
        auto o = make_oracle(x, g, 1.0, 600 + trial);
        const auto s = signal_estimation(o, {x.tones[0].freq, x.tones[1].freq}, default_degree(1.0, 1.0, 2), 1.0, rng);
        const double err = grid_norm([&](double t) { return mixed_poly_eval(s, t) - eval_sparse(x, t); }, 1.0, 8001);
        const double gn = grid_norm([&g](double t) { return g(t); }, 1.0, 8001);
        ok += err * err <= 25.0 * gn * gn ? 1 : 0;
    }
    return {ok >= 90, std::to_string(ok) + "/100 within 25 ||g||^2 (need 90)"};
}

Outcome end_to_end() {
    ExperimentConfig cfg;
    cfg.instance.k = 2;
    cfg.instance.F = 1000.0;
    cfg.noise = NoiseSpec{NoiseKind::hashed_gaussian, 0.1, 0};
    cfg.pipeline.rho = 0.05;
    cfg.trials = 100;
    cfg.seed = 107;
    cfg.labels = false;
    const auto recs = run_experiment(cfg);
    int ok = 0;
    int failed = 0;
    double worst = 0.0;
    for (const auto& r : recs) {
        const double bound = 10.0 * (r.noise_norm + cfg.pipeline.delta * r.signal_norm);
        ok += r.error <= bound ? 1 : 0;
        failed += r.failed_runs;
        worst = std::max(worst, r.error / bound);
    }
    return {ok >= 95, std::to_string(ok) + "/100 within 10 (||g|| + delta ||x*||) (need 95), worst ratio " +
                          fmt("%.3f", worst) + ", dropped runs " + std::to_string(failed)};
}

Outcome scaling() {
    ExperimentConfig cfg;
    cfg.instance.F = 1e4;
    cfg.pipeline.rho = 0.5;
    cfg.pipeline.search.num = 16;
    cfg.pipeline.search.R_votes = 6;
    cfg.trials = 1;
    cfg.seed = 108;
    cfg.labels = false;
    const auto t = scaling_sweep(cfg, {2, 4, 8, 16});
    std::string d = fmt("frequency-stage slope %.3f in [1.5, 2.8]", t.slope_freq) +
                    fmt("; total slope %.3f (reported, not gated)", t.slope_total) + "; queries";
    for (const auto& r : t.rows) {
        d += " k=" + std::to_string(r.k) + ":" + fmt("%.0f", r.queries_freq);
    }
    return {t.slope_freq >= 1.5 && t.slope_freq <= 2.8, d};
}

Outcome concentration() {
    // tones spread over a wide band relative to the hashing scale
    const int k = 2;
    const double F = 1e7;
    const double delta = 0.01;
    const auto h = build_filter_h(k, 0.01, 1.0);
    const auto g = build_filter_g(k, 0.01, 16, FilterGKnobs{0.5, 0.005, kPi});
    const double delta0 = 1000.0 * h.dh;
    const double Delta = k * h.dh;
    const auto ctx = make_diag_context(h, g);
    std::mt19937_64 rng(109);
    const int trials = 250;
    int offset = 0;
    int heavy = 0;
    int iso = 0;
    double worst_time = 0.0;
    double worst_band = 1.0;
    for (int trial = 0; trial < trials; ++trial) {
        const auto x = unit_tones(k, F, rng);
        const auto p = draw_hash_params(delta0, 16, F, rng);
        const double xn = exact_norm_sq(x, 1.0);
        const double N2 = 0.01 * xn + delta * xn;
        offset += large_offset({x.tones[0].freq, x.tones[1].freq}, h, g, p) ? 1 : 0;
        for (const auto& t : x.tones) {
            if (!heavy_frequency(ctx, x, t.freq, N2, k, 1.0) || large_offset({t.freq}, h, g, p)) {
                continue;
            }
            ++heavy;
            const int j = hash_bin(p, t.freq);
            worst_time = std::max(worst_time, time_concentration_ratio(ctx, x, p, j));
            if (well_isolated(ctx, x, p, t.freq, Delta, 1.0, N2, k)) {
                ++iso;
                worst_band = std::min(worst_band, in_band_fraction(ctx, x, p, j, t.freq, Delta));
            }
        }
    }
    const double off_rate = static_cast<double>(offset) / trials;
    const double iso_rate = heavy > 0 ? static_cast<double>(iso) / heavy : 0.0;
    const bool pass = trials >= 200 && heavy >= 200 && worst_time <= 1.5 && worst_band >= 0.6 && off_rate <= 0.05 &&
                      iso_rate >= 0.85;
    return {pass, fmt("time ratio max %.4f (<= 1.5)", worst_time) + fmt(", in-band min %.4f (>= 0.6)", worst_band) +
                      fmt(", large offset %.3f (<= 0.05)", off_rate) + fmt(", isolation %.3f (>= 0.85)", iso_rate) +
                      " over " + std::to_string(trials) + " trials, " + std::to_string(heavy) + " labeled bins"};
}

Outcome booster() {
    std::mt19937_64 rng(110);
    std::uniform_real_distribution<double> uf(-1000.0, 1000.0);
    int ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = gaussian_tones(2, 1000.0, rng);
        std::vector<SparseSignal> cands(10, x);
        std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
        std::shuffle(idx.begin(), idx.end(), rng);
        std::set<std::size_t> bad;
        for (int c = 0; c < 3; ++c) {
            const std::size_t i = idx[static_cast<std::size_t>(c)];
            bad.insert(i);
            cands[i].tones.push_back({uf(rng), cplx(5.0, 0.0)});
        }
        const auto r = merge_signals_detail(cands, 1.0, 0.05, 2.0, 1.0, rng);
        ok += bad.count(r.chosen) == 0 ? 1 : 0;
    }
    return {ok >= 99, std::to_string(ok) + "/100 pick an uncorrupted candidate (need 99)"};
}

} // namespace

int main() {
    report(1, "filter correctness", 60, filters);
    report(2, "HashToBins vs brute force", 60, hashing);
    report(3, "energy estimation sandwich", 60, energy);
    report(4, "significant samples", 120, significant);
    report(5, "frequency estimation", 600, frequency);
    report(6, "set query", 300, set_query);
    report(7, "end to end", 1200, end_to_end);
    report(8, "query scaling", 1800, scaling);
    report(9, "diagnostic concentration", 600, concentration);
    report(10, "min-of-median booster", 60, booster);
    std::printf("%s: %d of 10 criteria failed\n", failures == 0 ? "PASS" : "FAIL", failures);
    return failures == 0 ? 0 : 1;
}
