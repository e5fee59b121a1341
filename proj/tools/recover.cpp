// recover: seeded Monte Carlo runs of the sparse interpolation pipeline.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfi/errors.hpp"
#include "sfi/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::vector<int> parse_k_list(const std::string& arg) {
    std::string s = arg;
    if (s.rfind("k=", 0) == 0) {
        s = s.substr(2);
    }
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
            out.push_back(v);
        } catch (const std::exception&) {
            throw sfi::ConfigError("--sweep: cannot parse '" + item + "'");
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse Fourier interpolation experiment runner"};
    std::string config_path;
    std::uint64_t seed = 0;
    int trials = -1;
    std::string out_dir;
    std::string stage;
    std::string sweep;
    bool plots = false;
    app.add_option("--config", config_path, "JSON experiment config")->required();
    auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides config)");
    app.add_option("--trials", trials, "trial count (overrides config)");
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--stage", stage, "freq or full")->check(CLI::IsMember({"freq", "full"}));
    app.add_option("--sweep", sweep, "scaling sweep, e.g. k=2,4,8,16");
    app.add_flag("--emit-plots", plots, "write SVG plots next to the CSVs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        std::ifstream in(config_path);
        if (!in) {
            throw sfi::ConfigError("cannot read config '" + config_path + "'");
        }
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw sfi::ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        auto cfg = sfi::config_from_json(j);
        if (*seed_opt) {
            cfg.seed = seed;
            cfg.pipeline.seed = seed;
        }
        if (trials >= 0) {
            cfg.trials = trials;
        }
        if (!out_dir.empty()) {
            cfg.out_dir = out_dir;
        }
        if (!stage.empty()) {
            cfg.stage = stage;
        }
        if (cfg.out_dir.empty()) {
            cfg.out_dir = "results";
        }

        if (!sweep.empty()) {
            const auto ks = parse_k_list(sweep);
            sfi::ensure_writable_dir(cfg.out_dir);
            sfi::SweepTable tab;
            try {
                tab = sfi::scaling_sweep(cfg, ks);
            } catch (const sfi::InvalidInput& e) {
                throw sfi::ConfigError(e.what());
            }
            sfi::write_sweep_reports(cfg.out_dir, tab);
            if (plots) {
                sfi::write_sweep_plot(cfg.out_dir, tab);
            }
            std::printf("k,queries_freq,queries_signal,queries_total\n");
            for (const auto& r : tab.rows) {
                std::printf("%d,%.0f,%.0f,%.0f\n", r.k, r.queries_freq, r.queries_signal, r.queries_total);
            }
            std::printf("slope_freq=%.4f slope_signal=%.4f slope_total=%.4f\n", tab.slope_freq, tab.slope_signal,
                        tab.slope_total);
            return 0;
        }

        const auto recs = sfi::run_experiment(cfg);
        if (plots) {
            sfi::write_trial_plots(cfg.out_dir, recs);
        }
        std::size_t ok = 0;
        for (const auto& r : recs) {
            ok += r.error <= 10.0 * (r.noise_norm + cfg.pipeline.delta * r.signal_norm) ? 1 : 0;
        }
        std::printf("trials=%zu within_bound=%zu out=%s\n", recs.size(), cfg.stage == "full" ? ok : 0,
                    cfg.out_dir.c_str());
        return 0;
    } catch (const sfi::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const sfi::InvalidInput& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const sfi::NumericFailure& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return kExitNumeric;
    } catch (const sfi::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 1;
    }
}
