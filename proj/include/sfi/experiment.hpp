#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfi/diagnostics.hpp"
#include "sfi/pipeline.hpp"

namespace sfi {

inline constexpr int kSchemaVersion = 1;

enum class AmplitudeLaw { unit, gaussian, uniform };

struct InstanceSpec {
    int k = 2;
    double F = 1000.0;
    double T = 1.0;
    // Pairwise gaps are at least gap_multiple * Delta0 (the hashing scale);
    // hard mode drops the floor.
    double gap_multiple = 2.0;
    bool hard = false;
    AmplitudeLaw amplitude = AmplitudeLaw::unit;
};

struct LabelKnobs {
    double c_snr = 0.001;
    double iso_eps = 1.0;
    double c_iso = 1.0;
    double iso_delta = 0.0;     // isolation half width; 0 = k * dh
    std::size_t snr_grid = 1024;
};

struct ExperimentConfig {
    InstanceSpec instance;
    LabelKnobs label_knobs;
    NoiseSpec noise;
    PipelineConfig pipeline;
    int trials = 10;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string stage = "full";   // "full" or "freq"
    bool labels = true;
};

struct ToneLabel {
    double freq = 0.0;
    BinLabel label;
    bool recovered = false;        // an estimate within 10 * delta_res (freq stage)
};

struct TrialRecord {
    int index = 0;
    std::uint64_t seed = 0;
    std::vector<ToneLabel> tones;
    std::uint64_t queries_freq = 0;
    std::uint64_t queries_signal = 0;
    std::uint64_t queries_total = 0;
    std::size_t output_sparsity = 0;
    std::size_t freq_list_size = 0;
    int failed_runs = 0;           // runs dropped for a failed tone conversion
    double error = 0.0;            // ||y - x*||_T (full stage)
    double rel_error = 0.0;
    double noise_norm = 0.0;       // ||g||_T
    double signal_norm = 0.0;      // ||x*||_T
    double time_freq = 0.0;
    double time_signal = 0.0;
    double time_merge = 0.0;
};

/// Draws k frequencies in [-F, F] with pairwise gaps >= gap and amplitudes per law.
SparseSignal draw_instance(const InstanceSpec& spec, double gap, std::mt19937_64& rng);

std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg);

struct SweepRow {
    int k = 0;
    double queries_freq = 0.0;     // medians over trials
    double queries_signal = 0.0;
    double queries_total = 0.0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    double slope_freq = 0.0;
    double slope_signal = 0.0;
    double slope_total = 0.0;
};

SweepTable scaling_sweep(const ExperimentConfig& base, const std::vector<int>& k_list);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

nlohmann::json trials_to_json(const ExperimentConfig& cfg, const std::vector<TrialRecord>& trials);
std::string trials_to_csv(const std::vector<TrialRecord>& trials);
std::string timings_to_csv(const std::vector<TrialRecord>& trials);
nlohmann::json sweep_to_json(const SweepTable& t);
std::string sweep_to_csv(const SweepTable& t);

nlohmann::json report_schema(const std::string& kind);

/// Checks a report document against the published schema; returns problems found.
std::vector<std::string> validate_report(const nlohmann::json& report);

/// Creates out_dir if needed and checks it is writable.
void ensure_writable_dir(const std::string& dir);

void write_text(const std::string& path, const std::string& text);

void write_sweep_reports(const std::string& dir, const SweepTable& t);
void write_trial_plots(const std::string& dir, const std::vector<TrialRecord>& trials);
void write_sweep_plot(const std::string& dir, const SweepTable& t);

/// Minimal static SVG plot.
std::string svg_scatter(const std::vector<double>& x, const std::vector<double>& y, const std::string& xlabel,
                        const std::string& ylabel, bool logx, bool logy);

} // namespace sfi
