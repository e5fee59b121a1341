#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "sfi/filters.hpp"
#include "sfi/frequency_estimation.hpp"
#include "sfi/hashing.hpp"
#include "sfi/signal_estimation.hpp"

namespace sfi {

struct PipelineConfig {
    int k = 2;
    double F = 1000.0;
    double T = 1.0;
    double delta = 0.01;
    double delta1 = 0.0;        // 0 = delta/k
    double rho = 0.05;

    FilterHKnobs h;
    FilterGKnobs g;
    double c_B = 8.0;           // B = next_pow2(c_B k) unless B > 0
    int B = 0;
    double hash_delta = 0.0;    // hashing scale Delta0; 0 = max(4F/(B-2), c_foot l / T)
    double c_foot = 20.0;
    SigmaRange sigma_range = SigmaRange::standard;
    double delta_res = 0.0;     // search resolution; 0 = 1/T
    SearchConfig search;
    double merge_radius = 0.0;  // list entries closer than this are one tone; 0 = 2 delta_res
    int degree = -1;            // -1 = min(64, ceil(T delta_res) + 4k)
    SignalEstimationKnobs se;
    double conv_eps = 1e-6;     // relative accuracy of the polynomial-to-tone conversion
    double merge_factor = 2.0;  // sketch dimension multiplier in the merge step
    double merge_c = 1.0;       // sketch size constant
    std::uint64_t seed = 0;
};

/// All derived quantities resolved from a config.
struct ResolvedPipeline {
    PipelineConfig cfg;
    FilterH h;
    FilterG g;
    int B = 0;
    double hash_delta = 0.0;
    double delta_res = 0.0;
    double merge_radius = 0.0;
    int degree = 0;
    SearchConfig search;
    int R_p = 1;
};

ResolvedPipeline resolve_pipeline(const PipelineConfig& cfg);

struct RunResult {
    SparseSignal y;
    HashParams p;
    FrequencyList freqs;
    std::uint64_t queries_freq = 0;
    std::uint64_t queries_signal = 0;
    double time_freq = 0.0;
    double time_signal = 0.0;
    double conv_eps_used = 0.0;  // relative accuracy the conversion reached
    bool conversion_failed = false;
};

RunResult constant_prob_run(const SampleOracle& oracle, const ResolvedPipeline& rp, std::mt19937_64& rng);

SparseSignal constant_prob_interpolate(const SampleOracle& oracle, const PipelineConfig& cfg);

struct MergeResult {
    std::size_t chosen = 0;
    std::vector<std::vector<double>> distances;
    std::vector<double> medians;
};

/// Min-of-median selection; distances are sketched from the candidates
/// themselves, never from samples.
MergeResult merge_signals_detail(const std::vector<SparseSignal>& candidates, double T, double rho,
                                 double merge_factor, double merge_c, std::mt19937_64& rng);

SparseSignal merge_signals(const std::vector<SparseSignal>& candidates, double T, const PipelineConfig& cfg,
                           std::mt19937_64& rng);

struct RecoveryReport {
    SparseSignal output;
    int runs = 0;
    std::size_t chosen = 0;  // run index
    std::vector<int> failed_runs;  // conversion failed; left out of the merge
    std::vector<std::uint64_t> run_queries_freq;
    std::vector<std::uint64_t> run_queries_signal;
    std::vector<std::size_t> run_freq_counts;
    std::vector<HashParams> run_params;
    std::vector<FrequencyList> run_freqs;
    std::uint64_t queries_freq = 0;
    std::uint64_t queries_signal = 0;
    std::uint64_t queries_total = 0;
    double time_freq = 0.0;
    double time_signal = 0.0;
    double time_merge = 0.0;
    std::optional<double> error;        // ||y - x*||_T, filled by a harness
    std::optional<double> noise_norm;   // ||g||_T, filled by a harness
};

RecoveryReport high_prob_interpolate(const SampleOracle& oracle, const PipelineConfig& cfg);
RecoveryReport high_prob_interpolate(const SampleOracle& oracle, const ResolvedPipeline& rp);

/// Single-linkage clusters of sorted frequencies (gap < radius), each replaced
/// by its mean.
std::vector<double> cluster_frequencies(std::vector<double> freqs, double radius);

int boost_rounds(double rho);

/// Seed for an independent stream derived from (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

int next_pow2_int(double x);

} // namespace sfi
