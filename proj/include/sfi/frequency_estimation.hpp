#pragma once

#include <optional>
#include <random>
#include <vector>

#include "sfi/filters.hpp"
#include "sfi/hashing.hpp"
#include "sfi/significant_samples.hpp"

namespace sfi {

struct SearchConfig {
    int num = 8;            // arity
    int D_iters = 0;        // 0 = derive from F and Delta
    int R_votes = 24;
    double c_beta = 0.01;   // beta in [c/2, c] * num / len
    int s = 0;              // first-level samples per round; 0 = default for k
};

/// The search starts on [-W, W] with W = F (1 + 2/num): one sub-interval of
/// slack per side, so tones at the band edge keep votes that noise pushes out.
double search_half_width(double F, int num);

/// D = ceil(log(2W/(num Delta)) / log(num/5)), at least 1.
int search_iterations(double F, double Delta, int num);

/// Fills D_iters (from F, Delta) and s (from k) when left at 0.
SearchConfig resolve_search(const SearchConfig& cfg, double F, double Delta, int k);

/// len_d for 0-based iteration d: 2W (5/num)^d.
double search_length(double F, int num, int d);

struct TensorEntry {
    cplx za{0.0, 0.0};
    cplx zab{0.0, 0.0};
    bool degenerate = true;
};

struct SampleTensor {
    int D = 0;
    int R = 0;
    int B = 0;
    std::vector<double> beta;            // D*R
    std::vector<TensorEntry> entries;    // D*R*B

    double beta_at(int d, int r) const { return beta[static_cast<std::size_t>(d * R + r)]; }
    const TensorEntry& at(int d, int r, int j) const {
        return entries[static_cast<std::size_t>((d * R + r) * B + j)];
    }
    TensorEntry& at(int d, int r, int j) { return entries[static_cast<std::size_t>((d * R + r) * B + j)]; }
};

SampleTensor precompute_samples(const SampleOracle& oracle, const FilterH& h, const FilterG& g,
                                const HashParams& p, double F, double T, const SearchConfig& cfg,
                                std::mt19937_64& rng);

/// Frequencies consistent with the phase of zab/za, for s in
/// [beta L - 10, beta (L+len) + 10].
std::vector<double> theta_candidates(cplx za, cplx zab, double beta, double L, double len);

struct AryResult {
    bool ok = false;
    double new_left = 0.0;
    int q = -1;
    int rounds_used = 0;
    std::vector<int> votes;
};

AryResult ary_search(const SampleTensor& tensor, int d, int j, double L, double len, const SearchConfig& cfg);

struct SearchTrace {
    std::vector<double> lefts;
    std::vector<double> lengths;
    std::vector<AryResult> steps;
};

/// Median over last-level rounds of the phase candidate nearest the window
/// center; the window center when fewer than half the rounds land inside.
double refine_in_window(const SampleTensor& tensor, int j, double L, double len);

std::optional<double> frequency_estimation_z(const SampleTensor& tensor, int j, double F, double T, double Delta,
                                             const SearchConfig& cfg, SearchTrace* trace = nullptr);

struct FrequencyEntry {
    int bin = 0;
    double freq = 0.0;
};

struct FrequencyList {
    std::vector<FrequencyEntry> entries;
};

FrequencyList frequency_estimation_x(const SampleOracle& oracle, const FilterH& h, const FilterG& g,
                                     const HashParams& p, double F, double T, double Delta,
                                     const SearchConfig& cfg, std::mt19937_64& rng);

} // namespace sfi
