#pragma once

#include <random>
#include <vector>

#include "sfi/filters.hpp"
#include "sfi/signal.hpp"

namespace sfi {

enum class SigmaRange {
    standard,   // [1/(B D0), 2/(B D0)]
    collision,  // [1/(4 B D0), 1/(2 B D0)]
};

struct HashParams {
    double sigma = 1.0;
    double b = 0.0;
    int B = 2;
};

struct BinVector {
    std::vector<cplx> values;
    double time = 0.0;  // sigma * a
};

HashParams draw_hash_params(double delta0, int B, double F, std::mt19937_64& rng,
                            SigmaRange range = SigmaRange::standard);

/// round-half-away-from-zero of frac(sigma (f+b)) * B, reduced mod B.
int hash_bin(const HashParams& p, double f);

/// Filtered values z_j(sigma a) for all bins, from samples of oracle * H.
BinVector hash_to_bins(const SampleOracle& oracle, const FilterH& h, const FilterG& g, const HashParams& p,
                       double a);

/// Same transform on an arbitrary function (no query accounting).
BinVector hash_to_bins_fn(const std::function<cplx(double)>& x, const FilterH& h, const FilterG& g,
                          const HashParams& p, double a);

} // namespace sfi
