#pragma once

#include <random>
#include <vector>

#include "sfi/filters.hpp"
#include "sfi/hashing.hpp"
#include "sfi/sampling.hpp"

namespace sfi {

struct GoodIntervalU {
    double L = 0.0;
    double R = 0.0;
};

/// Times t0 with H > 1 - delta1 on all of [t0, t0 + beta].
GoodIntervalU compute_good_interval(const FilterH& h, double beta);

/// Largest k for which D restricted to U keeps the nesting
/// [-T'(1-1/k), T'(1-1/k)] within U (T' = T/2), capped at k.
double nesting_k(const GoodIntervalU& U, double T, double k);

struct BinPair {
    cplx za{0.0, 0.0};
    cplx zab{0.0, 0.0};
    double alpha = 0.0;
    bool degenerate = true;
};

struct SignificantSampleBatch {
    std::vector<BinPair> bins;
    double beta = 0.0;
};

SignificantSampleBatch generate_significant_samples(const SampleOracle& oracle, const FilterH& h,
                                                    const FilterG& g, const HashParams& p, double beta, int s,
                                                    std::mt19937_64& rng);

/// Default first-level sample count ceil(c_s k log2 k), at least 1.
int default_significant_s(int k, double c_s = 8.0);

} // namespace sfi
