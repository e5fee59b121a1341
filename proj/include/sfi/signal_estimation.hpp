#pragma once

#include <random>
#include <span>
#include <vector>

#include "sfi/frequency_estimation.hpp"
#include "sfi/signal.hpp"

namespace sfi {

/// sum_j P_j(tau) e^{2 pi i f_j t} with tau = 2t/T - 1. coeffs[j][n] is the
/// coefficient of tau^n. In t, P_j(t) = sum_n coeffs[j][n] (2t/T - 1)^n.
struct MixedPolySignal {
    std::vector<double> freqs;
    int d = 0;
    double T = 1.0;
    std::vector<std::vector<cplx>> coeffs;
};

struct SketchPlan {
    std::vector<double> times;
    std::vector<double> weights;
    std::vector<double> dprime;
};

SketchPlan weighted_sketch(int m, double k_eff, double T, std::mt19937_64& rng);

/// Keeps the first of any frequencies closer than tol.
std::vector<double> dedup_frequencies(const std::vector<double>& freqs, double tol);

/// Default degree min(64, ceil(T Delta) + 4k).
int default_degree(double T, double Delta, int k);

struct SignalEstimationKnobs {
    double c_m = 2.0;               // s = ceil(c_m p log2(p+1)), p unknowns
    double svd_threshold = 1e-10;
};

/// Number of oracle samples signal_estimation draws for p unknowns.
int signal_estimation_samples(int p, double c_m);

MixedPolySignal signal_estimation(const SampleOracle& oracle, const std::vector<double>& freqs, int d, double T,
                                  std::mt19937_64& rng, const SignalEstimationKnobs& knobs = {});

std::vector<cplx> mixed_poly_eval(const MixedPolySignal& sig, std::span<const double> times);
cplx mixed_poly_eval(const MixedPolySignal& sig, double t);

/// Power-basis coefficients of the Chebyshev polynomials T_0..T_d:
/// row n holds T_n.
std::vector<std::vector<double>> chebyshev_monomials(int d);

/// Replaces each P_j by deg(P_j)+1 nearby tones whose sum is within eps of
/// P_j(t) e^{2 pi i f_j t} at the fitting nodes.
SparseSignal poly_to_fourier(const MixedPolySignal& sig, double T, double eps);

} // namespace sfi
