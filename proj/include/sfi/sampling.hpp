#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "sfi/signal.hpp"

namespace sfi {

struct Interval {
    double L = 0.0;
    double R = 0.0;
    double length() const { return R - L; }
};

enum class DistKind { full, restricted };

/// Density c/((1-|t|/T) T) in the bulk |t| <= T(1-1/k) and c k/T on the edge
/// bands, in coordinates centered at `center`. Restricted distributions keep
/// the same shape on U and renormalize.
struct TimeDistribution {
    DistKind kind = DistKind::full;
    double k = 2.0;
    double T = 1.0;          // half window
    double center = 0.0;
    std::optional<Interval> U;  // centered coordinates
    double c = 0.0;

    double lo() const { return U ? U->L : -T; }
    double hi() const { return U ? U->R : T; }
    /// Length of the window the weights normalize against.
    double window() const { return hi() - lo(); }
    /// Density at an absolute time (center added back).
    double density(double t) const;
    double cdf(double t) const;
    double inv_cdf(double p) const;
};

TimeDistribution build_dist(double k, double T, std::optional<Interval> U = std::nullopt);

/// The same distribution laid over [0, T_obs]: half window T_obs/2, centered at
/// T_obs/2. U is given in observation coordinates.
TimeDistribution build_window_dist(double k, double T_obs, std::optional<Interval> U_obs = std::nullopt);

struct WeightedSampleSet {
    std::vector<double> times;
    std::vector<double> weights;
    TimeDistribution source;
};

WeightedSampleSet draw_weighted(const TimeDistribution& dist, int s, std::mt19937_64& rng);

double weighted_norm_sq(std::span<const cplx> values, std::span<const double> w);

} // namespace sfi
