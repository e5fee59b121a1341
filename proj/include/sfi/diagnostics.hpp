#pragma once

#include <vector>

#include "sfi/filters.hpp"
#include "sfi/hashing.hpp"
#include "sfi/signal.hpp"

namespace sfi {

/// Tabulated H^ for spectral diagnostics. H is symmetric about T/2, so
/// H^(xi) = e^{-2 pi i xi T/2} Hc(xi) with Hc real and even.
struct HSpectrum {
    double T = 1.0;
    double half_width = 0.0;   // dh/2
    double step = 0.0;
    std::vector<double> table; // Hc at xi = i*step, i = 0..n

    double eval_c(double xi) const;
    cplx eval(double xi) const;
};

HSpectrum build_h_spectrum(const FilterH& h, std::size_t points = 8192);

struct DiagContext {
    const FilterH* h = nullptr;
    const FilterG* g = nullptr;
    HSpectrum hs;
    double f_step = 0.0;  // spectral lattice spacing
};

DiagContext make_diag_context(const FilterH& h, const FilterG& g);

struct BinLabel {
    int bin = 0;
    bool heavy = false;
    bool high_snr = false;
    bool well_isolated = false;
    bool large_offset = false;
};

/// (x H)^ on a spectral lattice covering every tone's H^ support.
struct SpectralSamples {
    std::vector<double> f;
    std::vector<cplx> v;
    double step = 0.0;
};

SpectralSamples windowed_spectrum(const DiagContext& ctx, const SparseSignal& x);

/// (x H)^ * G^(j) on the same lattice.
SpectralSamples bin_spectrum(const DiagContext& ctx, const SparseSignal& x, const HashParams& p, int j);

bool heavy_frequency(const DiagContext& ctx, const SparseSignal& xstar, double f, double noise_level_sq, int k,
                     double T);

/// Energy of (x H)^ within [f - dh, f + dh].
double cluster_energy(const DiagContext& ctx, const SparseSignal& xstar, double f);

/// ||z||_T^2 for z = (y H) * G^(j), y an arbitrary function of time,
/// measured on a uniform grid of n points over [0,T].
double filtered_norm_sq(const std::function<cplx(double)>& y, const FilterH& h, const FilterG& g,
                        const HashParams& p, int j, std::size_t n);

bool high_snr_bin(const SparseSignal& xstar, const NoiseModel& noise, const FilterH& h, const FilterG& g,
                  const HashParams& p, int j, double c_snr = 0.001, std::size_t n = 1024);

bool large_offset(const std::vector<double>& freqs, const FilterH& h, const FilterG& g, const HashParams& p);

/// Energy of the bin spectrum outside [fstar - Delta, fstar + Delta].
double off_band_energy(const DiagContext& ctx, const SparseSignal& x, const HashParams& p, double fstar,
                       double Delta);

bool well_isolated(const DiagContext& ctx, const SparseSignal& x, const HashParams& p, double fstar,
                   double Delta, double eps, double noise_level_sq, int k, double c_iso = 1.0);

int ideal_filter_value(const FilterG& g, const HashParams& p, int j, double f, double delta1);

double energy_bound_ratio(const SparseSignal& x, double T, std::size_t n = 0);

/// integral over R of |z|^2 divided by integral over [0,T], z the bin signal.
double time_concentration_ratio(const DiagContext& ctx, const SparseSignal& x, const HashParams& p, int j);

/// Fraction of the bin's spectral energy within [fstar - Delta, fstar + Delta].
double in_band_fraction(const DiagContext& ctx, const SparseSignal& x, const HashParams& p, int j, double fstar,
                        double Delta);

} // namespace sfi
