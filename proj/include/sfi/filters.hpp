#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sfi/signal.hpp"

namespace sfi {

/// Unnormalized sinc: sin(x)/x, with sinc(0) = 1.
double sinc(double x);

// ---------------------------------------------------------------------------
// Time-domain filter H
// ---------------------------------------------------------------------------

struct FilterHKnobs {
    double c_R = 1.0;               // R = S = next_pow2(c_R * k^2)
    int min_RS = 4;                 // floor for R and S
    std::size_t table_intervals = 16384;
    int panels_per_lobe = 16;       // quadrature panels per pi/(C0 R)
};

struct FilterH {
    int k = 1;
    int R = 4;
    int S = 4;
    int C = 2;
    double C0 = kPi;
    double alpha_h = 0.5;
    double s0 = 1.0;
    double T = 1.0;
    double delta1 = 0.1;
    double dh = 0.0;                // |supp(H^)| in Hz
    double t_lo = 0.0;              // table covers [t_lo, t_hi] = [-T/4, 5T/4]
    double t_hi = 0.0;
    double step = 0.0;
    std::vector<double> table;      // H at the nodes
    std::vector<double> slope;      // dH/dt at the nodes

    /// Half width (in y = alpha_h*(2t/T-1)) of the region where H >= 1 - delta1.
    double flat_halfwidth() const;
    /// Map between t and y = alpha_h*(2t/T - 1).
    double to_y(double t) const { return alpha_h * (2.0 * t / T - 1.0); }
    double from_y(double y) const { return 0.5 * T * (y / alpha_h + 1.0); }
};

FilterH build_filter_h(int k, double delta1, double T, const FilterHKnobs& knobs = {});

/// Cubic Hermite interpolation of the table; 0 outside [-T/4, 5T/4].
double eval_h(const FilterH& h, double t);

/// The integrand of H_1: the product of sinc powers at tau (y units).
double h_kernel(const FilterH& h, double tau);

/// Upper bound pi*C*R*sqrt(2C log2 R) on s0.
double h_s0_bound(const FilterH& h);

/// Binary cache for the H table. Layout: 8-byte magic, a fixed header of
/// parameters, then table and slope arrays as little-endian f64.
void save_filter_h(const FilterH& h, const std::string& path);
FilterH load_filter_h(const std::string& path);

// ---------------------------------------------------------------------------
// Frequency-domain filter G
// ---------------------------------------------------------------------------
//
// Bin units: u is the hashed frequency sigma*(f+b) measured in turns, so bin
// j sits at u = j/B. In these units
//   G^(u) = b0 * integral_{u-w/2}^{u+w/2} sinc(pi*a*v)^l dv
//   G(t)  = b0 * w * sinc(pi*w*t) * N(t)
// where N is the unit-area B-spline built from l boxes of width a.
// Passband |u| <= 1/(2B), stopband |u| >= 1/(2B(1-alpha_g)).

struct FilterGKnobs {
    double c_l = 0.5;           // l starts at ceil(c_l*log2(k/delta)), rounded up to even
    double alpha_g = 0.5;
    double edge_margin = kPi;   // sinc argument at the band edges
    int l_override = 0;         // force l when > 0
};

struct FilterG {
    int B = 2;
    int l = 2;
    int k = 1;
    double delta = 0.01;
    double alpha_g = 0.5;
    double edge_margin = kPi;
    double a = 1.0;             // box width of the B-spline
    double w = 1.0;             // rect width in u
    double b0 = 1.0;
    double support_half = 1.0;  // supp(G) = [-support_half, support_half]
    int m_max = 0;              // integer samples cover |m| <= m_max
    std::vector<double> samples;  // G(m), index m + m_max

    // cumulative integral of sinc^l at multiples of phi_step
    double phi_step = 0.0;
    std::vector<double> phi_cum;
    double phi_inf = 0.0;

    double sample(int m) const { return samples[static_cast<std::size_t>(m + m_max)]; }
    double pass_edge() const { return 0.5 / B; }
    double stop_edge() const { return 0.5 / (B * (1.0 - alpha_g)); }
    /// Number of integer points where G is nonzero.
    std::size_t support_points() const { return samples.size(); }
    double tolerance() const { return delta / k; }
};

/// Smallest even order whose one-sided sinc^l tail beyond edge_margin is at
/// most delta/(2k) of the total, starting from ceil(c_l*log2(k/delta)).
int choose_g_order(int k, double delta, double c_l, double edge_margin);

/// integral_{x0}^inf sinc^l / integral_0^inf sinc^l.
double sinc_power_tail_fraction(int l, double x0);

FilterG build_filter_g(int k, double delta, int B, const FilterGKnobs& knobs = {});

/// Cardinal B-spline of order l (l unit boxes convolved), supported on [0,l].
double cardinal_bspline(int l, double x);

double eval_g_time(const FilterG& g, double t);

/// G^ in bin units.
double eval_g_u(const FilterG& g, double u);

/// G^ as a function of angular frequency: eval_g_u(f / (2 pi (1-alpha_g))).
double eval_g_hat(const FilterG& g, double f);

/// Per-bin filter sum_i G^(sigma f + sigma b - i - j/B).
double eval_g_bin_hat(const FilterG& g, double sigma, double b, int j, double f);

/// Signed offset of sigma*(f+b) - j/B reduced into [-1/2, 1/2).
double bin_offset(double sigma, double b, int j, int B, double f);

} // namespace sfi
