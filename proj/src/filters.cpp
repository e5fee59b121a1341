#include "sfi/filters.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "sfi/errors.hpp"

namespace sfi {

namespace {

using GL16 = boost::math::quadrature::gauss<double, 16>;
using GL8 = boost::math::quadrature::gauss<double, 8>;

int next_pow2(double x) {
    int p = 1;
    while (p < x) {
        p *= 2;
    }
    return p;
}

int ilog2(int n) {
    int r = 0;
    while ((1 << (r + 1)) <= n) {
        ++r;
    }
    return r;
}

double ipow(double x, int n) {
    double r = 1.0;
    while (n > 0) {
        if (n & 1) {
            r *= x;
        }
        x *= x;
        n >>= 1;
    }
    return r;
}

// Cumulative panel integrals of an even integrand on [0, xmax].
// Returns cum[p] = integral over [0, p*hp]. Throws when the 8 and 16 point
// rules disagree on a panel.
template <class Fn>
std::vector<double> cumulative_panels(Fn&& fn, double hp, double xmax, const char* what) {
    const std::size_t np = static_cast<std::size_t>(std::ceil(xmax / hp)) + 1;
    std::vector<double> cum(np + 1, 0.0);
    double total = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
        const double lo = hp * static_cast<double>(p);
        const double hi = lo + hp;
        const double i16 = GL16::integrate(fn, lo, hi);
        const double i8 = GL8::integrate(fn, lo, hi);
        total += i16;
        if (std::abs(i16 - i8) > 1e-10 * std::abs(total) + 1e-15 * hp) {
            std::ostringstream os;
            os << what << ": quadrature did not converge on panel [" << lo << ", " << hi
               << "], 16-point " << i16 << " vs 8-point " << i8;
            throw NumericFailure(os.str());
        }
        cum[p + 1] = total;
    }
    return cum;
}

// integral_0^x of an even integrand from its cumulative panel table.
template <class Fn>
double cumulative_eval(Fn&& fn, const std::vector<double>& cum, double hp, double x, double tail_value) {
    const double ax = std::abs(x);
    const double sgn = x < 0.0 ? -1.0 : 1.0;
    const std::size_t p = static_cast<std::size_t>(ax / hp);
    if (p + 1 >= cum.size()) {
        return sgn * tail_value;
    }
    const double lo = hp * static_cast<double>(p);
    double v = cum[p];
    if (ax > lo) {
        v += GL16::integrate(fn, lo, ax);
    }
    return sgn * v;
}

} // namespace

double sinc(double x) {
    if (std::abs(x) < 1e-8) {
        return 1.0 - x * x / 6.0;
    }
    return std::sin(x) / x;
}

// ---------------------------------------------------------------------------
// H
// ---------------------------------------------------------------------------

double h_kernel(const FilterH& h, double tau) {
    const int logR = ilog2(h.R);
    const int logS = ilog2(h.S);
    double v = ipow(sinc(h.C0 * h.R * tau), h.C * logR);
    if (v == 0.0) {
        return 0.0;
    }
    for (int i = 0; i <= logS; ++i) {
        const double arg = h.C0 * static_cast<double>(h.S) * tau / static_cast<double>(1 << i);
        v *= ipow(sinc(arg), (1 << i) * h.C);
        if (v == 0.0) {
            return 0.0;
        }
    }
    return v;
}

double FilterH::flat_halfwidth() const {
    return 0.5 - kPi / (C0 * R);
}

double h_s0_bound(const FilterH& h) {
    return kPi * h.C * h.R * std::sqrt(2.0 * h.C * std::log2(static_cast<double>(h.R)));
}

FilterH build_filter_h(int k, double delta1, double T, const FilterHKnobs& knobs) {
    if (k < 1) {
        throw InvalidInput("build_filter_h: k must be at least 1");
    }
    if (!(delta1 > 0.0 && delta1 < 0.5)) {
        throw InvalidInput("build_filter_h: delta1 must lie in (0, 1/2)");
    }
    if (!(T > 0.0)) {
        throw InvalidInput("build_filter_h: T must be positive");
    }
    if (knobs.table_intervals < 16 || knobs.panels_per_lobe < 1) {
        throw InvalidInput("build_filter_h: table and quadrature sizes too small");
    }
    FilterH h;
    h.k = k;
    h.T = T;
    h.delta1 = delta1;
    h.R = std::max(knobs.min_RS, next_pow2(knobs.c_R * k * k));
    h.S = h.R;
    h.C = static_cast<int>(std::ceil(std::log2(1.0 / delta1)));
    if (h.C % 2 != 0) {
        ++h.C;
    }
    h.C = std::max(h.C, 2);
    h.C0 = kPi * std::ceil(h.C / kPi);
    h.alpha_h = 0.5 + 1.2 / (kPi * h.C0 * h.R);

    const double logR = std::log2(static_cast<double>(h.R));
    const double logS = std::log2(static_cast<double>(h.S));
    h.dh = (2.0 * h.alpha_h / T) * (h.C0 * h.C / kPi) * (h.R * logR + h.S * (logS + 1.0));

    h.t_lo = -0.25 * T;
    h.t_hi = 1.25 * T;
    const std::size_t n = knobs.table_intervals;
    h.step = (h.t_hi - h.t_lo) / static_cast<double>(n);

    const double hp = kPi / (h.C0 * h.R) / knobs.panels_per_lobe;
    const double ymax = std::abs(h.to_y(h.t_hi));
    auto kern = [&h](double x) { return h_kernel(h, x); };
    const auto cum = cumulative_panels(kern, hp, ymax + 0.5 + hp, "build_filter_h");
    const double phi_end = cum.back();
    auto phi = [&](double x) { return cumulative_eval(kern, cum, hp, x, phi_end); };

    const double half = phi(0.5);
    if (!(half > 0.0)) {
        throw NumericFailure("build_filter_h: vanishing normalization integral");
    }
    h.s0 = 1.0 / (2.0 * half);

    h.table.assign(n + 1, 0.0);
    h.slope.assign(n + 1, 0.0);
    const double dydt = 2.0 * h.alpha_h / T;
    // H is symmetric about T/2; fill the left half and mirror.
    for (std::size_t i = 0; i <= n / 2; ++i) {
        const double t = h.t_lo + h.step * static_cast<double>(i);
        const double y = h.to_y(t);
        const double val = h.s0 * (phi(y + 0.5) - phi(y - 0.5));
        const double der = h.s0 * (h_kernel(h, y + 0.5) - h_kernel(h, y - 0.5)) * dydt;
        h.table[i] = val;
        h.slope[i] = der;
        h.table[n - i] = val;
        h.slope[n - i] = -der;
    }
    if (n % 2 == 0) {
        h.slope[n / 2] = 0.0;
    }
    return h;
}

double eval_h(const FilterH& h, double t) {
    if (!(t >= h.t_lo && t <= h.t_hi)) {
        return 0.0;
    }
    const double s = (t - h.t_lo) / h.step;
    const std::size_t n = h.table.size() - 1;
    std::size_t i = static_cast<std::size_t>(s);
    if (i >= n) {
        i = n - 1;
    }
    const double x = s - static_cast<double>(i);
    const double y0 = h.table[i];
    const double y1 = h.table[i + 1];
    const double m0 = h.slope[i] * h.step;
    const double m1 = h.slope[i + 1] * h.step;
    const double x2 = x * x;
    const double x3 = x2 * x;
    return (2 * x3 - 3 * x2 + 1) * y0 + (x3 - 2 * x2 + x) * m0 + (-2 * x3 + 3 * x2) * y1 + (x3 - x2) * m1;
}

namespace {

constexpr char kHMagic[8] = {'S', 'F', 'I', 'H', 'T', 'B', 'L', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) {
        throw InvalidInput("load_filter_h: truncated file");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    return v;
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

} // namespace

void save_filter_h(const FilterH& h, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw InvalidInput("save_filter_h: cannot open " + path);
    }
    os.write(kHMagic, 8);
    for (std::int64_t v : {std::int64_t(h.k), std::int64_t(h.R), std::int64_t(h.S), std::int64_t(h.C),
                           std::int64_t(h.table.size())}) {
        put_u64(os, static_cast<std::uint64_t>(v));
    }
    for (double v : {h.C0, h.alpha_h, h.s0, h.T, h.delta1, h.dh, h.t_lo, h.t_hi, h.step}) {
        put_f64(os, v);
    }
    for (double v : h.table) {
        put_f64(os, v);
    }
    for (double v : h.slope) {
        put_f64(os, v);
    }
    if (!os) {
        throw InvalidInput("save_filter_h: write failed for " + path);
    }
}

FilterH load_filter_h(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw InvalidInput("load_filter_h: cannot open " + path);
    }
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kHMagic, 8) != 0) {
        throw InvalidInput("load_filter_h: bad magic in " + path);
    }
    FilterH h;
    h.k = static_cast<int>(get_u64(is));
    h.R = static_cast<int>(get_u64(is));
    h.S = static_cast<int>(get_u64(is));
    h.C = static_cast<int>(get_u64(is));
    const std::size_t n = get_u64(is);
    if (n < 2 || n > (std::size_t(1) << 28)) {
        throw InvalidInput("load_filter_h: implausible table size");
    }
    for (double* p : {&h.C0, &h.alpha_h, &h.s0, &h.T, &h.delta1, &h.dh, &h.t_lo, &h.t_hi, &h.step}) {
        *p = get_f64(is);
    }
    h.table.resize(n);
    h.slope.resize(n);
    for (auto& v : h.table) {
        v = get_f64(is);
    }
    for (auto& v : h.slope) {
        v = get_f64(is);
    }
    return h;
}

// ---------------------------------------------------------------------------
// G
// ---------------------------------------------------------------------------

double sinc_power_tail_fraction(int l, double x0) {
    auto fn = [l](double x) { return ipow(sinc(x), l); };
    // Integrate to a whole number of lobes past x0, then add the far tail in
    // closed form: sin^l averages to binom(l, l/2)/2^l for even l, and odd
    // powers cancel.
    const double xmax = kPi * std::ceil((std::max(x0, 0.0) + 4096.0) / kPi);
    const double hp = kPi / 8.0;
    double head = 0.0;
    double tail = 0.0;
    double x = 0.0;
    while (x < xmax) {
        const double hi = std::min(x + hp, xmax);
        if (hi <= x0) {
            head += GL16::integrate(fn, x, hi);
        } else if (x >= x0) {
            tail += GL16::integrate(fn, x, hi);
        } else {
            head += GL16::integrate(fn, x, x0);
            tail += GL16::integrate(fn, x0, hi);
        }
        x = hi;
    }
    if (l % 2 == 0) {
        double mean = 1.0;
        for (int i = 0; i < l / 2; ++i) {
            mean *= static_cast<double>(l - i) / static_cast<double>(l / 2 - i) * 0.25;
        }
        tail += mean * std::pow(xmax, 1.0 - l) / (l - 1);
    }
    return tail / (head + tail);
}

int choose_g_order(int k, double delta, double c_l, double edge_margin) {
    int l = static_cast<int>(std::ceil(c_l * std::log2(std::max(2.0, k / delta))));
    l = std::max(l, 2);
    if (l % 2 != 0) {
        ++l;
    }
    const double target = delta / (2.0 * k);
    while (sinc_power_tail_fraction(l, edge_margin) > target) {
        l += 2;
        if (l > 200) {
            throw NumericFailure("choose_g_order: no order meets the tail target");
        }
    }
    return l;
}

double cardinal_bspline(int l, double x) {
    if (l < 1) {
        throw InvalidInput("cardinal_bspline: order must be positive");
    }
    if (!(x > 0.0 && x < l)) {
        return 0.0;
    }
    // Symmetric about l/2; evaluating on the left half keeps the alternating
    // sum small.
    if (x > 0.5 * l) {
        x = l - x;
    }
    if (l <= 20) {
        double acc = 0.0;
        double binom = 1.0;
        for (int i = 0; i <= l && i < x; ++i) {
            const double term = binom * ipow(x - i, l - 1);
            acc += (i % 2 == 0) ? term : -term;
            binom = binom * (l - i) / (i + 1);
        }
        double fact = 1.0;
        for (int i = 2; i < l; ++i) {
            fact *= i;
        }
        return acc / fact;
    }
    // Cox-de Boor on the integer knots 0..l.
    std::vector<double> N(static_cast<std::size_t>(l), 0.0);
    const int cell = static_cast<int>(std::floor(x));
    N[static_cast<std::size_t>(cell)] = 1.0;
    for (int p = 1; p < l; ++p) {
        for (int i = 0; i + p < l; ++i) {
            const double left = (x - i) / p * N[static_cast<std::size_t>(i)];
            const double right = (i + p + 1 - x) / p * N[static_cast<std::size_t>(i + 1)];
            N[static_cast<std::size_t>(i)] = left + right;
        }
    }
    return N[0];
}

FilterG build_filter_g(int k, double delta, int B, const FilterGKnobs& knobs) {
    if (k < 1) {
        throw InvalidInput("build_filter_g: k must be at least 1");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InvalidInput("build_filter_g: delta must lie in (0,1)");
    }
    if (B < 2 || (B & (B - 1)) != 0) {
        throw InvalidInput("build_filter_g: B must be a power of two >= 2");
    }
    if (!(knobs.alpha_g > 0.0 && knobs.alpha_g < 1.0)) {
        throw InvalidInput("build_filter_g: alpha_g must lie in (0,1)");
    }
    if (!(knobs.edge_margin > 0.0)) {
        throw InvalidInput("build_filter_g: edge_margin must be positive");
    }
    FilterG g;
    g.B = B;
    g.k = k;
    g.delta = delta;
    g.alpha_g = knobs.alpha_g;
    g.edge_margin = knobs.edge_margin;
    g.l = knobs.l_override > 0 ? knobs.l_override : choose_g_order(k, delta, knobs.c_l, knobs.edge_margin);

    const double al = g.alpha_g;
    // margin between the rect edge and either band edge
    const double m = al / (4.0 * B * (1.0 - al));
    g.w = (2.0 - al) / (2.0 * B * (1.0 - al));
    g.a = g.edge_margin / (kPi * m);
    g.support_half = 0.5 * g.l * g.a;

    const int l = g.l;
    auto fn = [l](double x) { return ipow(sinc(x), l); };
    // Table of integral_0^x sinc^l out to the widest argument the i-sum uses.
    g.phi_step = kPi / 16.0;
    const double xmax = kPi * g.a * (4.0 + g.w);
    g.phi_cum = cumulative_panels(fn, g.phi_step, xmax, "build_filter_g");
    g.phi_inf = g.phi_cum.back();

    const double half = cumulative_eval(fn, g.phi_cum, g.phi_step, kPi * g.a * g.w / 2.0, g.phi_inf);
    // G^(0) = b0/(pi a) * 2*Phi(pi a w/2) = 1
    g.b0 = kPi * g.a / (2.0 * half);

    g.m_max = static_cast<int>(std::ceil(g.support_half)) - 1;
    if (g.m_max < 0) {
        g.m_max = 0;
    }
    g.samples.resize(static_cast<std::size_t>(2 * g.m_max + 1));
    for (int mm = -g.m_max; mm <= g.m_max; ++mm) {
        g.samples[static_cast<std::size_t>(mm + g.m_max)] = eval_g_time(g, mm);
    }
    return g;
}

double eval_g_time(const FilterG& g, double t) {
    if (std::abs(t) >= g.support_half) {
        return 0.0;
    }
    const double spline = cardinal_bspline(g.l, t / g.a + 0.5 * g.l) / g.a;
    return g.b0 * g.w * sinc(kPi * g.w * t) * spline;
}

double eval_g_u(const FilterG& g, double u) {
    const int l = g.l;
    auto fn = [l](double x) { return ipow(sinc(x), l); };
    const double s = kPi * g.a;
    const double hi = cumulative_eval(fn, g.phi_cum, g.phi_step, s * (u + 0.5 * g.w), g.phi_inf);
    const double lo = cumulative_eval(fn, g.phi_cum, g.phi_step, s * (u - 0.5 * g.w), g.phi_inf);
    return g.b0 / s * (hi - lo);
}

double eval_g_hat(const FilterG& g, double f) {
    return eval_g_u(g, f / (kTwoPi * (1.0 - g.alpha_g)));
}

double bin_offset(double sigma, double b, int j, int B, double f) {
    const double x = sigma * (f + b) - static_cast<double>(j) / B;
    return x - std::floor(x + 0.5);
}

double eval_g_bin_hat(const FilterG& g, double sigma, double b, int j, double f) {
    const double r = bin_offset(sigma, b, j, g.B, f);
    double acc = 0.0;
    for (int i = -3; i <= 3; ++i) {
        acc += eval_g_u(g, r - i);
    }
    return acc;
}

} // namespace sfi
