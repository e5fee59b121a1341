#include "sfi/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "sfi/errors.hpp"

namespace sfi {

double HSpectrum::eval_c(double xi) const {
    const double a = std::abs(xi);
    const double s = a / step;
    const std::size_t n = table.size();
    const std::size_t i = static_cast<std::size_t>(s);
    if (i + 2 >= n) {
        return 0.0;
    }
    const double x = s - static_cast<double>(i);
    // Catmull-Rom; the table is even so index -1 mirrors index 1.
    const double p0 = i == 0 ? table[1] : table[i - 1];
    const double p1 = table[i];
    const double p2 = table[i + 1];
    const double p3 = table[i + 2];
    return p1 + 0.5 * x * (p2 - p0 + x * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + x * (3.0 * (p1 - p2) + p3 - p0)));
}

cplx HSpectrum::eval(double xi) const {
    const double c = eval_c(xi);
    if (c == 0.0) {
        return {0.0, 0.0};
    }
    double ph = 0.5 * xi * T;
    ph -= std::floor(ph);
    return c * cplx(std::cos(kTwoPi * ph), -std::sin(kTwoPi * ph));
}

HSpectrum build_h_spectrum(const FilterH& h, std::size_t points) {
    HSpectrum hs;
    hs.T = h.T;
    hs.half_width = 0.5 * h.dh;
    const double top = hs.half_width * 1.02;
    hs.step = top / static_cast<double>(points);
    hs.table.assign(points + 3, 0.0);
    const std::size_t n = h.table.size() - 1;
    const std::size_t mid = n / 2;
    for (std::size_t q = 0; q < hs.table.size(); ++q) {
        const double xi = hs.step * static_cast<double>(q);
        // trapezoid over the symmetric node set; end values are negligible
        double acc = (n % 2 == 0) ? h.table[mid] : 0.0;
        for (std::size_t i = 0; i < mid; ++i) {
            const double s = h.t_lo + h.step * static_cast<double>(i) - 0.5 * h.T;
            const double wgt = (i == 0) ? 1.0 : 2.0;
            acc += wgt * h.table[i] * std::cos(kTwoPi * xi * s);
        }
        hs.table[q] = acc * h.step;
    }
    return hs;
}

DiagContext make_diag_context(const FilterH& h, const FilterG& g) {
    DiagContext ctx;
    ctx.h = &h;
    ctx.g = &g;
    ctx.hs = build_h_spectrum(h);
    ctx.f_step = 1.0 / (3.0 * h.T);
    return ctx;
}

SpectralSamples windowed_spectrum(const DiagContext& ctx, const SparseSignal& x) {
    SpectralSamples out;
    out.step = ctx.f_step;
    const double hw = ctx.hs.half_width;
    std::vector<long long> idx;
    for (const auto& t : x.tones) {
        const long long lo = static_cast<long long>(std::ceil((t.freq - hw) / out.step));
        const long long hi = static_cast<long long>(std::floor((t.freq + hw) / out.step));
        for (long long n = lo; n <= hi; ++n) {
            idx.push_back(n);
        }
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    out.f.reserve(idx.size());
    out.v.reserve(idx.size());
    for (long long n : idx) {
        const double f = static_cast<double>(n) * out.step;
        cplx acc{0.0, 0.0};
        for (const auto& t : x.tones) {
            const double xi = f - t.freq;
            if (std::abs(xi) <= hw) {
                acc += t.coeff * ctx.hs.eval(xi);
            }
        }
        out.f.push_back(f);
        out.v.push_back(acc);
    }
    return out;
}

SpectralSamples bin_spectrum(const DiagContext& ctx, const SparseSignal& x, const HashParams& p, int j) {
    auto s = windowed_spectrum(ctx, x);
    for (std::size_t i = 0; i < s.f.size(); ++i) {
        s.v[i] *= eval_g_bin_hat(*ctx.g, p.sigma, p.b, j, s.f[i]);
    }
    return s;
}

double cluster_energy(const DiagContext& ctx, const SparseSignal& xstar, double f) {
    const auto s = windowed_spectrum(ctx, xstar);
    const double dh = 2.0 * ctx.hs.half_width;
    double acc = 0.0;
    for (std::size_t i = 0; i < s.f.size(); ++i) {
        if (std::abs(s.f[i] - f) <= dh) {
            acc += std::norm(s.v[i]);
        }
    }
    return acc * s.step;
}

bool heavy_frequency(const DiagContext& ctx, const SparseSignal& xstar, double f, double noise_level_sq, int k,
                     double T) {
    return cluster_energy(ctx, xstar, f) >= T * noise_level_sq / k;
}

double filtered_norm_sq(const std::function<cplx(double)>& y, const FilterH& h, const FilterG& g,
                        const HashParams& p, int j, std::size_t n) {
    std::vector<cplx> z(n);
    const auto grid = uniform_grid(h.T, n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = hash_to_bins_fn(y, h, g, p, grid[i] / p.sigma).values[static_cast<std::size_t>(j)];
    }
    return t_norm_sq(z, h.T);
}

bool high_snr_bin(const SparseSignal& xstar, const NoiseModel& noise, const FilterH& h, const FilterG& g,
                  const HashParams& p, int j, double c_snr, std::size_t n) {
    const double zg = filtered_norm_sq([&noise](double t) { return noise(t); }, h, g, p, j, n);
    const double zx = filtered_norm_sq([&xstar](double t) { return eval_sparse(xstar, t); }, h, g, p, j, n);
    return zg <= c_snr * zx;
}

bool large_offset(const std::vector<double>& freqs, const FilterH& h, const FilterG& g, const HashParams& p) {
    const double hw = 0.5 * h.dh;
    const double tol = g.tolerance();
    const double trans = g.stop_edge() - g.pass_edge();
    const double span_u = p.sigma * 2.0 * hw;
    const int npts = std::max(33, static_cast<int>(std::ceil(span_u / (trans / 8.0)))) + 1;
    for (double f0 : freqs) {
        for (int i = 0; i < npts; ++i) {
            const double f = f0 - hw + 2.0 * hw * i / (npts - 1);
            for (int j = 0; j < g.B; ++j) {
                // Bins far from f sit in the stopband; only the two nearest
                // transition zones can produce forbidden values.
                const double off = std::abs(bin_offset(p.sigma, p.b, j, g.B, f));
                if (off > g.stop_edge() + trans) {
                    continue;
                }
                const double v = eval_g_bin_hat(g, p.sigma, p.b, j, f);
                if (v >= tol && v <= 1.0 - tol) {
                    return true;
                }
            }
        }
    }
    return false;
}

double off_band_energy(const DiagContext& ctx, const SparseSignal& x, const HashParams& p, double fstar,
                       double Delta) {
    const int j = hash_bin(p, fstar);
    const auto s = bin_spectrum(ctx, x, p, j);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.f.size(); ++i) {
        if (std::abs(s.f[i] - fstar) > Delta) {
            acc += std::norm(s.v[i]);
        }
    }
    return acc * s.step;
}

bool well_isolated(const DiagContext& ctx, const SparseSignal& x, const HashParams& p, double fstar,
                   double Delta, double eps, double noise_level_sq, int k, double c_iso) {
    const double T = ctx.h->T;
    return off_band_energy(ctx, x, p, fstar, Delta) <= c_iso * eps * T * noise_level_sq / k;
}

int ideal_filter_value(const FilterG& g, const HashParams& p, int j, double f, double delta1) {
    return eval_g_bin_hat(g, p.sigma, p.b, j, f) > 1.0 - delta1 ? 1 : 0;
}

double energy_bound_ratio(const SparseSignal& x, double T, std::size_t n) {
    if (x.empty()) {
        throw InvalidInput("energy_bound_ratio: empty signal");
    }
    double fmax = 0.0;
    for (const auto& t : x.tones) {
        fmax = std::max(fmax, std::abs(t.freq));
    }
    if (n == 0) {
        n = std::max(default_norm_grid(x.size()), static_cast<std::size_t>(16.0 * fmax * T) + 1);
    }
    const auto v = sample_on_grid([&x](double t) { return eval_sparse(x, t); }, T, n);
    const double norm = t_norm_sq(v, T);
    double mx = 0.0;
    for (const auto& z : v) {
        mx = std::max(mx, std::norm(z));
    }
    return mx / norm;
}

double time_concentration_ratio(const DiagContext& ctx, const SparseSignal& x, const HashParams& p, int j) {
    const auto s = bin_spectrum(ctx, x, p, j);
    const double T = ctx.h->T;
    double total = 0.0;
    double peak = 0.0;
    for (const auto& v : s.v) {
        total += std::norm(v);
        peak = std::max(peak, std::abs(v));
    }
    total *= s.step;
    if (!(total > 0.0)) {
        return 1.0;
    }
    std::vector<double> f;
    std::vector<cplx> v;
    for (std::size_t i = 0; i < s.f.size(); ++i) {
        if (std::abs(s.v[i]) > 1e-7 * peak) {
            f.push_back(s.f[i]);
            v.push_back(s.v[i]);
        }
    }
    // integral_0^T |z|^2 = sum_ab z_a conj(z_b) K(f_a - f_b) h^2 with
    // K(nu) = integral_0^T e^{2 pi i nu t} dt.
    double inside = 0.0;
    for (std::size_t a = 0; a < f.size(); ++a) {
        inside += std::norm(v[a]) * T;
        for (std::size_t b = a + 1; b < f.size(); ++b) {
            const double nu = f[a] - f[b];
            const double x = kPi * nu * T;
            const double mag = T * sinc(x);
            const cplx K = mag * cplx(std::cos(x), std::sin(x));
            inside += 2.0 * std::real(v[a] * std::conj(v[b]) * K);
        }
    }
    inside *= s.step * s.step;
    return total / inside;
}

double in_band_fraction(const DiagContext& ctx, const SparseSignal& x, const HashParams& p, int j, double fstar,
                        double Delta) {
    const auto s = bin_spectrum(ctx, x, p, j);
    double in = 0.0;
    double all = 0.0;
    for (std::size_t i = 0; i < s.f.size(); ++i) {
        const double e = std::norm(s.v[i]);
        all += e;
        if (std::abs(s.f[i] - fstar) <= Delta) {
            in += e;
        }
    }
    return all > 0.0 ? in / all : 0.0;
}

} // namespace sfi
