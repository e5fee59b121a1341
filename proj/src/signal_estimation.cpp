#include "sfi/signal_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "sfi/errors.hpp"
#include "sfi/sampling.hpp"

namespace sfi {

SketchPlan weighted_sketch(int m, double k_eff, double T, std::mt19937_64& rng) {
    if (m < 1) {
        throw InvalidInput("weighted_sketch: m must be at least 1");
    }
    const auto dist = build_window_dist(std::max(2.0, k_eff), T);
    const auto set = draw_weighted(dist, m, rng);
    SketchPlan plan;
    plan.times = set.times;
    plan.weights = set.weights;
    double total = 0.0;
    for (double w : plan.weights) {
        total += w;
    }
    plan.dprime.reserve(plan.weights.size());
    for (double w : plan.weights) {
        plan.dprime.push_back(w / total);
    }
    return plan;
}

std::vector<double> dedup_frequencies(const std::vector<double>& freqs, double tol) {
    std::vector<double> out;
    for (double f : freqs) {
        bool dup = false;
        for (double g : out) {
            if (std::abs(f - g) < tol) {
                dup = true;
                break;
            }
        }
        if (!dup) {
            out.push_back(f);
        }
    }
    return out;
}

int default_degree(double T, double Delta, int k) {
    return std::min(64, static_cast<int>(std::ceil(T * Delta)) + 4 * k);
}

int signal_estimation_samples(int p, double c_m) {
    return static_cast<int>(std::ceil(c_m * p * std::log2(p + 1.0)));
}

std::vector<std::vector<double>> chebyshev_monomials(int d) {
    std::vector<std::vector<double>> M(static_cast<std::size_t>(d + 1),
                                       std::vector<double>(static_cast<std::size_t>(d + 1), 0.0));
    M[0][0] = 1.0;
    if (d >= 1) {
        M[1][1] = 1.0;
    }
    for (int n = 2; n <= d; ++n) {
        for (int m = 0; m <= n; ++m) {
            double v = -M[static_cast<std::size_t>(n - 2)][static_cast<std::size_t>(m)];
            if (m >= 1) {
                v += 2.0 * M[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(m - 1)];
            }
            M[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)] = v;
        }
    }
    return M;
}

namespace {

cplx phase(double f, double t) {
    double ph = f * t;
    ph -= std::floor(ph);
    return {std::cos(kTwoPi * ph), std::sin(kTwoPi * ph)};
}

} // namespace

MixedPolySignal signal_estimation(const SampleOracle& oracle, const std::vector<double>& freqs_in, int d, double T,
                                  std::mt19937_64& rng, const SignalEstimationKnobs& knobs) {
    if (freqs_in.empty()) {
        throw InvalidInput("signal_estimation: need at least one frequency");
    }
    if (d < 0) {
        throw InvalidInput("signal_estimation: degree must be nonnegative");
    }
    const auto freqs = dedup_frequencies(freqs_in, 1.0 / (100.0 * T));
    const int nf = static_cast<int>(freqs.size());
    const int p = nf * (d + 1);
    const int s = std::max(p, signal_estimation_samples(p, knobs.c_m));
    const auto plan = weighted_sketch(s, std::max(2, p), T, rng);

    Eigen::MatrixXcd A(s, p);
    Eigen::VectorXcd rhs(s);
    std::vector<double> cheb(static_cast<std::size_t>(d + 1));
    for (int i = 0; i < s; ++i) {
        const double t = plan.times[static_cast<std::size_t>(i)];
        const double sw = std::sqrt(plan.weights[static_cast<std::size_t>(i)]);
        const double tau = 2.0 * t / T - 1.0;
        cheb[0] = 1.0;
        if (d >= 1) {
            cheb[1] = tau;
        }
        for (int n = 2; n <= d; ++n) {
            cheb[static_cast<std::size_t>(n)] =
                2.0 * tau * cheb[static_cast<std::size_t>(n - 1)] - cheb[static_cast<std::size_t>(n - 2)];
        }
        for (int j = 0; j < nf; ++j) {
            const cplx e = phase(freqs[static_cast<std::size_t>(j)], t);
            for (int n = 0; n <= d; ++n) {
                A(i, j * (d + 1) + n) = sw * cheb[static_cast<std::size_t>(n)] * e;
            }
        }
        rhs(i) = sw * oracle(t);
    }
    for (int c = 0; c < p; ++c) {
        if (A.col(c).norm() == 0.0) {
            throw InvalidInput("signal_estimation: design matrix has an all-zero column");
        }
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(knobs.svd_threshold);
    const Eigen::VectorXcd v = svd.solve(rhs);

    const auto M = chebyshev_monomials(d);
    MixedPolySignal out;
    out.freqs = freqs;
    out.d = d;
    out.T = T;
    out.coeffs.assign(static_cast<std::size_t>(nf), std::vector<cplx>(static_cast<std::size_t>(d + 1)));
    for (int j = 0; j < nf; ++j) {
        for (int n = 0; n <= d; ++n) {
            const cplx cn = v(j * (d + 1) + n);
            for (int m = 0; m <= n; ++m) {
                out.coeffs[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] +=
                    cn * M[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)];
            }
        }
    }
    return out;
}

cplx mixed_poly_eval(const MixedPolySignal& sig, double t) {
    const double tau = 2.0 * t / sig.T - 1.0;
    cplx acc{0.0, 0.0};
    for (std::size_t j = 0; j < sig.freqs.size(); ++j) {
        const auto& c = sig.coeffs[j];
        cplx p{0.0, 0.0};
        for (std::size_t n = c.size(); n-- > 0;) {
            p = p * tau + c[n];
        }
        acc += p * phase(sig.freqs[j], t);
    }
    return acc;
}

std::vector<cplx> mixed_poly_eval(const MixedPolySignal& sig, std::span<const double> times) {
    std::vector<cplx> out;
    out.reserve(times.size());
    for (double t : times) {
        out.push_back(mixed_poly_eval(sig, t));
    }
    return out;
}

SparseSignal poly_to_fourier(const MixedPolySignal& sig, double T, double eps) {
    if (!(eps > 0.0)) {
        throw InvalidInput("poly_to_fourier: eps must be positive");
    }
    SparseSignal out;
    for (std::size_t j = 0; j < sig.freqs.size(); ++j) {
        const auto& c = sig.coeffs[j];
        const double f = sig.freqs[j];
        int dj = static_cast<int>(c.size()) - 1;
        while (dj > 0 && c[static_cast<std::size_t>(dj)] == cplx(0.0, 0.0)) {
            --dj;
        }
        if (dj <= 0) {
            out.tones.push_back({f, c.empty() ? cplx(0.0, 0.0) : c[0]});
            continue;
        }
        const int nn = 4 * (dj + 1);
        std::vector<double> nodes(static_cast<std::size_t>(nn));
        Eigen::VectorXcd target(nn);
        for (int i = 0; i < nn; ++i) {
            const double tau = std::cos(kPi * (i + 0.5) / nn);
            nodes[static_cast<std::size_t>(i)] = 0.5 * T * (tau + 1.0);
            cplx pv{0.0, 0.0};
            for (int n = dj; n >= 0; --n) {
                pv = pv * tau + c[static_cast<std::size_t>(n)];
            }
            target(i) = pv;
        }
        // Tones at f + gamma*(m - dj/2); shrink gamma until the nodes match.
        double gamma = 1.0 / T;
        bool done = false;
        Eigen::VectorXcd alpha;
        double best = std::numeric_limits<double>::infinity();
        int stale = 0;
        // Past the best spacing the fit only loses digits to conditioning.
        while (gamma > 1e-300 && stale < 60) {
            Eigen::MatrixXcd V(nn, dj + 1);
            for (int i = 0; i < nn; ++i) {
                for (int m = 0; m <= dj; ++m) {
                    V(i, m) = phase(gamma * (m - 0.5 * dj), nodes[static_cast<std::size_t>(i)]);
                }
            }
            alpha = V.colPivHouseholderQr().solve(target);
            const double err = (V * alpha - target).cwiseAbs().maxCoeff();
            if (std::isfinite(err) && err <= 0.5 * eps) {
                done = true;
                for (int m = 0; m <= dj; ++m) {
                    out.tones.push_back({f + gamma * (m - 0.5 * dj), alpha(m)});
                }
                break;
            }
            if (std::isfinite(err) && err < best) {
                best = err;
                stale = 0;
            } else {
                ++stale;
            }
            gamma *= 0.5;
        }
        if (!done) {
            throw ConversionFailure("poly_to_fourier: no tone spacing reached the requested accuracy");
        }
    }
    double F = 0.0;
    for (const auto& t : out.tones) {
        F = std::max(F, std::abs(t.freq));
    }
    out.F = F;
    return out;
}

} // namespace sfi
