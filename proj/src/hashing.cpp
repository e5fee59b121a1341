#include "sfi/hashing.hpp"

#include <cmath>

#include <unsupported/Eigen/FFT>

#include "sfi/errors.hpp"

namespace sfi {

HashParams draw_hash_params(double delta0, int B, double F, std::mt19937_64& rng, SigmaRange range) {
    if (!(delta0 > 0.0)) {
        throw InvalidInput("draw_hash_params: delta0 must be positive");
    }
    if (B < 2) {
        throw InvalidInput("draw_hash_params: B must be at least 2");
    }
    double lo = 1.0 / (B * delta0);
    double hi = 2.0 / (B * delta0);
    if (range == SigmaRange::collision) {
        lo = 1.0 / (4.0 * B * delta0);
        hi = 1.0 / (2.0 * B * delta0);
    }
    HashParams p;
    p.B = B;
    p.sigma = std::uniform_real_distribution<double>(lo, hi)(rng);
    const double M = std::max(F, 1.0 / p.sigma);
    p.b = std::uniform_real_distribution<double>(2.0 * M, 4.0 * M)(rng);
    return p;
}

int hash_bin(const HashParams& p, double f) {
    double x = p.sigma * (f + p.b);
    x -= std::floor(x);
    // x in [0,1): round half away from zero of a nonnegative value
    const long r = static_cast<long>(std::floor(x * p.B + 0.5));
    return static_cast<int>(((r % p.B) + p.B) % p.B);
}

BinVector hash_to_bins_fn(const std::function<cplx(double)>& x, const FilterH& h, const FilterG& g,
                          const HashParams& p, double a) {
    const int B = p.B;
    if (B != g.B) {
        throw InvalidInput("hash_to_bins: hash and filter disagree on B");
    }
    std::vector<cplx> u(static_cast<std::size_t>(B), cplx(0.0, 0.0));
    double sb = p.sigma * p.b;
    sb -= std::floor(sb);
    for (int m = -g.m_max; m <= g.m_max; ++m) {
        const double gm = g.sample(m);
        const double t = p.sigma * (a - m);
        const double hv = eval_h(h, t);
        // Queried even where H or G vanish so the count depends only on G's support.
        const cplx xv = x(t);
        double ph = sb * static_cast<double>(m);
        ph -= std::floor(ph);
        const cplx rot(std::cos(kTwoPi * ph), -std::sin(kTwoPi * ph));
        const int r = ((m % B) + B) % B;
        u[static_cast<std::size_t>(r)] += gm * hv * xv * rot;
    }
    // z_j = sum_r u_r e^{2 pi i j r / B}: an unscaled inverse DFT.
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<cplx> z;
    fft.inv(z, u);
    BinVector out;
    out.values = std::move(z);
    out.time = p.sigma * a;
    return out;
}

BinVector hash_to_bins(const SampleOracle& oracle, const FilterH& h, const FilterG& g, const HashParams& p,
                       double a) {
    return hash_to_bins_fn([&oracle](double t) { return oracle(t); }, h, g, p, a);
}

} // namespace sfi
