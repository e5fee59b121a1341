#include "sfi/signal.hpp"

#include <bit>
#include <cmath>
#include <random>

#include "sfi/errors.hpp"

namespace sfi {

cplx eval_sparse(const SparseSignal& x, double t) {
    cplx acc{0.0, 0.0};
    for (const auto& tone : x.tones) {
        // Reduce the phase before calling sin/cos; f*t can be large.
        double ph = tone.freq * t;
        ph -= std::floor(ph);
        acc += tone.coeff * cplx(std::cos(kTwoPi * ph), std::sin(kTwoPi * ph));
    }
    return acc;
}

double t_norm_sq(std::span<const cplx> values, double T) {
    if (values.size() < 2) {
        throw InvalidInput("t_norm_sq: grid needs at least 2 points");
    }
    if (!(T > 0.0)) {
        throw InvalidInput("t_norm_sq: T must be positive");
    }
    const std::size_t n = values.size();
    double acc = 0.5 * (std::norm(values.front()) + std::norm(values.back()));
    for (std::size_t i = 1; i + 1 < n; ++i) {
        acc += std::norm(values[i]);
    }
    // h = T/(n-1); the 1/T factor cancels it.
    return acc / static_cast<double>(n - 1);
}

std::vector<double> uniform_grid(double T, std::size_t n) {
    std::vector<double> g(n);
    if (n == 1) {
        g[0] = 0.0;
        return g;
    }
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = T * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return g;
}

std::vector<cplx> sample_on_grid(const std::function<cplx(double)>& f, double T, std::size_t n) {
    auto grid = uniform_grid(T, n);
    std::vector<cplx> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = f(grid[i]);
    }
    return v;
}

double signal_norm_sq(const SparseSignal& x, double T, std::size_t n) {
    auto v = sample_on_grid([&](double t) { return eval_sparse(x, t); }, T, n);
    return t_norm_sq(v, T);
}

double exact_norm_sq(const SparseSignal& x, double T) {
    // (1/T) integral_0^T e^{2 pi i v t} dt = e^{i pi v T} sinc(pi v T)
    double acc = 0.0;
    const auto& ts = x.tones;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        acc += std::norm(ts[i].coeff);
        for (std::size_t j = i + 1; j < ts.size(); ++j) {
            const double th = kPi * (ts[i].freq - ts[j].freq) * T;
            const double sc = std::abs(th) < 1e-8 ? 1.0 - th * th / 6.0 : std::sin(th) / th;
            acc += 2.0 * std::real(ts[i].coeff * std::conj(ts[j].coeff) * std::polar(1.0, th)) * sc;
        }
    }
    return std::max(acc, 0.0);
}

std::size_t default_norm_grid(std::size_t k) {
    return 4096 * std::max<std::size_t>(1, k);
}

SparseSignal add_signals(const SparseSignal& a, const SparseSignal& b) {
    SparseSignal out = a;
    out.tones.insert(out.tones.end(), b.tones.begin(), b.tones.end());
    out.F = std::max(a.F, b.F);
    return out;
}

SparseSignal scale_signal(const SparseSignal& a, cplx c) {
    SparseSignal out = a;
    for (auto& t : out.tones) {
        t.coeff *= c;
    }
    return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

double to_unit_open(std::uint64_t u) {
    // 53 random bits mapped into (0,1).
    return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace

cplx NoiseModel::operator()(double t) const {
    switch (kind_) {
    case NoiseKind::none:
        return {0.0, 0.0};
    case NoiseKind::fixed_tones:
        return eval_sparse(tones_, t);
    case NoiseKind::hashed_gaussian: {
        const std::uint64_t u1 = splitmix64(key_ ^ std::bit_cast<std::uint64_t>(t));
        const std::uint64_t u2 = splitmix64(u1 ^ 0x632be59bd9b4e019ULL);
        const double r = std::sqrt(-std::log(to_unit_open(u1)));
        const double th = kTwoPi * to_unit_open(u2);
        return std_ * r * cplx(std::cos(th), std::sin(th));
    }
    }
    return {0.0, 0.0};
}

NoiseModel make_noise_model(const SparseSignal& xstar, const NoiseSpec& noise, double T, std::uint64_t seed) {
    if (!(T > 0.0)) {
        throw InvalidInput("make_noise_model: T must be positive");
    }
    if (noise.level < 0.0) {
        throw InvalidInput("make_noise_model: noise level must be nonnegative");
    }
    NoiseModel g;
    g.kind_ = noise.kind;
    if (noise.kind == NoiseKind::none || noise.level == 0.0) {
        g.kind_ = NoiseKind::none;
        return g;
    }
    if (xstar.empty()) {
        throw InvalidInput("make_noise_model: relative noise level needs a nonempty ground truth");
    }
    const double xnorm = std::sqrt(exact_norm_sq(xstar, T));
    const double target = noise.level * xnorm;
    if (noise.kind == NoiseKind::hashed_gaussian) {
        g.key_ = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
        g.std_ = target;
        return g;
    }
    // fixed tones
    if (noise.tones < 1) {
        throw InvalidInput("make_noise_model: fixed-tone noise needs at least one tone");
    }
    std::mt19937_64 rng(splitmix64(seed ^ 0x14057b7ef767814fULL));
    double F = xstar.F;
    if (!(F > 0.0)) {
        for (const auto& t : xstar.tones) {
            F = std::max(F, std::abs(t.freq));
        }
        F = std::max(F, 1.0 / T);
    }
    std::uniform_real_distribution<double> uf(-F, F);
    std::normal_distribution<double> nd(0.0, 1.0);
    SparseSignal s;
    s.F = F;
    for (int i = 0; i < noise.tones; ++i) {
        s.tones.push_back({uf(rng), cplx(nd(rng), nd(rng))});
    }
    const double gnorm = std::sqrt(exact_norm_sq(s, T));
    if (!(gnorm > 0.0)) {
        throw NumericFailure("make_noise_model: degenerate noise draw");
    }
    g.tones_ = scale_signal(s, target / gnorm);
    return g;
}

SampleOracle::SampleOracle(double T, std::function<cplx(double)> fn, std::uint64_t seed)
    : T_(T), fn_(std::move(fn)), seed_(seed) {
    if (!(T > 0.0)) {
        throw InvalidInput("SampleOracle: T must be positive");
    }
}

SampleOracle::SampleOracle(SampleOracle&& other) noexcept
    : T_(other.T_), fn_(std::move(other.fn_)), seed_(other.seed_), count_(other.count_.load()) {}

SampleOracle& SampleOracle::operator=(SampleOracle&& other) noexcept {
    T_ = other.T_;
    fn_ = std::move(other.fn_);
    seed_ = other.seed_;
    count_.store(other.count_.load());
    return *this;
}

SampleOracle make_oracle(const SparseSignal& xstar, const NoiseModel& g, double T, std::uint64_t seed) {
    if (g.kind() == NoiseKind::none) {
        return SampleOracle(T, [xstar](double t) { return eval_sparse(xstar, t); }, seed);
    }
    return SampleOracle(T, [xstar, g](double t) { return eval_sparse(xstar, t) + g(t); }, seed);
}

SampleOracle make_oracle(const SparseSignal& xstar, const NoiseSpec& noise, double T, std::uint64_t seed) {
    return make_oracle(xstar, make_noise_model(xstar, noise, T, seed), T, seed);
}

} // namespace sfi
