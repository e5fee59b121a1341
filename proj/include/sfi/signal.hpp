#pragma once

#include <atomic>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace sfi {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Tone {
    double freq = 0.0;
    cplx coeff{0.0, 0.0};
};

struct SparseSignal {
    std::vector<Tone> tones;
    double F = 0.0;

    std::size_t size() const { return tones.size(); }
    bool empty() const { return tones.empty(); }
};

cplx eval_sparse(const SparseSignal& x, double t);

/// Composite trapezoid estimate of (1/T) * integral over [0,T] of |f|^2, from
/// values on a uniform grid that includes both endpoints.
double t_norm_sq(std::span<const cplx> values, double T);

/// Uniform grid of n points over [0,T], endpoints included.
std::vector<double> uniform_grid(double T, std::size_t n);

std::vector<cplx> sample_on_grid(const std::function<cplx(double)>& f, double T, std::size_t n);

/// ||x||_T^2 measured on a uniform grid.
double signal_norm_sq(const SparseSignal& x, double T, std::size_t n);

/// ||x||_T^2 in closed form from pairwise tone integrals.
double exact_norm_sq(const SparseSignal& x, double T);

/// Default grid size for norms: 4096 * max(1, k).
std::size_t default_norm_grid(std::size_t k);

SparseSignal add_signals(const SparseSignal& a, const SparseSignal& b);
SparseSignal scale_signal(const SparseSignal& a, cplx c);

enum class NoiseKind { none, fixed_tones, hashed_gaussian };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    double level = 0.0;
    int tones = 8;  // fixed_tones only
};

/// The perturbation g(t). Kept separate from the oracle so a harness can
/// inspect g without handing x* to the recovery code.
class NoiseModel {
public:
    NoiseModel() = default;

    cplx operator()(double t) const;

    NoiseKind kind() const { return kind_; }
    double pointwise_std() const { return std_; }
    const SparseSignal& tones() const { return tones_; }

private:
    friend NoiseModel make_noise_model(const SparseSignal&, const NoiseSpec&, double, std::uint64_t);

    NoiseKind kind_ = NoiseKind::none;
    SparseSignal tones_;
    double std_ = 0.0;
    std::uint64_t key_ = 0;
};

NoiseModel make_noise_model(const SparseSignal& xstar, const NoiseSpec& noise, double T, std::uint64_t seed);

/// Query-counted access to x(t) = x*(t) + g(t).
class SampleOracle {
public:
    SampleOracle(double T, std::function<cplx(double)> fn, std::uint64_t seed = 0);
    SampleOracle(SampleOracle&& other) noexcept;
    SampleOracle& operator=(SampleOracle&& other) noexcept;
    SampleOracle(const SampleOracle&) = delete;
    SampleOracle& operator=(const SampleOracle&) = delete;

    cplx operator()(double t) const {
        count_.fetch_add(1, std::memory_order_relaxed);
        return fn_(t);
    }

    double T() const { return T_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t query_count() const { return count_.load(std::memory_order_relaxed); }

private:
    double T_;
    std::function<cplx(double)> fn_;
    std::uint64_t seed_;
    mutable std::atomic<std::uint64_t> count_{0};
};

SampleOracle make_oracle(const SparseSignal& xstar, const NoiseSpec& noise, double T, std::uint64_t seed);

/// Oracle from an explicit split; used by the harness after it has built the
/// noise model for diagnostics.
SampleOracle make_oracle(const SparseSignal& xstar, const NoiseModel& g, double T, std::uint64_t seed);

// Counter-based hashing used by the deterministic noise.
std::uint64_t splitmix64(std::uint64_t x);

} // namespace sfi
