// classical.hpp — Ornstein–Uhlenbeck disturbance paths and ensemble statistics

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hqc/grid.hpp"
#include "hqc/model.hpp"

namespace hqc {

struct OuPath {
    TimeGrid grid;
    std::vector<double> q;
    std::uint64_t seed{0};
};

struct EnsembleStats {
    TimeGrid grid;
    std::vector<double> mean;
    /// Unbiased sample variance; zero when n == 1.
    std::vector<double> var;
    std::size_t n{0};
};

/// Running pointwise mean and variance (Welford), fed one series at a time.
/// Results depend on the order series are added.
class EnsembleAccumulator {
public:
    explicit EnsembleAccumulator(const TimeGrid& grid);

    void add(std::span<const double> series);
    std::size_t count() const { return n_; }
    EnsembleStats stats() const;

private:
    TimeGrid grid_;
    std::size_t n_{0};
    std::vector<double> mean_;
    std::vector<double> m2_;
};

/// Euler–Maruyama path of dq = -u q dt - v dW with dW ~ N(0, dt) drawn from `rng`.
OuPath simulate_ou(const OuParams& p, const TimeGrid& grid, Rng& rng);

/// Convenience overload: stream (seed, index 0, Classical).
OuPath simulate_ou(const OuParams& p, double dt, double t_final, std::uint64_t seed);

/// Euler–Maruyama path driven by explicit Wiener increments (one per step).
std::vector<double> integrate_ou(const OuParams& p, double dt, std::span<const double> dw);

/// Exact transition sampler: q_{k+1} = q_k e^{-u dt} + sqrt(var(dt)) N(0,1).
OuPath simulate_ou_exact(const OuParams& p, const TimeGrid& grid, Rng& rng);

/// n paths, path i drawn from stream (base_seed, i, Classical).
std::vector<OuPath> simulate_ou_ensemble(const OuParams& p, const TimeGrid& grid, std::size_t n,
                                         std::uint64_t base_seed);

EnsembleStats ensemble_stats(std::span<const OuPath> paths);

/// Closed-form (mean, variance) of q(t).
std::pair<double, double> ou_analytic_moments(const OuParams& p, double t);

}  // namespace hqc
