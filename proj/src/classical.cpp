// classical.cpp — Ornstein–Uhlenbeck disturbance paths and ensemble statistics

#include "hqc/classical.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hqc {

namespace {

void require_valid(const OuParams& p)
{
    if (!std::isfinite(p.u) || !std::isfinite(p.v) || !std::isfinite(p.q0)) {
        throw InvalidParameter("OU parameters must be finite");
    }
}

}  // namespace

std::vector<double> integrate_ou(const OuParams& p, double dt, std::span<const double> dw)
{
    require_valid(p);
    std::vector<double> q(dw.size() + 1);
    q[0] = p.q0;
    for (std::size_t k = 0; k < dw.size(); ++k) {
        q[k + 1] = q[k] - p.u * q[k] * dt - p.v * dw[k];
    }
    return q;
}

OuPath simulate_ou(const OuParams& p, const TimeGrid& grid, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, std::sqrt(grid.dt));
    std::vector<double> dw(grid.steps);
    for (double& w : dw) w = normal(rng);
    return OuPath{grid, integrate_ou(p, grid.dt, dw), 0};
}

OuPath simulate_ou(const OuParams& p, double dt, double t_final, std::uint64_t seed)
{
    const TimeGrid grid = TimeGrid::over(t_final, dt);
    Rng rng = make_stream(seed, 0, StreamTag::Classical);
    OuPath path = simulate_ou(p, grid, rng);
    path.seed = seed;
    return path;
}

OuPath simulate_ou_exact(const OuParams& p, const TimeGrid& grid, Rng& rng)
{
    require_valid(p);
    const double decay = std::exp(-p.u * grid.dt);
    const double step_sd = std::sqrt(ou_analytic_moments(OuParams{p.u, p.v, 0.0}, grid.dt).second);
    std::normal_distribution<double> normal(0.0, 1.0);
    OuPath path{grid, std::vector<double>(grid.points()), 0};
    path.q[0] = p.q0;
    for (std::size_t k = 0; k < grid.steps; ++k) {
        path.q[k + 1] = path.q[k] * decay + step_sd * normal(rng);
    }
    return path;
}

std::vector<OuPath> simulate_ou_ensemble(const OuParams& p, const TimeGrid& grid, std::size_t n,
                                         std::uint64_t base_seed)
{
    std::vector<OuPath> paths;
    paths.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = make_stream(base_seed, i, StreamTag::Classical);
        OuPath path = simulate_ou(p, grid, rng);
        path.seed = base_seed;
        paths.push_back(std::move(path));
    }
    return paths;
}

EnsembleAccumulator::EnsembleAccumulator(const TimeGrid& grid)
    : grid_(grid), mean_(grid.points(), 0.0), m2_(grid.points(), 0.0)
{
}

void EnsembleAccumulator::add(std::span<const double> series)
{
    if (series.size() != grid_.points()) {
        throw std::invalid_argument("EnsembleAccumulator: series length " + std::to_string(series.size()) +
                                    " does not match grid of " + std::to_string(grid_.points()) + " points");
    }
    ++n_;
    const double count = static_cast<double>(n_);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double delta = series[k] - mean_[k];
        mean_[k] += delta / count;
        m2_[k] += delta * (series[k] - mean_[k]);
    }
}

EnsembleStats EnsembleAccumulator::stats() const
{
    if (n_ == 0) {
        throw std::invalid_argument("EnsembleAccumulator: no series added");
    }
    EnsembleStats out{grid_, mean_, m2_, n_};
    for (double& v : out.var) {
        v = n_ > 1 ? v / static_cast<double>(n_ - 1) : 0.0;
    }
    return out;
}

EnsembleStats ensemble_stats(std::span<const OuPath> paths)
{
    if (paths.empty()) {
        throw std::invalid_argument("ensemble_stats: empty path list");
    }
    const TimeGrid& grid = paths.front().grid;
    EnsembleAccumulator acc(grid);
    for (const OuPath& path : paths) {
        if (!(path.grid == grid)) {
            throw std::invalid_argument("ensemble_stats: paths do not share a time grid");
        }
        acc.add(path.q);
    }
    return acc.stats();
}

std::pair<double, double> ou_analytic_moments(const OuParams& p, double t)
{
    const double mean = p.q0 * std::exp(-p.u * t);
    const double var = p.v * p.v * (1.0 - std::exp(-2.0 * p.u * t)) / (2.0 * p.u);
    return {mean, var};
}

}  // namespace hqc
