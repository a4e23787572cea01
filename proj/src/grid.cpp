// grid.cpp — Uniform time grids and seeded random streams

#include "hqc/grid.hpp"

#include <cmath>
#include <string>

namespace hqc {

TimeGrid TimeGrid::over(double t_final, double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("time step dt must be positive, got " + std::to_string(dt));
    }
    if (!(t_final >= dt) || !std::isfinite(t_final)) {
        throw std::invalid_argument("horizon t_final must be >= dt, got " + std::to_string(t_final));
    }
    // Absorb representation error, e.g. 20 / 1e-3 = 19999.999999999996.
    const double ratio = t_final / dt;
    const auto steps = static_cast<std::size_t>(std::floor(ratio * (1.0 + 1e-12)));
    return TimeGrid{dt, steps};
}

Rng make_stream(std::uint64_t base_seed, std::uint64_t index, StreamTag tag)
{
    const auto t = static_cast<std::uint64_t>(tag);
    std::seed_seq seq{
        static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
        static_cast<std::uint32_t>(index),     static_cast<std::uint32_t>(index >> 32),
        static_cast<std::uint32_t>(t),
    };
    return Rng(seq);
}

}  // namespace hqc
