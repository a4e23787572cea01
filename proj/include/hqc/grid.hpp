// grid.hpp — Uniform time grids, seeded random streams, shared error types

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace hqc {

/// Raised when an integrator leaves the region where its state is valid.
class NumericalInstability : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// t_k = k dt for k = 0..steps.
struct TimeGrid {
    double dt{1e-3};
    std::size_t steps{0};

    /// floor(t_final / dt) steps; throws on non-positive dt or t_final < dt.
    static TimeGrid over(double t_final, double dt);

    std::size_t points() const { return steps + 1; }
    double t(std::size_t k) const { return static_cast<double>(k) * dt; }
    double t_final() const { return t(steps); }

    bool operator==(const TimeGrid&) const = default;
};

/// Random stream purposes, so classical paths and quantum records drawn
/// for the same trajectory index never share a generator.
enum class StreamTag : std::uint64_t { Classical = 0, Truth = 1, IndependentRecord = 2 };

using Rng = std::mt19937_64;

/// Generator for the (base_seed, index, tag) triple. Depends only on the
/// triple, so ensembles are reproducible regardless of execution order.
Rng make_stream(std::uint64_t base_seed, std::uint64_t index, StreamTag tag);

}  // namespace hqc
