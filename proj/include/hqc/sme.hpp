// sme.hpp — Homodyne measurement records and the stochastic master equation filter
//
// The conditional state follows
//
//   drho = L(rho) dt + (L0 rho + rho L0† - <L0 + L0†> rho) (dy - <L0 + L0†> dt)
//
// with L the Lindblad drift over every coupling channel and L0 the single
// homodyne-monitored channel. Each step is an explicit Euler–Maruyama update
// followed by Hermitisation, trace renormalisation, and (by default) a
// projection onto the positive cone.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hqc/grid.hpp"
#include "hqc/model.hpp"
#include "hqc/operators.hpp"

namespace hqc {

struct MeasurementRecord {
    TimeGrid grid;
    /// dy[k] is the increment over [t_k, t_{k+1}); size grid.steps.
    std::vector<double> dy;
    std::uint64_t seed{0};
};

/// Open system as seen by the filter. L[0] is the measured channel; any
/// further channels only dissipate.
class SmeSystem {
public:
    SmeSystem(Operator H, std::vector<Operator> L);
    static SmeSystem from_model(const CombinedModel& model);

    const Operator& H() const { return H_; }
    const std::vector<Operator>& L() const { return L_; }
    const Matrix& generator() const { return generator_; }
    std::size_t dim() const { return H_.dim(); }

private:
    Operator H_;
    std::vector<Operator> L_;
    Matrix generator_;  // -iH - 1/2 sum L†L
};

/// Observables recorded along a trajectory.
struct Readout {
    std::array<Operator, 4> quadratures;
    double alpha{1.0};

    static Readout from_model(const CombinedModel& model);
};

struct StateHealth {
    double trace_error{0.0};        // |Tr rho - 1|
    double hermiticity_error{0.0};  // max |rho - rho†|
    double min_eigenvalue{1.0};
    double min_purity{1.0};         // Tr rho^2, smallest seen
    double max_purity{1.0};         // Tr rho^2, largest seen

    /// Elementwise worst case of two health reports.
    static StateHealth worst(const StateHealth& a, const StateHealth& b);
};

StateHealth state_health(const DensityState& state);

struct SmeOptions {
    /// Clip negative eigenvalues after each step. The raw Euler update from a
    /// pure state routinely dips below zero by O(dt).
    bool project_positive{true};
    /// A pre-projection eigenvalue below -this aborts the step.
    double instability_threshold{5e-2};
    /// Store every intermediate density matrix in the trajectory.
    bool keep_states{true};
};

struct SmeTrajectory {
    MeasurementRecord record;
    std::vector<DensityState> states;
    std::vector<double> q_hat;
    std::vector<Vector4> quad_hat;
    /// Worst state health seen over all grid points.
    StateHealth worst_health;
    /// Steps on which the positivity projection changed the state.
    std::size_t projected_steps{0};
};

/// Tr[(L0 + L0†) rho], the predicted homodyne rate.
double measurement_rate(const SmeSystem& system, const DensityState& state);

DensityState sme_step(const DensityState& state, double dy, double dt, const SmeSystem& system,
                      const SmeOptions& options = {});
DensityState sme_step(const DensityState& state, double dy, double dt, const CombinedModel& model,
                      const SmeOptions& options = {});

/// Unravels the filter itself: dy_k = Tr[(L0 + L0†) rho_k] dt + dW_k.
SmeTrajectory simulate_truth(const SmeSystem& system, const Readout& readout, const DensityState& rho0,
                             const TimeGrid& grid, Rng& rng, const SmeOptions& options = {});
/// Draws from stream (seed, 0, Truth).
SmeTrajectory simulate_truth(const CombinedModel& model, const DensityState& rho0, double dt,
                             double t_final, std::uint64_t seed, const SmeOptions& options = {});

SmeTrajectory filter_record(const SmeSystem& system, const Readout& readout, const DensityState& rho0,
                            const MeasurementRecord& record, const SmeOptions& options = {});
SmeTrajectory filter_record(const CombinedModel& model, const DensityState& rho0,
                            const MeasurementRecord& record, const SmeOptions& options = {});

}  // namespace hqc
