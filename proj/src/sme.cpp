// sme.cpp — Homodyne measurement records and the stochastic master equation filter

#include "hqc/sme.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace hqc {

namespace {

Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

class TrajectoryBuilder {
public:
    TrajectoryBuilder(const Readout& readout, const TimeGrid& grid, const SmeOptions& options)
        : readout_(readout), keep_states_(options.keep_states)
    {
        traj_.record.grid = grid;
        traj_.record.dy.reserve(grid.steps);
        traj_.q_hat.reserve(grid.points());
        traj_.quad_hat.reserve(grid.points());
        if (keep_states_) traj_.states.reserve(grid.points());
    }

    void observe(const DensityState& state)
    {
        Vector4 x;
        for (std::size_t i = 0; i < 4; ++i) {
            x(static_cast<Eigen::Index>(i)) = expectation(state, readout_.quadratures[i]).real();
        }
        traj_.quad_hat.push_back(x);
        traj_.q_hat.push_back(x(index(Quadrature::Q2)) / readout_.alpha);
        traj_.worst_health = traj_.q_hat.size() == 1
                                 ? state_health(state)
                                 : StateHealth::worst(traj_.worst_health, state_health(state));
        if (keep_states_) traj_.states.push_back(state);
    }

    SmeTrajectory& trajectory() { return traj_; }

private:
    const Readout& readout_;
    bool keep_states_;
    SmeTrajectory traj_;
};

// One Euler–Maruyama step; reports whether the positivity projection fired.
DensityState advance(const DensityState& state, double dy, double dt, const SmeSystem& system,
                     const SmeOptions& options, bool& projected)
{
    if (state.dim() != system.dim()) {
        throw DimensionError("sme_step: state dimension " + std::to_string(state.dim()) +
                             " does not match system dimension " + std::to_string(system.dim()));
    }
    if (!(dt > 0.0)) {
        throw std::invalid_argument("sme_step: dt must be positive");
    }
    const Matrix& rho = state.rho;
    const Matrix& K = system.generator();

    Matrix next = rho + (K * rho + rho * K.adjoint()) * dt;
    for (const Operator& Lj : system.L()) {
        next += (Lj.matrix() * rho * Lj.matrix().adjoint()) * dt;
    }
    if (!system.L().empty()) {
        const Matrix& L0 = system.L().front().matrix();
        const double rate = measurement_rate(system, state);
        const double innovation = dy - rate * dt;
        next += (L0 * rho + rho * L0.adjoint() - rate * rho) * innovation;
    }

    next = hermitize(next);
    const double trace = next.trace().real();
    if (!std::isfinite(trace) || !(trace > 0.0) || !next.allFinite()) {
        throw NumericalInstability("sme_step: state lost its trace (Tr rho = " + std::to_string(trace) +
                                   "); reduce dt");
    }
    next /= trace;

    projected = false;
    if (options.project_positive) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(next);
        const Eigen::VectorXd& values = eig.eigenvalues();
        const double min_value = values.minCoeff();
        if (min_value < -options.instability_threshold) {
            throw NumericalInstability("sme_step: eigenvalue " + std::to_string(min_value) +
                                       " far below zero; reduce dt");
        }
        if (min_value < 0.0) {
            const Eigen::VectorXd clipped = values.cwiseMax(0.0);
            next = hermitize(eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().adjoint());
            next /= next.trace().real();
            projected = true;
        }
    }
    return DensityState{std::move(next)};
}

SmeTrajectory run(const SmeSystem& system, const Readout& readout, const DensityState& rho0,
                  const TimeGrid& grid, const SmeOptions& options, const std::vector<double>* record,
                  Rng* rng)
{
    TrajectoryBuilder builder(readout, grid, options);
    SmeTrajectory& traj = builder.trajectory();
    std::normal_distribution<double> normal(0.0, std::sqrt(grid.dt));

    DensityState state = rho0;
    builder.observe(state);
    for (std::size_t k = 0; k < grid.steps; ++k) {
        double dy;
        if (record != nullptr) {
            dy = (*record)[k];
        } else {
            dy = measurement_rate(system, state) * grid.dt + normal(*rng);
        }
        traj.record.dy.push_back(dy);
        bool projected = false;
        state = advance(state, dy, grid.dt, system, options, projected);
        if (projected) ++traj.projected_steps;
        builder.observe(state);
    }
    return std::move(traj);
}

}  // namespace

SmeSystem::SmeSystem(Operator H, std::vector<Operator> L) : H_(std::move(H)), L_(std::move(L))
{
    Matrix decay = Matrix::Zero(H_.matrix().rows(), H_.matrix().cols());
    for (const Operator& Lj : L_) {
        if (Lj.dim() != H_.dim()) {
            throw DimensionError("SmeSystem: coupling operator dimension differs from Hamiltonian");
        }
        decay += Lj.matrix().adjoint() * Lj.matrix();
    }
    generator_ = Complex(0.0, -1.0) * H_.matrix() - 0.5 * decay;
}

SmeSystem SmeSystem::from_model(const CombinedModel& model)
{
    return SmeSystem(model.H, {model.L[0], model.L[1]});
}

Readout Readout::from_model(const CombinedModel& model)
{
    return Readout{model.quadratures, model.alpha()};
}

StateHealth StateHealth::worst(const StateHealth& a, const StateHealth& b)
{
    return StateHealth{
        std::max(a.trace_error, b.trace_error),
        std::max(a.hermiticity_error, b.hermiticity_error),
        std::min(a.min_eigenvalue, b.min_eigenvalue),
        std::min(a.min_purity, b.min_purity),
        std::max(a.max_purity, b.max_purity),
    };
}

StateHealth state_health(const DensityState& state)
{
    const Matrix& rho = state.rho;
    StateHealth h;
    h.trace_error = std::abs(rho.trace() - Complex(1.0, 0.0));
    h.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    h.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Matrix>(hermitize(rho), Eigen::EigenvaluesOnly)
                           .eigenvalues()
                           .minCoeff();
    h.min_purity = (rho * rho).trace().real();
    h.max_purity = h.min_purity;
    return h;
}

double measurement_rate(const SmeSystem& system, const DensityState& state)
{
    if (system.L().empty()) return 0.0;
    return 2.0 * expectation(state, system.L().front()).real();
}

DensityState sme_step(const DensityState& state, double dy, double dt, const SmeSystem& system,
                      const SmeOptions& options)
{
    bool projected = false;
    return advance(state, dy, dt, system, options, projected);
}

DensityState sme_step(const DensityState& state, double dy, double dt, const CombinedModel& model,
                      const SmeOptions& options)
{
    return sme_step(state, dy, dt, SmeSystem::from_model(model), options);
}

SmeTrajectory simulate_truth(const SmeSystem& system, const Readout& readout, const DensityState& rho0,
                             const TimeGrid& grid, Rng& rng, const SmeOptions& options)
{
    return run(system, readout, rho0, grid, options, nullptr, &rng);
}

SmeTrajectory simulate_truth(const CombinedModel& model, const DensityState& rho0, double dt,
                             double t_final, std::uint64_t seed, const SmeOptions& options)
{
    Rng rng = make_stream(seed, 0, StreamTag::Truth);
    SmeTrajectory traj = simulate_truth(SmeSystem::from_model(model), Readout::from_model(model), rho0,
                                        TimeGrid::over(t_final, dt), rng, options);
    traj.record.seed = seed;
    return traj;
}

SmeTrajectory filter_record(const SmeSystem& system, const Readout& readout, const DensityState& rho0,
                            const MeasurementRecord& record, const SmeOptions& options)
{
    if (record.dy.size() != record.grid.steps) {
        throw std::invalid_argument("filter_record: record holds " + std::to_string(record.dy.size()) +
                                    " increments for a grid of " + std::to_string(record.grid.steps) +
                                    " steps");
    }
    SmeTrajectory traj = run(system, readout, rho0, record.grid, options, &record.dy, nullptr);
    traj.record.seed = record.seed;
    return traj;
}

SmeTrajectory filter_record(const CombinedModel& model, const DensityState& rho0,
                            const MeasurementRecord& record, const SmeOptions& options)
{
    return filter_record(SmeSystem::from_model(model), Readout::from_model(model), rho0, record, options);
}

}  // namespace hqc
