#include "doctest.h"

#include <cmath>

#include "generators.hpp"
#include "hqc/sme.hpp"

using namespace hqc;

namespace {

CombinedModel reference_model()
{
    return build_combined_model(0.55, map_classical_to_cavity(OuParams{0.25, 0.125, 0.0}), SpaceLayout({2, 2}));
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("sme_step on a closed static system leaves the state alone")
{
    std::mt19937_64 rng(2);
    const DensityState rho = testing::random_density(rng, 4);
    const SmeSystem frozen(Operator::zero(4), {});
    for (double dy : {-0.3, 0.0, 1.7}) {
        CHECK(max_abs(sme_step(rho, dy, 1e-3, frozen).rho - rho.rho) < 1e-15);
    }
    const SmeSystem zero_coupled(Operator::zero(4), {Operator::zero(4), Operator::zero(4)});
    CHECK(max_abs(sme_step(rho, 0.9, 1e-3, zero_coupled).rho - rho.rho) < 1e-15);
}

TEST_CASE("sme_step with an unmeasured channel is a plain dissipator step")
{
    std::mt19937_64 rng(4);
    const DensityState rho = testing::random_density(rng, 3);
    const Operator a = fock_annihilation(3);
    const SmeSystem system(Operator::zero(3), {Operator::zero(3), a});
    const double dt = 1e-3;
    const Matrix expected = rho.rho + dt * lindblad_drift(Operator::zero(3), std::span<const Operator>(&a, 1), rho.rho);
    const DensityState next = sme_step(rho, 0.42, dt, system);
    CHECK(max_abs(next.rho - expected) < 1e-14);
}

TEST_CASE("sme_step keeps the state normalised and Hermitian")
{
    const CombinedModel m = reference_model();
    std::mt19937_64 rng(6);
    std::normal_distribution<double> noise(0.0, std::sqrt(1e-3));
    for (int trial = 0; trial < 50; ++trial) {
        const DensityState rho = testing::random_density(rng, 4);
        const DensityState next = sme_step(rho, noise(rng), 1e-3, m);
        CHECK(std::abs(next.rho.trace() - 1.0) < 1e-12);
        CHECK(max_abs(next.rho - next.rho.adjoint()) == 0.0);
    }
}

TEST_CASE("zero innovation decays <Q2> at rate K2/2")
{
    const CombinedModel m = reference_model();
    const SmeSystem system = SmeSystem::from_model(m);
    const DensityState rho0 = default_initial_state(m.layout);
    const double dt = 1e-3;
    const double dy = measurement_rate(system, rho0) * dt;
    const DensityState next = sme_step(rho0, dy, dt, system);
    const double q2 = expectation(next, m.quadratures[index(Quadrature::Q2)]).real();
    CHECK(std::abs(q2 - 0.499875) < 1e-6);
}

TEST_CASE("sme_step errors")
{
    const CombinedModel m = reference_model();
    const DensityState rho0 = default_initial_state(m.layout);
    CHECK_THROWS_AS(sme_step(DensityState{Matrix::Identity(3, 3) / 3.0}, 0.0, 1e-3, m), DimensionError);
    CHECK_THROWS_AS(sme_step(rho0, 0.0, 0.0, m), std::invalid_argument);
    // A wildly oversized step leaves the physical region.
    CHECK_THROWS_AS(sme_step(rho0, 50.0, 1.0, m), NumericalInstability);
}

TEST_CASE("raw Euler steps lose positivity; the projection restores it")
{
    const CombinedModel m = reference_model();
    const DensityState rho0 = default_initial_state(m.layout);
    SmeOptions raw;
    raw.project_positive = false;
    raw.keep_states = false;
    const SmeTrajectory unprojected = simulate_truth(m, rho0, 1e-3, 2.0, 1, raw);
    CHECK(unprojected.worst_health.min_eigenvalue < -1e-6);

    SmeOptions projected;
    projected.keep_states = false;
    const SmeTrajectory fixed = simulate_truth(m, rho0, 1e-3, 2.0, 1, projected);
    CHECK(fixed.worst_health.min_eigenvalue > -1e-12);
    CHECK(fixed.projected_steps > 0);
}

TEST_CASE("simulate_truth on a decoupled system emits pure noise")
{
    const CombinedModel m = reference_model();
    const SmeSystem decoupled(Operator::zero(4), {Operator::zero(4)});
    const DensityState rho0 = default_initial_state(m.layout);
    const TimeGrid grid = TimeGrid::over(0.2, 1e-3);

    Rng rng = make_stream(12, 0, StreamTag::Truth);
    const SmeTrajectory traj = simulate_truth(decoupled, Readout::from_model(m), rho0, grid, rng);

    Rng replay = make_stream(12, 0, StreamTag::Truth);
    std::normal_distribution<double> normal(0.0, std::sqrt(grid.dt));
    REQUIRE(traj.record.dy.size() == grid.steps);
    for (double dy : traj.record.dy) CHECK(dy == normal(replay));
    for (const DensityState& s : traj.states) CHECK(max_abs(s.rho - rho0.rho) < 1e-15);
}

TEST_CASE("simulate_truth records estimates at every grid point")
{
    const CombinedModel m = reference_model();
    const DensityState rho0 = default_initial_state(m.layout);
    const SmeTrajectory traj = simulate_truth(m, rho0, 1e-3, 1.0, 5);
    CHECK(traj.states.size() == 1001);
    CHECK(traj.q_hat.size() == 1001);
    CHECK(traj.record.dy.size() == 1000);
    CHECK(traj.q_hat[0] == doctest::Approx(0.17677669529663687).epsilon(1e-14));
    for (std::size_t k = 0; k < traj.states.size(); k += 97) {
        const double q2 = expectation(traj.states[k], m.quadratures[index(Quadrature::Q2)]).real();
        CHECK(std::abs(traj.q_hat[k] - q2 / m.alpha()) < 1e-12);
    }

    const StateHealth& h = traj.worst_health;
    CHECK(h.trace_error < 1e-8);
    CHECK(h.hermiticity_error < 1e-10);
    CHECK(h.min_eigenvalue > -1e-8);
    CHECK(h.min_purity > 0.0);
    CHECK(h.max_purity <= 1.0 + 1e-8);
}

TEST_CASE("filter_record replays a truth trajectory bitwise")
{
    const CombinedModel m = reference_model();
    const DensityState rho0 = default_initial_state(m.layout);
    const SmeTrajectory truth = simulate_truth(m, rho0, 1e-3, 1.0, 8);
    const SmeTrajectory replay = filter_record(m, rho0, truth.record);
    REQUIRE(replay.states.size() == truth.states.size());
    for (std::size_t k = 0; k < truth.states.size(); ++k) {
        CHECK(replay.states[k].rho == truth.states[k].rho);
    }
    CHECK(replay.q_hat == truth.q_hat);

    MeasurementRecord short_record = truth.record;
    short_record.dy.pop_back();
    CHECK_THROWS_AS(filter_record(m, rho0, short_record), std::invalid_argument);
}

TEST_CASE("a zero-innovation record reproduces deterministic Lindblad evolution")
{
    const CombinedModel m = reference_model();
    const SmeSystem system = SmeSystem::from_model(m);
    const DensityState rho0 = default_initial_state(m.layout);
    const TimeGrid grid = TimeGrid::over(2.0, 1e-3);

    // Oracle: Euler integration of the master equation alone.
    std::vector<Matrix> expected{rho0.rho};
    MeasurementRecord record{grid, {}, 0};
    for (std::size_t k = 0; k < grid.steps; ++k) {
        const DensityState current{expected.back()};
        const double rate = 2.0 * (m.L[0].matrix() * current.rho).trace().real();
        record.dy.push_back(rate * grid.dt);
        Matrix next = current.rho + grid.dt * lindblad_drift(m.H, m.L, current.rho);
        next = 0.5 * (next + next.adjoint()).eval();
        expected.push_back(next / next.trace().real());
    }
    const SmeTrajectory traj = filter_record(m, rho0, record);
    for (std::size_t k = 0; k < expected.size(); ++k) {
        CHECK(max_abs(traj.states[k].rho - expected[k]) < 1e-12);
    }
}

TEST_CASE("with the measured coupling off the filter ignores the record")
{
    const CombinedModel m = reference_model();
    const SmeSystem blind(m.H, {Operator::zero(4), m.L[1]});
    const Readout readout = Readout::from_model(m);
    const DensityState rho0 = default_initial_state(m.layout);
    const TimeGrid grid = TimeGrid::over(0.5, 1e-3);

    Rng r1 = make_stream(1, 0, StreamTag::Truth);
    Rng r2 = make_stream(2, 0, StreamTag::Truth);
    const SmeTrajectory a = simulate_truth(blind, readout, rho0, grid, r1);
    const SmeTrajectory b = simulate_truth(blind, readout, rho0, grid, r2);
    CHECK(a.record.dy != b.record.dy);
    for (std::size_t k = 0; k < a.states.size(); ++k) CHECK(a.states[k].rho == b.states[k].rho);
}

TEST_CASE("filters started from different states converge on a shared record")
{
    const CombinedModel m = reference_model();
    const DensityState rho0 = default_initial_state(m.layout);
    Eigen::VectorXcd ground = Eigen::VectorXcd::Zero(4);
    ground(0) = 1.0;
    const DensityState other = pure_state(ground);

    const SmeTrajectory truth = simulate_truth(m, rho0, 1e-3, 20.0, 3, SmeOptions{true, 5e-2, false});
    const SmeTrajectory alt = filter_record(m, other, truth.record, SmeOptions{true, 5e-2, false});
    const double gap0 = std::abs(truth.q_hat.front() - alt.q_hat.front());
    const double gap_end = std::abs(truth.q_hat.back() - alt.q_hat.back());
    CHECK(gap0 > 0.1);
    CHECK(gap_end < gap0);
}

TEST_CASE("state_health reports the invariants")
{
    const StateHealth h = state_health(DensityState{Matrix::Identity(4, 4) / 4.0});
    CHECK(h.trace_error < 1e-15);
    CHECK(h.hermiticity_error == 0.0);
    CHECK(h.min_eigenvalue == doctest::Approx(0.25));
    CHECK(h.min_purity == doctest::Approx(0.25));

    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 0) = 1.5;
    bad(1, 1) = -0.5;
    const StateHealth hb = state_health(DensityState{bad});
    CHECK(hb.min_eigenvalue == doctest::Approx(-0.5));
    CHECK(hb.max_purity == doctest::Approx(2.5));
}
