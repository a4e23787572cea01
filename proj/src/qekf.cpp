// qekf.cpp — Quantum extended Kalman filter on the commutative projection

#include "hqc/qekf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace hqc {

namespace {

constexpr double kCovarianceFloor = -1e-6;

double min_symmetric_eigenvalue(const Eigen::MatrixXd& m)
{
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace

Vector4 drift_f(const Vector4& x, const CombinedModel& model)
{
    const double half_k1 = model.k1 / 2.0;
    const double half_k2 = model.k2() / 2.0;
    const double alpha = model.alpha();
    return Vector4(-half_k1 * x(0) + x(1) * x(2) / alpha,
                   -half_k1 * x(1) - x(0) * x(2) / alpha,
                   -half_k2 * x(2),
                   -half_k2 * x(3) - (x(0) * x(0) + x(1) * x(1)) / (2.0 * alpha) - 1.0 / (4.0 * alpha));
}

Matrix4 jacobian_F(const Vector4& x, const CombinedModel& model)
{
    const double half_k1 = model.k1 / 2.0;
    const double half_k2 = model.k2() / 2.0;
    const double alpha = model.alpha();
    Matrix4 F;
    F << -half_k1, x(2) / alpha, x(1) / alpha, 0.0,
         -x(2) / alpha, -half_k1, -x(0) / alpha, 0.0,
         0.0, 0.0, -half_k2, 0.0,
         -x(0) / alpha, -x(1) / alpha, 0.0, -half_k2;
    return F;
}

NoiseSpec noise_matrices(const CombinedModel& model)
{
    return NoiseSpec{symmetrized_covariance(model.G), 1.0, Eigen::VectorXd::Zero(4)};
}

EkfModelFns make_ekf_fns(const CombinedModel& model)
{
    // Captured by value: the callbacks outlive any caller-owned model.
    auto require_4 = [](const Eigen::VectorXd& x) {
        if (x.size() != 4) {
            throw DimensionError("two-cavity EKF state must have 4 components, got " + std::to_string(x.size()));
        }
        return Vector4(x);
    };
    const RowVector4 C = model.C;
    EkfModelFns fns;
    fns.f = [model, require_4](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return drift_f(require_4(x), model);
    };
    fns.F = [model, require_4](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
        return jacobian_F(require_4(x), model);
    };
    fns.h = [C, require_4](const Eigen::VectorXd& x) { return C.dot(require_4(x)); };
    fns.H = [C](const Eigen::VectorXd&) -> Eigen::RowVectorXd { return C; };
    fns.noise = noise_matrices(model);
    return fns;
}

Eigen::VectorXd kalman_gain(const EkfState& state, const EkfModelFns& fns)
{
    const Eigen::RowVectorXd H = fns.H(state.x_hat);
    return (state.P * H.transpose() + fns.noise.S) / fns.noise.R;
}

Eigen::MatrixXd riccati_step(const EkfState& state, const EkfModelFns& fns, double dt)
{
    if (!(dt > 0.0)) {
        throw std::invalid_argument("riccati_step: dt must be positive");
    }
    const Eigen::MatrixXd F = fns.F(state.x_hat);
    const Eigen::RowVectorXd H = fns.H(state.x_hat);
    const Eigen::VectorXd cross = state.P * H.transpose() + fns.noise.S;
    const Eigen::MatrixXd rate =
        F * state.P + state.P * F.transpose() + fns.noise.Q - cross * cross.transpose() / fns.noise.R;
    Eigen::MatrixXd next = state.P + dt * rate;
    next = 0.5 * (next + next.transpose()).eval();
    if (!next.allFinite()) {
        throw NumericalInstability("riccati_step: covariance diverged; reduce dt");
    }
    const double min_eig = min_symmetric_eigenvalue(next);
    if (min_eig < kCovarianceFloor) {
        throw NumericalInstability("riccati_step: covariance eigenvalue " + std::to_string(min_eig) +
                                   " below zero; reduce dt");
    }
    return next;
}

EkfState qekf_step(const EkfState& state, double dy, double dt, const EkfModelFns& fns)
{
    const Eigen::VectorXd K = kalman_gain(state, fns);
    EkfState next;
    next.x_hat = state.x_hat + (fns.f(state.x_hat) - K * fns.h(state.x_hat)) * dt + K * dy;
    next.P = riccati_step(state, fns, dt);
    if (!next.x_hat.allFinite()) {
        throw NumericalInstability("qekf_step: state estimate diverged; reduce dt");
    }
    return next;
}

QekfTrajectory run_ekf(const EkfModelFns& fns, const EkfState& initial, const MeasurementRecord& record)
{
    if (record.dy.size() != record.grid.steps) {
        throw std::invalid_argument("run_ekf: record length does not match its grid");
    }
    QekfTrajectory traj;
    traj.x_hat.reserve(record.grid.points());
    EkfState state = initial;
    traj.x_hat.push_back(state.x_hat);
    traj.min_eigenvalue_P = min_symmetric_eigenvalue(state.P);
    traj.max_asymmetry_P = (state.P - state.P.transpose()).cwiseAbs().maxCoeff();
    for (std::size_t k = 0; k < record.grid.steps; ++k) {
        state = qekf_step(state, record.dy[k], record.grid.dt, fns);
        traj.x_hat.push_back(state.x_hat);
        traj.min_eigenvalue_P = std::min(traj.min_eigenvalue_P, min_symmetric_eigenvalue(state.P));
        traj.max_asymmetry_P =
            std::max(traj.max_asymmetry_P, (state.P - state.P.transpose()).cwiseAbs().maxCoeff());
    }
    traj.final_state = std::move(state);
    return traj;
}

QekfTrajectory run_qekf(const CombinedModel& model, const EkfState& initial, const MeasurementRecord& record)
{
    QekfTrajectory traj = run_ekf(make_ekf_fns(model), initial, record);
    traj.q_hat.reserve(traj.x_hat.size());
    for (const Eigen::VectorXd& x : traj.x_hat) {
        traj.q_hat.push_back(x(static_cast<Eigen::Index>(index(Quadrature::Q2))) / model.alpha());
    }
    return traj;
}

EkfState initial_ekf_state(const Vector4& base, double xi, double p0_scale)
{
    return EkfState{base + xi * Vector4::Constant(0.5), p0_scale * Eigen::MatrixXd::Identity(4, 4)};
}

}  // namespace hqc
