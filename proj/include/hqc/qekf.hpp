// qekf.hpp — Quantum extended Kalman filter on the commutative projection
//
// Continuous-time EKF for a single homodyne channel,
//
//   dx = [f(x) - K h(x)] dt + K dy,        K = (P H^T + S) R^{-1}
//   dP/dt = F P + P F^T + Q - (P H^T + S) R^{-1} (P H^T + S)^T
//
// integrated with explicit Euler on the measurement grid.

#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "hqc/grid.hpp"
#include "hqc/model.hpp"
#include "hqc/sme.hpp"

namespace hqc {

struct EkfState {
    Eigen::VectorXd x_hat;
    /// Symmetric error covariance.
    Eigen::MatrixXd P;
};

struct NoiseSpec {
    Eigen::MatrixXd Q;  // process covariance
    double R{1.0};      // measurement covariance (one channel)
    Eigen::VectorXd S;  // process/measurement cross-correlation
};

/// Model callbacks; F must be the Jacobian of f and H that of h.
struct EkfModelFns {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> F;
    std::function<double(const Eigen::VectorXd&)> h;
    std::function<Eigen::RowVectorXd(const Eigen::VectorXd&)> H;
    NoiseSpec noise;
};

/// Drift of x = (Q1, P1, Q2, P2) for the two-cavity model.
Vector4 drift_f(const Vector4& x, const CombinedModel& model);
Matrix4 jacobian_F(const Vector4& x, const CombinedModel& model);
/// Q = 1/2 (G G† + (G G†)^T), R = 1, S = 0.
NoiseSpec noise_matrices(const CombinedModel& model);
EkfModelFns make_ekf_fns(const CombinedModel& model);

/// Euler step of the Riccati equation, symmetrised. Throws
/// NumericalInstability if an eigenvalue of the result drops below -1e-6.
Eigen::MatrixXd riccati_step(const EkfState& state, const EkfModelFns& fns, double dt);
Eigen::VectorXd kalman_gain(const EkfState& state, const EkfModelFns& fns);
EkfState qekf_step(const EkfState& state, double dy, double dt, const EkfModelFns& fns);

struct QekfTrajectory {
    std::vector<Eigen::VectorXd> x_hat;
    /// x_hat[Q2] / alpha at every grid point.
    std::vector<double> q_hat;
    EkfState final_state;
    /// Worst covariance health over the run.
    double min_eigenvalue_P{0.0};
    double max_asymmetry_P{0.0};
};

/// Runs the filter along `record`; q_hat is left empty.
QekfTrajectory run_ekf(const EkfModelFns& fns, const EkfState& initial, const MeasurementRecord& record);
QekfTrajectory run_qekf(const CombinedModel& model, const EkfState& initial, const MeasurementRecord& record);

/// x_hat0 = base + xi (0.5, 0.5, 0.5, 0.5), P0 = p0_scale I.
EkfState initial_ekf_state(const Vector4& base, double xi, double p0_scale);

}  // namespace hqc
