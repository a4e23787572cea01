// model.hpp — Cavity plus disturbance-cavity (S, L, H) model

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>

#include "hqc/operators.hpp"

namespace hqc {

/// Raised for physically meaningless parameters (non-positive rates etc.).
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Ornstein–Uhlenbeck disturbance dq = -u q dt - v dw, q(0) = q0.
struct OuParams {
    double u{0.25};
    double v{0.125};
    double q0{0.17677669529663687};  // 1/(4 sqrt 2)
};

/// Maps the classical disturbance onto the quadrature Q2 of an auxiliary
/// cavity: q ~ Q2 / alpha, with decay rate k2 = 2u.
struct AnalogMapping {
    double alpha{};
    double k2{};
};

/// Index into the quadrature vector x = (Q1, P1, Q2, P2).
enum class Quadrature : std::size_t { Q1 = 0, P1 = 1, Q2 = 2, P2 = 3 };

constexpr std::size_t index(Quadrature q) { return static_cast<std::size_t>(q); }

using Vector4 = Eigen::Vector4d;
using Matrix4 = Eigen::Matrix4d;
using RowVector4 = Eigen::RowVector4d;
using DiffusionMatrix = Eigen::Matrix<Complex, 4, 2>;

/// Two-cavity system: S1 (mode a, monitored) driven through H = Q2 a†a / alpha
/// by S2 (mode b), the quantum analog of the classical disturbance.
struct CombinedModel {
    SpaceLayout layout{{2, 2}};
    double k1{};
    AnalogMapping mapping;

    Operator H;
    /// L[0] = sqrt(k1) a (homodyne-monitored), L[1] = sqrt(k2) b.
    std::array<Operator, 2> L;
    /// Scattering matrix; identity for this model family.
    Eigen::Matrix2cd S{Eigen::Matrix2cd::Identity()};

    /// Quadrature operators on the full space, ordered as `Quadrature`.
    std::array<Operator, 4> quadratures;

    /// Measurement row h(x) = C x.
    RowVector4 C;
    /// Noise input matrix G of dx = f dt + G dz + G* dz*.
    DiffusionMatrix G;
    /// Process covariance 1/2 (G G† + (G G†)^T).
    Matrix4 Gq;

    /// -iH - 1/2 sum_j L_j† L_j, shared by the drift and the filter.
    Matrix effective_generator;

    double alpha() const { return mapping.alpha; }
    double k2() const { return mapping.k2; }
    std::size_t dim() const { return layout.total(); }
};

AnalogMapping map_classical_to_cavity(const OuParams& p);

CombinedModel build_combined_model(double k1, const AnalogMapping& mapping,
                                   const SpaceLayout& layout = SpaceLayout({2, 2}));

/// Noise input matrix G for coupling rates k1, k2.
DiffusionMatrix diffusion_matrix(double k1, double k2);

/// 1/2 (G G† + (G G†)^T); real because the imaginary parts cancel.
Matrix4 symmetrized_covariance(const DiffusionMatrix& G);

/// -i[H, rho] + sum_j (L_j rho L_j† - 1/2 {L_j† L_j, rho})
Matrix lindblad_drift(const Operator& H, std::span<const Operator> L, const Matrix& rho);
Matrix lindblad_drift(const CombinedModel& model, const DensityState& state);

/// (Tr[Q1 rho], Tr[P1 rho], Tr[Q2 rho], Tr[P2 rho]).
Vector4 quadrature_expectations(const CombinedModel& model, const DensityState& state);

/// rho1 ⊗ rho2 with rho_i = (I + sigma_x)/2 placed on the two lowest Fock levels.
DensityState default_initial_state(const SpaceLayout& layout);

}  // namespace hqc
