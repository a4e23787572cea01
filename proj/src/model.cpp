// model.cpp — Cavity plus disturbance-cavity (S, L, H) model

#include "hqc/model.hpp"

#include <cmath>
#include <string>

namespace hqc {

AnalogMapping map_classical_to_cavity(const OuParams& p)
{
    if (!(p.u > 0.0)) {
        throw InvalidParameter("OU decay rate u must be > 0 for a cavity analog (got " +
                               std::to_string(p.u) + ")");
    }
    if (p.v == 0.0 || !std::isfinite(p.v)) {
        throw InvalidParameter("OU diffusion gain v must be finite and non-zero");
    }
    // Positive branch; alpha carries the sign of v so that 4 (alpha v)^2 = 2u.
    return AnalogMapping{std::sqrt(2.0 * p.u) / (2.0 * p.v), 2.0 * p.u};
}

DiffusionMatrix diffusion_matrix(double k1, double k2)
{
    const Complex i(0.0, 1.0);
    const double s1 = std::sqrt(k1);
    const double s2 = std::sqrt(k2);
    DiffusionMatrix G = DiffusionMatrix::Zero();
    G(0, 0) = -s1 / 2.0;
    G(1, 0) = -s1 / (2.0 * i);
    G(2, 1) = -s2 / 2.0;
    G(3, 1) = -s2 / (2.0 * i);
    return G;
}

Matrix4 symmetrized_covariance(const DiffusionMatrix& G)
{
    const Eigen::Matrix4cd GGh = G * G.adjoint();
    const Eigen::Matrix4cd sym = 0.5 * (GGh + GGh.transpose());
    return sym.real();
}

CombinedModel build_combined_model(double k1, const AnalogMapping& mapping, const SpaceLayout& layout)
{
    if (!(k1 > 0.0)) {
        throw InvalidParameter("coupling k1 must be > 0 (got " + std::to_string(k1) + ")");
    }
    if (!(mapping.k2 > 0.0)) {
        throw InvalidParameter("coupling k2 must be > 0 (got " + std::to_string(mapping.k2) + ")");
    }
    if (mapping.alpha == 0.0 || !std::isfinite(mapping.alpha)) {
        throw InvalidParameter("analog scaling alpha must be finite and non-zero");
    }
    if (layout.subsystems() != 2) {
        throw DimensionError("combined model needs exactly 2 subsystems, got " +
                             std::to_string(layout.subsystems()));
    }

    CombinedModel m;
    m.layout = layout;
    m.k1 = k1;
    m.mapping = mapping;

    const std::size_t n1 = layout.dim(0);
    const std::size_t n2 = layout.dim(1);
    const Operator a = embed(fock_annihilation(n1), 0, layout);
    const Operator b = embed(fock_annihilation(n2), 1, layout);
    const Operator n_a = embed(number_operator(n1), 0, layout);

    m.quadratures = {
        embed(position_quadrature(n1), 0, layout),
        embed(momentum_quadrature(n1), 0, layout),
        embed(position_quadrature(n2), 1, layout),
        embed(momentum_quadrature(n2), 1, layout),
    };

    m.H = m.quadratures[index(Quadrature::Q2)] * n_a * Complex(1.0 / mapping.alpha, 0.0);
    m.L = {a * Complex(std::sqrt(k1), 0.0), b * Complex(std::sqrt(mapping.k2), 0.0)};

    m.C = RowVector4(2.0 * std::sqrt(k1), 0.0, 0.0, 0.0);
    m.G = diffusion_matrix(k1, mapping.k2);
    m.Gq = symmetrized_covariance(m.G);

    Matrix decay = Matrix::Zero(m.H.matrix().rows(), m.H.matrix().cols());
    for (const Operator& Lj : m.L) decay += Lj.matrix().adjoint() * Lj.matrix();
    m.effective_generator = Complex(0.0, -1.0) * m.H.matrix() - 0.5 * decay;
    return m;
}

Matrix lindblad_drift(const Operator& H, std::span<const Operator> L, const Matrix& rho)
{
    if (rho.rows() != rho.cols() || static_cast<std::size_t>(rho.rows()) != H.dim()) {
        throw DimensionError("lindblad_drift: state and Hamiltonian dimensions differ");
    }
    const Complex minus_i(0.0, -1.0);
    Matrix out = minus_i * (H.matrix() * rho - rho * H.matrix());
    for (const Operator& Lj : L) {
        if (Lj.dim() != H.dim()) {
            throw DimensionError("lindblad_drift: coupling operator dimension differs");
        }
        const Matrix& l = Lj.matrix();
        const Matrix ldl = l.adjoint() * l;
        out += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
    }
    return out;
}

Matrix lindblad_drift(const CombinedModel& model, const DensityState& state)
{
    if (state.dim() != model.dim()) {
        throw DimensionError("lindblad_drift: state dimension " + std::to_string(state.dim()) +
                             " does not match model dimension " + std::to_string(model.dim()));
    }
    const Matrix& K = model.effective_generator;
    Matrix out = K * state.rho + state.rho * K.adjoint();
    for (const Operator& Lj : model.L) {
        out += Lj.matrix() * state.rho * Lj.matrix().adjoint();
    }
    return out;
}

Vector4 quadrature_expectations(const CombinedModel& model, const DensityState& state)
{
    Vector4 x;
    for (std::size_t i = 0; i < 4; ++i) {
        x(static_cast<Eigen::Index>(i)) = expectation(state, model.quadratures[i]).real();
    }
    return x;
}

DensityState default_initial_state(const SpaceLayout& layout)
{
    if (layout.subsystems() != 2) {
        throw DimensionError("default_initial_state expects two subsystems");
    }
    auto plus = [](std::size_t n) {
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
        psi(0) = 1.0;
        psi(1) = 1.0;
        return pure_state(psi);
    };
    return product_state(plus(layout.dim(0)), plus(layout.dim(1)));
}

}  // namespace hqc
