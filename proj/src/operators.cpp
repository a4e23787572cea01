// operators.cpp — Truncated Fock-space operator algebra

#include "hqc/operators.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <utility>

namespace hqc {

namespace {

Eigen::Index as_index(std::size_t n) { return static_cast<Eigen::Index>(n); }

void require_fock_dim(std::size_t n)
{
    if (n < 2) {
        throw DimensionError("Fock truncation must keep at least 2 levels, got " + std::to_string(n));
    }
}

void require_same_dim(const Operator& lhs, const Operator& rhs, const char* what)
{
    if (lhs.dim() != rhs.dim()) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(lhs.dim()) +
                             " vs " + std::to_string(rhs.dim()) + ")");
    }
}

}  // namespace

Operator::Operator(Matrix entries) : entries_(std::move(entries))
{
    if (entries_.rows() != entries_.cols()) {
        throw DimensionError("Operator matrix must be square");
    }
}

Operator Operator::identity(std::size_t dim)
{
    return Operator(Matrix::Identity(as_index(dim), as_index(dim)));
}

Operator Operator::zero(std::size_t dim)
{
    return Operator(Matrix::Zero(as_index(dim), as_index(dim)));
}

double Operator::hermiticity_error() const
{
    if (entries_.size() == 0) return 0.0;
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

Operator& Operator::operator+=(const Operator& rhs)
{
    require_same_dim(*this, rhs, "operator+");
    entries_ += rhs.entries_;
    return *this;
}

Operator& Operator::operator-=(const Operator& rhs)
{
    require_same_dim(*this, rhs, "operator-");
    entries_ -= rhs.entries_;
    return *this;
}

Operator& Operator::operator*=(Complex s)
{
    entries_ *= s;
    return *this;
}

Operator operator*(const Operator& lhs, const Operator& rhs)
{
    require_same_dim(lhs, rhs, "operator*");
    return Operator(lhs.entries_ * rhs.entries_);
}

SpaceLayout::SpaceLayout(std::vector<std::size_t> dims) : dims_(std::move(dims))
{
    if (dims_.empty()) {
        throw DimensionError("SpaceLayout needs at least one subsystem");
    }
    for (std::size_t d : dims_) {
        require_fock_dim(d);
    }
}

std::size_t SpaceLayout::dim(std::size_t slot) const
{
    if (slot >= dims_.size()) {
        throw DimensionError("subsystem slot " + std::to_string(slot) + " out of range");
    }
    return dims_[slot];
}

std::size_t SpaceLayout::total() const
{
    return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
}

Operator fock_annihilation(std::size_t n)
{
    require_fock_dim(n);
    Matrix a = Matrix::Zero(as_index(n), as_index(n));
    for (std::size_t k = 1; k < n; ++k) {
        a(as_index(k - 1), as_index(k)) = std::sqrt(static_cast<double>(k));
    }
    return Operator(std::move(a));
}

Operator fock_creation(std::size_t n)
{
    return fock_annihilation(n).adjoint();
}

Operator number_operator(std::size_t n)
{
    const Operator a = fock_annihilation(n);
    return a.adjoint() * a;
}

Operator position_quadrature(std::size_t n)
{
    const Operator a = fock_annihilation(n);
    return (a + a.adjoint()) * Complex(0.5, 0.0);
}

Operator momentum_quadrature(std::size_t n)
{
    const Operator a = fock_annihilation(n);
    // 1/(2i) = -i/2
    return (a - a.adjoint()) * Complex(0.0, -0.5);
}

Operator kron(const Operator& lhs, const Operator& rhs)
{
    const Matrix& A = lhs.matrix();
    const Matrix& B = rhs.matrix();
    const Eigen::Index rb = B.rows();
    Matrix out(A.rows() * rb, A.cols() * rb);
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            out.block(i * rb, j * rb, rb, rb) = A(i, j) * B;
        }
    }
    return Operator(std::move(out));
}

Operator commutator(const Operator& lhs, const Operator& rhs)
{
    return lhs * rhs - rhs * lhs;
}

Operator embed(const Operator& op, std::size_t slot, const SpaceLayout& layout)
{
    const std::size_t target = layout.dim(slot);
    if (op.dim() != target) {
        throw DimensionError("embed: operator dimension " + std::to_string(op.dim()) +
                             " does not match slot " + std::to_string(slot) + " dimension " +
                             std::to_string(target));
    }
    std::size_t before = 1;
    for (std::size_t s = 0; s < slot; ++s) before *= layout.dims()[s];
    std::size_t after = 1;
    for (std::size_t s = slot + 1; s < layout.subsystems(); ++s) after *= layout.dims()[s];

    Operator out = op;
    if (before > 1) out = kron(Operator::identity(before), out);
    if (after > 1) out = kron(out, Operator::identity(after));
    return out;
}

Complex expectation(const DensityState& state, const Operator& x)
{
    if (state.dim() != x.dim()) {
        throw DimensionError("expectation: state dimension " + std::to_string(state.dim()) +
                             " does not match operator dimension " + std::to_string(x.dim()));
    }
    // Tr(rho X) without forming the product.
    return (state.rho.transpose().cwiseProduct(x.matrix())).sum();
}

DensityState pure_state(const Eigen::VectorXcd& psi)
{
    const double norm = psi.norm();
    if (norm == 0.0) {
        throw std::invalid_argument("pure_state: zero vector");
    }
    const Eigen::VectorXcd unit = psi / norm;
    return DensityState{unit * unit.adjoint()};
}

DensityState product_state(const DensityState& first, const DensityState& second)
{
    return DensityState{kron(Operator(first.rho), Operator(second.rho)).matrix()};
}

}  // namespace hqc
