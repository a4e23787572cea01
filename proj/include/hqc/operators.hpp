// operators.hpp — Truncated Fock-space operator algebra

#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hqc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Raised when operator or subsystem dimensions do not line up.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense square complex matrix acting on a truncated Hilbert space.
class Operator {
public:
    Operator() = default;
    explicit Operator(Matrix entries);

    static Operator identity(std::size_t dim);
    static Operator zero(std::size_t dim);

    std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
    const Matrix& matrix() const { return entries_; }

    Operator adjoint() const { return Operator(entries_.adjoint()); }
    Complex trace() const { return entries_.trace(); }

    /// Largest elementwise deviation from Hermiticity.
    double hermiticity_error() const;
    bool is_hermitian(double tol = 1e-12) const { return hermiticity_error() < tol; }

    Operator& operator+=(const Operator& rhs);
    Operator& operator-=(const Operator& rhs);
    Operator& operator*=(Complex s);

    friend Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
    friend Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }
    friend Operator operator*(Operator lhs, Complex s) { return lhs *= s; }
    friend Operator operator*(Complex s, Operator rhs) { return rhs *= s; }
    friend Operator operator*(const Operator& lhs, const Operator& rhs);

private:
    Matrix entries_;
};

/// Ordered per-subsystem truncation dimensions of a tensor-product space.
class SpaceLayout {
public:
    explicit SpaceLayout(std::vector<std::size_t> dims);

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t subsystems() const { return dims_.size(); }
    std::size_t dim(std::size_t slot) const;
    std::size_t total() const;

    bool operator==(const SpaceLayout&) const = default;

private:
    std::vector<std::size_t> dims_;
};

/// Density matrix of the full system. The invariants (unit trace,
/// Hermiticity, positivity) are checked by `state_health`, not enforced
/// on construction, since filters build intermediate states.
struct DensityState {
    Matrix rho;

    std::size_t dim() const { return static_cast<std::size_t>(rho.rows()); }
};

/// Lowering operator a on n Fock levels: entry (k-1, k) = sqrt(k).
Operator fock_annihilation(std::size_t n);
Operator fock_creation(std::size_t n);
Operator number_operator(std::size_t n);
/// Q = (a + a†)/2
Operator position_quadrature(std::size_t n);
/// P = (a - a†)/(2i)
Operator momentum_quadrature(std::size_t n);

Operator kron(const Operator& lhs, const Operator& rhs);
Operator commutator(const Operator& lhs, const Operator& rhs);

/// Places `op` on subsystem `slot` with identities on every other slot.
Operator embed(const Operator& op, std::size_t slot, const SpaceLayout& layout);

/// Tr(rho X).
Complex expectation(const DensityState& state, const Operator& x);

/// Pure state |psi><psi| normalised from an arbitrary vector.
DensityState pure_state(const Eigen::VectorXcd& psi);
DensityState product_state(const DensityState& first, const DensityState& second);

}  // namespace hqc
