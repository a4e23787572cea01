#include "doctest.h"

#include <cmath>

#include "generators.hpp"
#include "hqc/model.hpp"

using namespace hqc;

namespace {

CombinedModel reference_model(SpaceLayout layout = SpaceLayout({2, 2}))
{
    return build_combined_model(0.55, map_classical_to_cavity(OuParams{0.25, 0.125, 0.0}), layout);
}

}  // namespace

TEST_CASE("map_classical_to_cavity")
{
    const AnalogMapping m = map_classical_to_cavity(OuParams{0.25, 0.125, 0.0});
    CHECK(m.alpha == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK(m.k2 == 0.5);

    const AnalogMapping unit = map_classical_to_cavity(OuParams{0.5, 0.5, 0.0});
    CHECK(unit.alpha == doctest::Approx(1.0));
    CHECK(unit.k2 == 1.0);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> pos(0.01, 5.0);
    std::uniform_real_distribution<double> gain(-3.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const OuParams p{pos(rng), gain(rng), 0.0};
        const AnalogMapping mp = map_classical_to_cavity(p);
        CHECK(std::abs(4.0 * (mp.alpha * p.v) * (mp.alpha * p.v) - mp.k2) < 1e-12);
    }

    CHECK_THROWS_AS(map_classical_to_cavity(OuParams{0.0, 0.1, 0.0}), InvalidParameter);
    CHECK_THROWS_AS(map_classical_to_cavity(OuParams{-1.0, 0.1, 0.0}), InvalidParameter);
    CHECK_THROWS_AS(map_classical_to_cavity(OuParams{0.25, 0.0, 0.0}), InvalidParameter);
}

TEST_CASE("build_combined_model at the reference parameters")
{
    const CombinedModel m = reference_model();
    CHECK(m.dim() == 4);
    CHECK(m.H.is_hermitian());
    CHECK(m.H.matrix().norm() > 0.0);
    // Spectral norm of Q2 a†a / alpha on two levels each: 0.5 / (2 sqrt 2).
    CHECK(m.H.matrix().operatorNorm() == doctest::Approx(0.17677669529663687).epsilon(1e-12));

    CHECK(m.C(0) == doctest::Approx(1.4832396974191326).epsilon(1e-15));
    CHECK(m.C(1) == 0.0);
    CHECK(m.C(2) == 0.0);
    CHECK(m.C(3) == 0.0);

    const Eigen::Vector4d gq(0.1375, 0.1375, 0.125, 0.125);
    CHECK((m.Gq - Eigen::Matrix4d(gq.asDiagonal())).cwiseAbs().maxCoeff() < 1e-15);

    CHECK(m.S.isIdentity());
    CHECK((m.S.adjoint() * m.S).isIdentity(1e-15));

    // H commutes with the photon number of S1.
    const Operator na = embed(number_operator(2), 0, m.layout);
    CHECK(commutator(m.H, na).matrix().cwiseAbs().maxCoeff() < 1e-15);

    CHECK_THROWS_AS(build_combined_model(0.0, m.mapping, m.layout), InvalidParameter);
    CHECK_THROWS_AS(build_combined_model(-0.1, m.mapping, m.layout), InvalidParameter);
    CHECK_THROWS_AS(build_combined_model(0.55, m.mapping, SpaceLayout({2, 2, 2})), DimensionError);
}

TEST_CASE("Gq matches a brute-force G G† symmetrisation")
{
    for (double k1 : {0.1, 0.55, 2.0}) {
        for (double k2 : {0.5, 1.3}) {
            // G written out entry by entry.
            const Complex i(0.0, 1.0);
            Eigen::Matrix<Complex, 4, 2> G = Eigen::Matrix<Complex, 4, 2>::Zero();
            G(0, 0) = -std::sqrt(k1) / 2.0;
            G(1, 0) = -std::sqrt(k1) / (2.0 * i);
            G(2, 1) = -std::sqrt(k2) / 2.0;
            G(3, 1) = -std::sqrt(k2) / (2.0 * i);
            Eigen::Matrix4d brute;
            for (int r = 0; r < 4; ++r) {
                for (int c = 0; c < 4; ++c) {
                    Complex ggh_rc = 0.0, ggh_cr = 0.0;
                    for (int k = 0; k < 2; ++k) {
                        ggh_rc += G(r, k) * std::conj(G(c, k));
                        ggh_cr += G(c, k) * std::conj(G(r, k));
                    }
                    const Complex sym = 0.5 * (ggh_rc + ggh_cr);
                    CHECK(std::abs(sym.imag()) < 1e-15);
                    brute(r, c) = sym.real();
                }
            }
            const Eigen::Vector4d d(k1 / 4, k1 / 4, k2 / 4, k2 / 4);
            CHECK((brute - Eigen::Matrix4d(d.asDiagonal())).cwiseAbs().maxCoeff() < 1e-15);
            CHECK((symmetrized_covariance(diffusion_matrix(k1, k2)) - brute).cwiseAbs().maxCoeff() < 1e-15);
        }
    }
}

TEST_CASE("lindblad_drift examples")
{
    SUBCASE("closed system at rest")
    {
        std::mt19937_64 rng(1);
        const DensityState rho = testing::random_density(rng, 3);
        const Matrix drift = lindblad_drift(Operator::zero(3), std::span<const Operator>{}, rho.rho);
        CHECK(drift.cwiseAbs().maxCoeff() == 0.0);
        const Operator zero = Operator::zero(3);
        CHECK(lindblad_drift(zero, std::span<const Operator>(&zero, 1), rho.rho).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("one photon decays at unit rate")
    {
        Eigen::VectorXcd one = Eigen::VectorXcd::Zero(2);
        one(1) = 1.0;
        const DensityState rho = pure_state(one);
        const Operator a = fock_annihilation(2);
        const Matrix drift = lindblad_drift(Operator::zero(2), std::span<const Operator>(&a, 1), rho.rho);
        const Complex rate = (number_operator(2).matrix() * drift).trace();
        CHECK(std::abs(rate - Complex(-1.0, 0.0)) < 1e-15);
    }
    SUBCASE("dimension mismatch")
    {
        const CombinedModel m = reference_model();
        CHECK_THROWS_AS(lindblad_drift(m, DensityState{Matrix::Identity(3, 3)}), DimensionError);
    }
}

TEST_CASE("lindblad_drift preserves trace and Hermiticity")
{
    std::mt19937_64 rng(21);
    for (const SpaceLayout& layout : {SpaceLayout({2, 2}), SpaceLayout({3, 3}), SpaceLayout({2, 4})}) {
        const CombinedModel m = reference_model(layout);
        for (int trial = 0; trial < 25; ++trial) {
            const DensityState rho = testing::random_density(rng, static_cast<Eigen::Index>(m.dim()));
            const Matrix drift = lindblad_drift(m, rho);
            CHECK(std::abs(drift.trace()) < 1e-12);
            CHECK((drift - drift.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
            // Cached generator and explicit form agree.
            const Matrix explicit_form = lindblad_drift(m.H, m.L, rho.rho);
            CHECK((drift - explicit_form).cwiseAbs().maxCoeff() < 1e-13);
        }
    }
}

TEST_CASE("measurement row is consistent with the coupling operator")
{
    std::mt19937_64 rng(8);
    const CombinedModel m = reference_model();
    const Operator sum = m.L[0] + m.L[0].adjoint();
    for (int trial = 0; trial < 25; ++trial) {
        const DensityState rho = testing::random_density(rng, 4);
        const double cx = m.C.dot(quadrature_expectations(m, rho));
        CHECK(std::abs(cx - expectation(rho, sum).real()) < 1e-10);
    }
}

TEST_CASE("[b, H] equals a†a / (2 alpha) on the ground level of S2")
{
    for (std::size_t n2 : {2u, 3u, 4u}) {
        const SpaceLayout layout({2, n2});
        const CombinedModel m = reference_model(layout);
        const Operator b = embed(fock_annihilation(n2), 1, layout);
        const Operator na = embed(number_operator(2), 0, layout);
        const Matrix lhs = commutator(b, m.H).matrix();
        const Matrix rhs = na.matrix() / (2.0 * m.alpha());
        // Rows/columns of the basis states |j>_a |0>_b.
        for (Eigen::Index ja = 0; ja < 2; ++ja) {
            for (Eigen::Index ka = 0; ka < 2; ++ka) {
                const Eigen::Index r = ja * static_cast<Eigen::Index>(n2);
                const Eigen::Index c = ka * static_cast<Eigen::Index>(n2);
                CHECK(std::abs(lhs(r, c) - rhs(r, c)) < 1e-14);
            }
        }
    }
}

TEST_CASE("default initial state")
{
    const CombinedModel m = reference_model();
    const DensityState rho0 = default_initial_state(m.layout);
    CHECK(std::abs(rho0.rho.trace() - 1.0) < 1e-15);
    const Eigen::Vector4d x = quadrature_expectations(m, rho0);
    CHECK(x(0) == doctest::Approx(0.5));
    CHECK(std::abs(x(1)) < 1e-15);
    CHECK(x(2) == doctest::Approx(0.5));
    CHECK(std::abs(x(3)) < 1e-15);
    CHECK(x(2) / m.alpha() == doctest::Approx(0.17677669529663687).epsilon(1e-14));
}
