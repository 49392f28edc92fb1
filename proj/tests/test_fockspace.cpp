#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gravidec/errors.hpp"
#include "gravidec/fockspace.hpp"
#include "gravidec/states.hpp"
#include "support.hpp"

using namespace gravidec;
using testsupport::Approx;

TEST_CASE("ladder operators") {
    const Ladder l2 = ladder(2);
    CHECK(l2.a.data(0, 1) == cplx(1.0, 0.0));
    CHECK(l2.a.data(0, 0) == cplx(0.0, 0.0));
    CHECK(l2.a.data(1, 0) == cplx(0.0, 0.0));
    CHECK(l2.a.data(1, 1) == cplx(0.0, 0.0));

    const int d = 9;
    const Ladder l = ladder(d);
    CHECK((l.a_dag.data - l.a.data.adjoint()).norm() == 0.0);
    for (int n = 0; n < d; ++n) CHECK(l.n.data(n, n).real() == Approx(n).epsilon(1e-15));
    const CMatrix comm = l.a.data * l.a_dag.data - l.a_dag.data * l.a.data;
    for (int i = 0; i < d - 1; ++i) CHECK(comm(i, i).real() == Approx(1.0).epsilon(1e-13));
    CHECK(comm(d - 1, d - 1).real() == Approx(1.0 - d).epsilon(1e-15));
    CHECK_THROWS_AS(ladder(1), DimensionError);
}

TEST_CASE("kron ordering puts the first factor first") {
    CMatrix a(2, 2), b(3, 3);
    a << 1, 2, 3, 4;
    b.setZero();
    b(0, 1) = 1.0;
    const CMatrix k = kron(a, b);
    CHECK(k.rows() == 6);
    // |i0 i1> sits at i0 * 3 + i1
    CHECK(k(1 * 3 + 0, 0 * 3 + 1) == cplx(3.0, 0.0));
    CHECK(k(0 * 3 + 0, 1 * 3 + 1) == cplx(2.0, 0.0));
}

TEST_CASE("displacement basics") {
    const Displacement id = displacement({0.0, 0.0}, 12);
    CHECK((id.op.data - identity(12)).norm() < 1e-14);

    const int d = 64;
    testsupport::Gen gen(21);
    for (int i = 0; i < 10; ++i) {
        const cplx alpha = gen.complex_in_disk(std::sqrt(d / 8.0));
        const Displacement D = displacement(alpha, d);
        CHECK_FALSE(D.guard_violated);
        const CMatrix u = D.op.data * D.op.data.adjoint();
        CHECK((u - identity(d)).norm() < 1e-10);
        // <n> for D|0> restricted to well-populated levels equals |alpha|^2
        const CVector psi = D.op.data.col(0);
        double mean = 0.0;
        for (int n = 0; n < d; ++n) mean += n * std::norm(psi(n));
        CHECK(mean == Approx(std::norm(alpha)).epsilon(1e-8));
        // and matches the coherent-state amplitudes
        CHECK((psi - coherent_amplitudes(alpha, d)).norm() < 1e-8);
    }
    CHECK(displacement({3.0, 0.0}, 20).guard_violated);
    CHECK_FALSE(displacement({2.0, 0.0}, 16).guard_violated);
}

TEST_CASE("displacement composition on the low-energy block") {
    const int d = 80, keep = 12;
    testsupport::Gen gen(22);
    for (int i = 0; i < 8; ++i) {
        const cplx a = gen.complex_in_disk(1.2), b = gen.complex_in_disk(1.2);
        const CMatrix lhs = displacement(a, d).op.data * displacement(b, d).op.data;
        const CMatrix rhs = std::exp(0.5 * (a * std::conj(b) - std::conj(a) * b)) * displacement(a + b, d).op.data;
        CHECK((lhs - rhs).topLeftCorner(keep, keep).norm() < 1e-8);
    }
}

TEST_CASE("displacement family matches single displacements") {
    const int d = 30;
    const DisplacementFamily fam(0.7, d);
    for (double s : {0.0, 0.3, -0.8, 1.5}) {
        const CMatrix ref = displacement(std::polar(s, 0.7), d).op.data;
        CHECK((fam.at(s) - ref).norm() < 1e-11);
    }
    CHECK(fam.guard_violated(3.0));
    CHECK_FALSE(fam.guard_violated(2.0));
}

TEST_CASE("hermitian propagator") {
    testsupport::Gen gen(23);
    const CMatrix a = gen.complex_matrix(7, 7);
    const CMatrix h = 0.5 * (a + a.adjoint());
    const HermitianPropagator prop(h);
    CHECK((prop.at(0.0) - identity(7)).norm() < 1e-13);
    const CMatrix u = prop.at(0.37);
    CHECK((u * u.adjoint() - identity(7)).norm() < 1e-13);
    CHECK((prop.at(0.2) * prop.at(0.17) - u).norm() < 1e-12);
    // first-order check: (U(dt) - U(-dt)) / (2 dt) -> -i H
    const double dt = 1e-5;
    CHECK(((prop.at(dt) - prop.at(-dt)) / (2.0 * dt) + cplx(0.0, 1.0) * h).norm() < 1e-8);

    const RMatrix r = (RMatrix(2, 2) << 0.0, 1.0, 1.0, 0.0).finished();
    const HermitianPropagator real_prop(r);
    const CMatrix x = real_prop.at(std::numbers::pi / 2.0);
    // exp(-i sigma_x pi/2) = -i sigma_x
    CHECK(std::abs(x(0, 1) - cplx(0.0, -1.0)) < 1e-14);
    CHECK(std::abs(x(0, 0)) < 1e-14);
}

TEST_CASE("ground state wavefunction and orthonormality") {
    const double kappa = 3.0;
    const PositionGrid grid = PositionGrid::uniform(-8.0, 8.0, 801, kappa);
    const RMatrix psi = position_wavefunctions(grid, 30);
    for (std::size_t i = 0; i < grid.size(); i += 37) {
        const double xi = grid.points[i];
        CHECK(psi(static_cast<Eigen::Index>(i), 0) ==
              Approx(std::pow(2.0 * kappa / std::numbers::pi, 0.25) * std::exp(-xi * xi)).epsilon(1e-14));
    }
    const double dx = grid.spacing() / std::sqrt(kappa);
    const RMatrix gram = psi.transpose() * psi * dx;
    CHECK((gram - RMatrix::Identity(30, 30)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("coherent states reconstruct the closed-form wavefunction") {
    const PositionGrid grid = PositionGrid::uniform(-8.0, 8.0, 401);
    const int d = 48;
    const RMatrix psi = position_wavefunctions(grid, d);
    testsupport::Gen gen(24);
    for (int k = 0; k < 10; ++k) {
        const cplx a = gen.complex_in_disk(2.0);
        const CVector c = coherent_amplitudes(a, d);
        const CVector sum = psi.cast<cplx>() * c;
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double xi = grid.points[i];
            const double a1 = a.real(), a2 = a.imag();
            const cplx ref = std::pow(2.0 / std::numbers::pi, 0.25) *
                             std::exp(cplx(-(xi - a1) * (xi - a1), 2.0 * a2 * xi - a1 * a2));
            worst = std::max(worst, std::abs(sum(static_cast<Eigen::Index>(i)) - ref));
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("fock_to_position") {
    const PositionGrid grid = PositionGrid::standard(2.0);
    DensityMatrix ground;
    ground.data = CMatrix::Zero(6, 6);
    ground.data(0, 0) = 1.0;
    const CMatrix g = fock_to_position(ground, grid);
    for (std::size_t i = 0; i < grid.size(); i += 97) {
        for (std::size_t j = 0; j < grid.size(); j += 101) {
            const double xi = grid.points[i], xj = grid.points[j];
            const double ref = std::sqrt(2.0 * 2.0 / std::numbers::pi) * std::exp(-xi * xi - xj * xj);
            CHECK(g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)).real() == Approx(ref).epsilon(1e-13));
        }
    }

    testsupport::Gen gen(25);
    const DensityMatrix rho = gen.density(10);
    const CMatrix m = fock_to_position(rho, grid);
    CHECK((m - m.adjoint()).norm() < 1e-13 * m.norm());
    const double dx = grid.spacing() / std::sqrt(grid.kappa);
    CHECK(m.diagonal().sum().real() * dx == Approx(1.0).epsilon(1e-6));

    // linearity
    const DensityMatrix rho2 = gen.density(10);
    DensityMatrix mix;
    mix.data = 0.3 * rho.data + 0.7 * rho2.data;
    CHECK((fock_to_position(mix, grid) - (0.3 * m + 0.7 * fock_to_position(rho2, grid))).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("partial trace") {
    testsupport::Gen gen(26);
    const DensityMatrix a = gen.density(3), b = gen.density(4);
    DensityMatrix joint;
    joint.data = kron(a.data, b.data);
    const std::vector<int> dims{3, 4};
    CHECK((partial_trace(joint, dims, 0).data - a.data).norm() < 1e-14);
    CHECK((partial_trace(joint, dims, 1).data - b.data).norm() < 1e-14);

    // (|00> + |11>)/sqrt2
    DensityMatrix bell;
    bell.data = CMatrix::Zero(4, 4);
    bell.data(0, 0) = bell.data(0, 3) = bell.data(3, 0) = bell.data(3, 3) = 0.5;
    const std::vector<int> qubits{2, 2};
    CHECK((partial_trace(bell, qubits, 0).data - 0.5 * identity(2)).norm() < 1e-15);

    const std::vector<int> three{2, 3, 2};
    for (int i = 0; i < 20; ++i) {
        const DensityMatrix r = gen.density(12);
        for (int keep = 0; keep < 3; ++keep) {
            CHECK(std::abs(partial_trace(r, three, keep).trace() - r.trace()) < 1e-12);
        }
    }
    const std::vector<int> wrong{3, 3};
    CHECK_THROWS_AS(partial_trace(bell, wrong, 0), DimensionError);
}

TEST_CASE("density checks") {
    testsupport::Gen gen(27);
    const DensityMatrix rho = gen.density(5);
    CHECK(check_density(rho).ok);
    DensityMatrix bad = rho;
    bad.data(0, 1) += 1e-6;
    CHECK_FALSE(check_density(bad).ok);
    DensityMatrix neg;
    neg.data = CMatrix::Zero(2, 2);
    neg.data(0, 0) = 1.5;
    neg.data(1, 1) = -0.5;
    CHECK_FALSE(check_density(neg).ok);
    DensityMatrix cut = rho;
    cut.data *= 0.9;
    CHECK_FALSE(check_density(cut).ok);
    cut.tail_mass = 0.1;
    CHECK(check_density(cut).ok);
}

TEST_CASE("grid and truncation validation") {
    const PositionGrid g = PositionGrid::standard();
    CHECK(g.size() == 801);
    CHECK(g.points.front() == -8.0);
    CHECK(g.points.back() == 8.0);
    CHECK(g.spacing() == Approx(0.02).epsilon(1e-14));
    CHECK_THROWS_AS(PositionGrid::uniform(1.0, -1.0, 10), DomainError);
    PositionGrid bad;
    bad.points = {0.0, 0.0};
    CHECK_THROWS_AS(bad.validate(), DomainError);

    TruncationPolicy p;
    CHECK_NOTHROW(p.validate());
    p.tail_epsilon = 1e-2;
    CHECK_THROWS(p.validate());
    p.tail_epsilon = 0.0;
    CHECK_THROWS(p.validate());
}

TEST_CASE("frobenius distance") {
    CMatrix a = CMatrix::Zero(2, 2), b = CMatrix::Zero(2, 2);
    b(0, 0) = 3.0;
    b(1, 1) = cplx(0.0, 4.0);
    CHECK(frobenius_distance(a, b) == Approx(5.0));
}

TEST_CASE("purity is Tr(rho^2)") {
    testsupport::Gen gen(29);
    for (int i = 0; i < 20; ++i) {
        const DensityMatrix rho = gen.density(gen.integer(2, 12));
        CHECK(rho.purity() == Approx((rho.data * rho.data).trace().real()).epsilon(1e-12));
        CHECK(rho.purity() <= 1.0 + 1e-12);
    }
    DensityMatrix plus;
    plus.data = CMatrix::Constant(2, 2, 0.5);
    plus.data(0, 1) = cplx(0.0, 0.5);
    plus.data(1, 0) = cplx(0.0, -0.5);
    CHECK(plus.purity() == Approx(1.0).epsilon(1e-15));
}
