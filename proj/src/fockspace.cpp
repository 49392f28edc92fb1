#include "gravidec/fockspace.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "gravidec/errors.hpp"

namespace gravidec {

double DensityMatrix::purity() const {
    // Tr(rho^2) = sum_ij rho_ij rho_ji = sum_ij |rho_ij|^2 for Hermitian rho.
    return data.cwiseAbs2().sum();
}

ValidityReport check_density(const DensityMatrix& rho, double herm_tol, double trace_tol,
                             double eig_tol) {
    ValidityReport rep;
    rep.hermiticity_error = (rho.data - rho.data.adjoint()).cwiseAbs().maxCoeff();
    rep.trace_error = std::abs(rho.trace() - cplx(1.0 - rho.tail_mass, 0.0));
    const CMatrix herm = 0.5 * (rho.data + rho.data.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = es.eigenvalues().minCoeff();
    rep.ok = rep.hermiticity_error <= herm_tol && rep.trace_error <= trace_tol &&
             rep.min_eigenvalue >= eig_tol;
    return rep;
}

PositionGrid PositionGrid::uniform(double xi_min, double xi_max, int count, double kappa) {
    if (count < 2 || !(xi_max > xi_min)) throw DomainError("grid needs count >= 2 and max > min");
    PositionGrid g;
    g.kappa = kappa;
    g.points.resize(static_cast<std::size_t>(count));
    const double h = (xi_max - xi_min) / (count - 1);
    for (int i = 0; i < count; ++i) g.points[static_cast<std::size_t>(i)] = xi_min + h * i;
    // Pin the symmetric midpoint so symmetric grids contain xi = 0 exactly.
    if (count % 2 == 1 && xi_min == -xi_max) g.points[static_cast<std::size_t>(count / 2)] = 0.0;
    g.validate();
    return g;
}

PositionGrid PositionGrid::standard(double kappa) { return uniform(-8.0, 8.0, 801, kappa); }

double PositionGrid::spacing() const {
    if (points.size() < 2) throw DomainError("grid spacing needs at least two points");
    const double h = (points.back() - points.front()) / static_cast<double>(points.size() - 1);
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (std::abs(points[i] - points[i - 1] - h) > 1e-9 * std::abs(h)) {
            throw DomainError("grid is not uniform");
        }
    }
    return h;
}

void PositionGrid::validate() const {
    if (points.empty()) throw DomainError("position grid is empty");
    if (!(kappa > 0.0)) throw DomainError("grid kappa must be positive");
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i] > points[i - 1])) throw DomainError("grid points must be strictly increasing");
    }
}

void TruncationPolicy::validate() const {
    if (dim_system < 2) throw DimensionError("dim_system must be >= 2");
    if (dim_per_env_mode < 2) throw DimensionError("dim_per_env_mode must be >= 2");
    if (!(tail_epsilon > 0.0 && tail_epsilon <= 1e-3)) {
        throw DomainError("tail_epsilon must lie in (0, 1e-3]");
    }
}

Ladder ladder(int dim) {
    if (dim < 2) throw DimensionError("ladder operators need dim >= 2, got " + std::to_string(dim));
    Ladder l;
    l.a = {dim, CMatrix::Zero(dim, dim), "a"};
    for (int n = 1; n < dim; ++n) l.a.data(n - 1, n) = std::sqrt(static_cast<double>(n));
    l.a_dag = {dim, l.a.data.adjoint(), "a_dag"};
    l.n = {dim, l.a_dag.data * l.a.data, "n"};
    return l;
}

CMatrix identity(int dim) { return CMatrix::Identity(dim, dim); }

namespace {

template <typename M>
M kron_impl(const M& a, const M& b) {
    M out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

CMatrix phase_reconstruct(const CMatrix& vectors, const RVector& eigenvalues, double t) {
    const CVector phases = (eigenvalues * (-t)).unaryExpr([](double x) { return std::polar(1.0, x); });
    return vectors * phases.asDiagonal() * vectors.adjoint();
}

}  // namespace

CMatrix kron(const CMatrix& a, const CMatrix& b) { return kron_impl(a, b); }
RMatrix kron(const RMatrix& a, const RMatrix& b) { return kron_impl(a, b); }

HermitianPropagator::HermitianPropagator(const CMatrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian);
    if (es.info() != Eigen::Success) throw DomainError("eigendecomposition failed");
    eigenvalues_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
}

HermitianPropagator::HermitianPropagator(const RMatrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(symmetric);
    if (es.info() != Eigen::Success) throw DomainError("eigendecomposition failed");
    eigenvalues_ = es.eigenvalues();
    vectors_ = es.eigenvectors().cast<cplx>();
}

CMatrix HermitianPropagator::at(double t) const { return phase_reconstruct(vectors_, eigenvalues_, t); }

CMatrix HermitianPropagator::evolve(const CMatrix& rho, double t) const {
    // Work in the eigenbasis: rho_ab -> rho_ab exp(-i (E_a - E_b) t).
    CMatrix r = vectors_.adjoint() * rho * vectors_;
    const Eigen::Index n = r.rows();
    for (Eigen::Index b = 0; b < n; ++b) {
        for (Eigen::Index a = 0; a < n; ++a) {
            r(a, b) *= std::polar(1.0, -(eigenvalues_(a) - eigenvalues_(b)) * t);
        }
    }
    return vectors_ * r * vectors_.adjoint();
}

Displacement displacement(cplx alpha, int dim) {
    Displacement out;
    out.op.dim = dim;
    out.op.label = "D(" + std::to_string(alpha.real()) + "+" + std::to_string(alpha.imag()) + "i)";
    const double mag = std::abs(alpha);
    if (mag == 0.0) {
        if (dim < 2) throw DimensionError("displacement needs dim >= 2");
        out.op.data = identity(dim);
        return out;
    }
    const DisplacementFamily family(std::arg(alpha), dim);
    out.op.data = family.at(mag);
    out.guard_violated = family.guard_violated(mag);
    return out;
}

DisplacementFamily::DisplacementFamily(double theta, int dim) : dim_(dim) {
    const Ladder l = ladder(dim);
    const cplx e = std::polar(1.0, theta);
    // exp(s (e a^dag - conj(e) a)) = exp(-i s G) with G = i (e a^dag - conj(e) a).
    const CMatrix generator = cplx(0.0, 1.0) * (e * l.a_dag.data - std::conj(e) * l.a.data);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(generator);
    if (es.info() != Eigen::Success) throw DomainError("displacement generator diagonalization failed");
    eigenvalues_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
}

CMatrix DisplacementFamily::at(double s) const { return phase_reconstruct(vectors_, eigenvalues_, s); }

RMatrix position_wavefunctions(const PositionGrid& grid, int dim) {
    grid.validate();
    if (dim < 1) throw DimensionError("wavefunction table needs dim >= 1");
    const double norm0 = std::pow(2.0 * grid.kappa / std::numbers::pi, 0.25);
    RMatrix psi(static_cast<Eigen::Index>(grid.size()), dim);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double xi = grid.points[i];
        const double q = std::numbers::sqrt2 * xi;
        const auto row = static_cast<Eigen::Index>(i);
        psi(row, 0) = norm0 * std::exp(-xi * xi);
        if (dim > 1) psi(row, 1) = std::numbers::sqrt2 * q * psi(row, 0);
        for (int n = 1; n + 1 < dim; ++n) {
            psi(row, n + 1) = std::sqrt(2.0 / (n + 1)) * q * psi(row, n) -
                              std::sqrt(static_cast<double>(n) / (n + 1)) * psi(row, n - 1);
        }
    }
    return psi;
}

CMatrix fock_to_position(const DensityMatrix& rho, const PositionGrid& grid) {
    const RMatrix psi = position_wavefunctions(grid, rho.dim());
    const CMatrix psic = psi.cast<cplx>();
    return psic * rho.data * psic.transpose();
}

DensityMatrix partial_trace(const DensityMatrix& rho_joint, std::span<const int> dims, int keep) {
    if (dims.empty()) throw DimensionError("partial_trace: empty dimension list");
    if (keep < 0 || keep >= static_cast<int>(dims.size())) {
        throw DimensionError("partial_trace: keep index out of range");
    }
    const long total = std::accumulate(dims.begin(), dims.end(), 1L, std::multiplies<long>());
    if (total != rho_joint.dim() || rho_joint.data.cols() != rho_joint.dim()) {
        throw DimensionError("partial_trace: product of dims " + std::to_string(total) +
                             " does not match joint dimension " + std::to_string(rho_joint.dim()));
    }
    const auto k = static_cast<std::size_t>(keep);
    const long before = std::accumulate(dims.begin(), dims.begin() + keep, 1L, std::multiplies<long>());
    const long after = std::accumulate(dims.begin() + keep + 1, dims.end(), 1L, std::multiplies<long>());
    const long dk = dims[k];

    DensityMatrix out;
    out.tail_mass = rho_joint.tail_mass;
    out.data = CMatrix::Zero(dk, dk);
    for (long i = 0; i < dk; ++i) {
        for (long j = 0; j < dk; ++j) {
            cplx acc{0.0, 0.0};
            for (long b = 0; b < before; ++b) {
                for (long a = 0; a < after; ++a) {
                    acc += rho_joint.data((b * dk + i) * after + a, (b * dk + j) * after + a);
                }
            }
            out.data(i, j) = acc;
        }
    }
    return out;
}

double frobenius_distance(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("frobenius_distance: shape mismatch");
    }
    return (a - b).norm();
}

}  // namespace gravidec
