#pragma once

// Truncated Fock-space linear algebra.
//
// Basis ordering for composite spaces follows the Kronecker convention: the
// first factor is the most significant index, |i0, i1, ...> sits at
// i0 * (d1 * d2 ...) + i1 * (d2 ...) + ...

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <string>
#include <vector>

namespace gravidec {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

struct FockOperator {
    int dim = 0;
    CMatrix data;
    std::string label;
};

struct DensityMatrix {
    CMatrix data;
    /// Probability mass discarded by truncation; the trace should be 1 - tail_mass.
    double tail_mass = 0.0;

    int dim() const { return static_cast<int>(data.rows()); }
    cplx trace() const { return data.trace(); }
    double purity() const;
};

struct ValidityReport {
    double hermiticity_error = 0.0;  // max |rho - rho^dagger|
    double trace_error = 0.0;        // |Tr rho - (1 - tail_mass)|
    double min_eigenvalue = 0.0;
    bool ok = false;
};

/// Checks Hermiticity (1e-12), trace (1e-10) and positivity (-1e-10).
ValidityReport check_density(const DensityMatrix& rho, double herm_tol = 1e-12,
                             double trace_tol = 1e-10, double eig_tol = -1e-10);

/// Dimensionless positions xi = sqrt(kappa) x.
struct PositionGrid {
    std::vector<double> points;
    double kappa = 1.0;  // m^-2

    static PositionGrid uniform(double xi_min, double xi_max, int count, double kappa = 1.0);
    /// xi in [-8, 8] with 801 points.
    static PositionGrid standard(double kappa = 1.0);

    std::size_t size() const { return points.size(); }
    /// Uniform spacing in xi; throws for non-uniform grids.
    double spacing() const;
    void validate() const;
};

struct TruncationPolicy {
    int dim_system = 20;
    int dim_per_env_mode = 8;
    double tail_epsilon = 1e-10;

    void validate() const;
};

struct Ladder {
    FockOperator a;
    FockOperator a_dag;
    FockOperator n;
};

Ladder ladder(int dim);

CMatrix identity(int dim);

CMatrix kron(const CMatrix& a, const CMatrix& b);
RMatrix kron(const RMatrix& a, const RMatrix& b);

/// exp(-i H t) for Hermitian H. The eigendecomposition is computed once and
/// reused for every t.
class HermitianPropagator {
public:
    explicit HermitianPropagator(const CMatrix& hermitian);
    /// Real symmetric generators diagonalize in real arithmetic.
    explicit HermitianPropagator(const RMatrix& symmetric);

    CMatrix at(double t) const;
    /// U rho U^dagger with U = exp(-i H t).
    CMatrix evolve(const CMatrix& rho, double t) const;

    const RVector& eigenvalues() const { return eigenvalues_; }
    int dim() const { return static_cast<int>(eigenvalues_.size()); }

private:
    RVector eigenvalues_;
    CMatrix vectors_;
};

struct Displacement {
    FockOperator op;
    /// Set when |alpha|^2 > dim/4; the truncated operator is then unreliable.
    bool guard_violated = false;
};

/// D(alpha) = exp(alpha a^dag - conj(alpha) a) via the eigendecomposition of
/// the Hermitian generator i(alpha a^dag - conj(alpha) a).
Displacement displacement(cplx alpha, int dim);

/// D(s e^{i theta}) for many real s along one direction. Shares one
/// eigendecomposition of the unit generator.
class DisplacementFamily {
public:
    DisplacementFamily(double theta, int dim);

    CMatrix at(double s) const;
    bool guard_violated(double s) const { return s * s > dim_ / 4.0; }

private:
    int dim_;
    RVector eigenvalues_;
    CMatrix vectors_;
};

/// psi_n(xi_i) for n < dim, as a (points x dim) matrix. Normalized in x:
/// psi_0 = (2 kappa / pi)^{1/4} exp(-xi^2).
RMatrix position_wavefunctions(const PositionGrid& grid, int dim);

/// rho(x_i, x_j) = sum_mn psi_m(x_i) rho_mn psi_n(x_j), in units of 1/m.
CMatrix fock_to_position(const DensityMatrix& rho, const PositionGrid& grid);

/// Traces out every factor except `keep`.
DensityMatrix partial_trace(const DensityMatrix& rho_joint, std::span<const int> dims, int keep);

double frobenius_distance(const CMatrix& a, const CMatrix& b);

}  // namespace gravidec
