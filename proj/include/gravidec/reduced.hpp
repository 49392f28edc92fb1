#pragma once

// Characteristic-function route to position-basis matrix elements:
//
//   rho_t(x, x') = sqrt(kappa)/pi * Int dp chi(e^{i Omega t} beta) e^{-i xi_+ p} F_t(p; Delta)
//
// with beta = -Delta + i p, Delta = xi - xi', xi_+ = xi + xi' and the
// influence function F_t(p; Delta) = sum_E p(E) exp{2iE[gamma1(t) p + gamma2(t) Delta]}.

#include <functional>
#include <string>
#include <vector>

#include "gravidec/dynamics.hpp"
#include "gravidec/fockspace.hpp"
#include "gravidec/quadrature.hpp"
#include "gravidec/states.hpp"

namespace gravidec {

/// |component(beta)| <= poly(|beta - center|) exp(-Q(beta - center)/2), with
/// Q the real quadratic form [[qxx, qxy], [qxy, qyy]] on (Re, Im).
struct GaussianEnvelope {
    cplx center{0.0, 0.0};
    double qxx = 1.0;
    double qxy = 0.0;
    double qyy = 1.0;
    int poly_degree = 0;
};

struct CharacteristicFunction {
    std::function<cplx(cplx)> evaluate;  // chi(beta) = Tr[D(beta) rho]
    double gaussian_decay_scale = 1.0;   // narrowest Gaussian width in |beta|
    std::vector<GaussianEnvelope> envelopes;
    std::string label;

    cplx operator()(cplx beta) const { return evaluate(beta); }
};

/// Closed forms: ground e^{-|b|^2/2}; coherent(mu) e^{-|b|^2/2} e^{b conj(mu) - conj(b) mu};
/// thermal e^{-(nbar+1/2)|b|^2}; Fock(n) e^{-|b|^2/2} L_n(|b|^2); cat and
/// squeezed vacuum from their coherent-state and Bogoliubov forms.
CharacteristicFunction chi_of_state(const StateDescriptor& state);

enum class InfluenceModel { Unit, ThermalExact, ThermalHighT, ThermalSingleMode, Coherent, Distribution };

std::string to_string(InfluenceModel m);

struct InfluenceFunction {
    std::function<cplx(double p, double delta, double t)> evaluate;
    InfluenceModel model = InfluenceModel::Unit;
    std::vector<std::string> validity_flags;
    /// Largest rate d(phase)/dp / gamma1 at which F can oscillate in p
    /// (2 * sum of field energies involved); guides quadrature panelling.
    double oscillation_scale = 0.0;
    double g0 = 0.0;
    double Omega = 1.0;

    cplx operator()(double p, double delta, double t) const { return evaluate(p, delta, t); }
};

/// prod_{k,nu} (e^{beta w} - 1) / (e^{beta w} - exp[2 i w (gamma1 p + gamma2 Delta)]).
/// `field_freqs` lists every (k, polarization) mode; beta in seconds.
cplx influence_thermal_exact(double p, double delta, double t, std::span<const double> field_freqs, double beta,
                             double g0, double Omega);

/// Second-order expansion for hbar*beta*w << 1 over `field_mode_count` = 2N
/// (k, polarization) modes: 1 + (2i m/beta) u - (2m(m+1)/beta^2) u^2 with
/// m = field_mode_count and u = gamma1 p + gamma2 Delta.
cplx influence_thermal_highT(double p, double delta, double t, double field_mode_count, double beta, double g0,
                             double Omega);

/// Second-order expansion for one thermal (k, polarization) mode.
cplx influence_single_thermal_mode(double p, double delta, double t, double omega, double beta, double g0,
                                   double Omega);

/// exp{-|alpha|^2 [1 - e^{2 i w (gamma1 p + gamma2 Delta)}]}.
cplx influence_coherent(double p, double delta, double t, cplx alpha, double omega, double g0, double Omega);

/// sum_E p(E) exp{2iE(gamma1 p + gamma2 Delta)} from an explicit distribution.
cplx influence_from_distribution(double p, double delta, double t, const EnergyDistribution& dist, double g0,
                                 double Omega);

InfluenceFunction make_unit_influence();
InfluenceFunction make_thermal_exact(std::vector<double> field_freqs, double beta, double g0, double Omega);
/// `n_kmodes` k-modes of `polarizations` each; `max_omega` only feeds the validity flag.
InfluenceFunction make_thermal_highT(double n_kmodes, int polarizations, double beta, double g0, double Omega,
                                     double max_omega = 0.0);
InfluenceFunction make_single_thermal_mode(double omega, double beta, double g0, double Omega);
InfluenceFunction make_coherent(cplx alpha, double omega, double g0, double Omega);
InfluenceFunction make_distribution_influence(EnergyDistribution dist, double g0, double Omega);

/// Exact influence function for an environment description.
InfluenceFunction exact_influence(const EnvironmentSpec& env, double g0, double Omega,
                                  const PhysicalConstants& k = codata2018());

struct MatrixElementOptions {
    double rel_tol = 1e-12;
    /// Estimated error above fail_tol * scale raises QuadratureError.
    double fail_tol = 1e-8;
    int max_intervals = 4000;
};

/// rho_t(xi, xi') in units of 1/m (times sqrt(kappa)); positions are dimensionless xi.
cplx matrix_elements_general(const CharacteristicFunction& chi, const InfluenceFunction& F, double xi,
                             double xi_prime, double t, double Omega, double kappa,
                             const MatrixElementOptions& opts = {});

/// Full (grid x grid) matrix; Hermitian symmetry is used to halve the work.
CMatrix matrix_elements_grid(const CharacteristicFunction& chi, const InfluenceFunction& F, const PositionGrid& grid,
                             double t, double Omega, const MatrixElementOptions& opts = {});

}  // namespace gravidec
