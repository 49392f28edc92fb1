#pragma once

// Physical constants, experiment description and the light-bending coupling.
//
// Public functions take SI units. The dynamics engine works with hbar = 1 and
// expresses every energy as an angular frequency (rad/s); temperatures enter
// as beta = hbar / (k_B T) in seconds.

#include <complex>
#include <optional>
#include <variant>
#include <vector>

namespace gravidec {

using cplx = std::complex<double>;

/// CODATA 2018 exact/recommended values.
struct PhysicalConstants {
    double G = 6.67430e-11;          // m^3 kg^-1 s^-2
    double c = 299792458.0;          // m/s
    double hbar = 1.054571817e-34;   // J s
    double k_B = 1.380649e-23;       // J/K

    /// Throws DomainError unless every constant is strictly positive.
    void validate() const;
};

const PhysicalConstants& codata2018();

struct ThermalMultimode {
    double T = 0.0;                  // K
    std::vector<double> mode_freqs;  // rad/s, one entry per k-mode
    int polarizations_per_mode = 2;
};

struct ThermalSingleMode {
    double T = 0.0;      // K
    double omega = 0.0;  // rad/s
};

struct CoherentSingleMode {
    cplx alpha{0.0, 0.0};
    double omega = 0.0;  // rad/s
};

/// Light in a definite Fock configuration; used for oracle runs only.
struct FockProduct {
    std::vector<int> occupations;
    std::vector<double> mode_freqs;  // rad/s, same length as occupations
};

using EnvironmentSpec =
    std::variant<ThermalMultimode, ThermalSingleMode, CoherentSingleMode, FockProduct>;

void validate(const EnvironmentSpec& env);

/// Frequencies of every (k, polarization) mode, in the order the
/// dynamics engine lays out the environment tensor factors.
std::vector<double> field_mode_frequencies(const EnvironmentSpec& env);

struct ExperimentSpec {
    double M = 0.0;      // kg
    double Omega = 0.0;  // rad/s
    double r = 0.0;      // m
    EnvironmentSpec environment = ThermalSingleMode{};

    void validate() const;
};

struct CouplingParams {
    double delta_phi = 0.0;  // rad
    double x_zpf = 0.0;      // m
    double g0 = 0.0;         // dimensionless
    double kappa = 0.0;      // m^-2, M Omega / (2 hbar)
};

/// 4 G M / (r c^2). M = 0 is allowed and gives zero.
double deflection_angle(double M, double r, const PhysicalConstants& k = codata2018());

/// sqrt(hbar / (2 M Omega)).
double zero_point_length(double M, double Omega, const PhysicalConstants& k = codata2018());

/// M Omega / (2 hbar); xi = sqrt(kappa) x is the dimensionless position.
double position_scale(double M, double Omega, const PhysicalConstants& k = codata2018());

/// Coupling from the geometry. g0 is evaluated from the closed form
/// 4GM/(r^2 c^2) sqrt(hbar/(2 M Omega)) and checked against delta_phi x_zpf / r.
CouplingParams coupling_g0(const ExperimentSpec& spec, const PhysicalConstants& k = codata2018());

/// Same geometry-derived kappa and x_zpf but with g0 replaced. Toy runs use
/// couplings many orders above the gravitational value.
CouplingParams with_g0(CouplingParams params, double g0);

/// lambda(t) = (g0/Omega)(e^{i Omega t} - 1).
cplx lambda_t(double g0, double Omega, double t);

struct Gamma12 {
    double gamma1 = 0.0;  // (g0/Omega)(1 - cos Omega t)
    double gamma2 = 0.0;  // (g0/Omega) sin Omega t
};

Gamma12 gamma12(double g0, double Omega, double t);

/// beta = hbar / (k_B T), in seconds (natural units, energies as rad/s).
double beta_natural(double T, const PhysicalConstants& k = codata2018());

/// Temperature that gives hbar*beta*omega = beta_omega.
double temperature_for(double beta_omega, double omega, const PhysicalConstants& k = codata2018());

}  // namespace gravidec
