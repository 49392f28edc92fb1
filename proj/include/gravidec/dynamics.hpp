#pragma once

// Exact dynamics of oscillator + light, computed two independent ways:
//   * brute force: exp(-iHt) of the full truncated system-environment state;
//   * conditional displacement: rho_S(t) = sum_E p(E) e^{-iH_S t} D(E lambda)
//     rho_S D^dag(E lambda) e^{iH_S t}.
// Internal units: hbar = 1, energies in rad/s.

#include <optional>
#include <span>
#include <vector>

#include "gravidec/fockspace.hpp"
#include "gravidec/physmodel.hpp"

namespace gravidec {

struct EnergyLevel {
    double E = 0.0;  // rad/s
    double p = 0.0;
};

struct EnergyDistribution {
    std::vector<EnergyLevel> entries;  // sorted by E, degenerate E merged
    double tail_mass = 0.0;

    /// Sorts, merges energies equal to relative 1e-12 and checks the invariants.
    static EnergyDistribution from_levels(std::vector<EnergyLevel> levels, double tail_mass);
    void validate() const;
    double total() const;
    double max_energy() const;
};

/// Occupation-resolved distribution of the light energy. Thermal: per-mode
/// geometric weights, cut so the discarded product mass <= tail_epsilon.
/// Coherent: Poisson exp(-|a|^2)|a|^{2n}/n!. Fock: one entry.
EnergyDistribution energy_distribution(const EnvironmentSpec& env, double tail_epsilon,
                                       const PhysicalConstants& k = codata2018(),
                                       std::size_t max_tuples = 5'000'000);

/// Distribution read off the diagonal of a (product-basis) environment state.
EnergyDistribution energy_distribution_from_diagonal(const DensityMatrix& rho_env,
                                                     std::span<const int> mode_dims,
                                                     std::span<const double> mode_freqs);

struct TotalHamiltonian {
    std::vector<int> dims;  // [system, mode_0, mode_1, ...]
    RMatrix matrix;
    RVector env_energies;   // diagonal of H_E on the environment factor
    double g0 = 0.0;
    double Omega = 0.0;
    std::vector<double> mode_freqs;

    int dim_system() const { return dims.front(); }
    int dim_environment() const { return static_cast<int>(env_energies.size()); }
};

inline constexpr int kDefaultJointCap = 4096;

/// Omega b^dag b (x) 1 + 1 (x) H_E - g0 (b^dag + b) (x) H_E on the truncated space.
TotalHamiltonian build_total_hamiltonian(double g0, double Omega, std::span<const double> mode_freqs,
                                         int dim_system, int dim_per_mode, int joint_cap = kDefaultJointCap);

TotalHamiltonian build_total_hamiltonian(const ExperimentSpec& spec, const CouplingParams& coupling,
                                         const TruncationPolicy& policy, int joint_cap = kDefaultJointCap);

/// Initial light state on the truncated product space (amplitudes are not
/// renormalized; tail_mass records what was cut).
DensityMatrix environment_density(const EnvironmentSpec& env, int dim_per_mode,
                                  const PhysicalConstants& k = codata2018());

/// Caches the eigendecomposition of H; each time sample costs two products.
class BruteForceEvolver {
public:
    explicit BruteForceEvolver(TotalHamiltonian h);

    DensityMatrix joint_state(const DensityMatrix& rho_s0, const DensityMatrix& rho_e0, double t) const;
    DensityMatrix system_state(const DensityMatrix& rho_s0, const DensityMatrix& rho_e0, double t) const;
    DensityMatrix environment_state(const DensityMatrix& rho_s0, const DensityMatrix& rho_e0, double t) const;

    const TotalHamiltonian& hamiltonian() const { return h_; }
    CMatrix propagator(double t) const { return prop_.at(t); }

private:
    TotalHamiltonian h_;
    HermitianPropagator prop_;
};

DensityMatrix brute_force_joint_state(const TotalHamiltonian& h, const DensityMatrix& rho_s0,
                                      const DensityMatrix& rho_e0, double t);

DensityMatrix environment_state(const TotalHamiltonian& h, const DensityMatrix& rho_s0,
                                const DensityMatrix& rho_e0, double t);

struct ReducedState {
    DensityMatrix rho;
    /// Some E |lambda(t)| broke the displacement guard |alpha|^2 <= dim/4.
    bool guard_violated = false;
};

ReducedState conditional_displacement_reduced(const DensityMatrix& rho_s0, const EnergyDistribution& dist,
                                              double g0, double Omega, double t);

/// e^{-i H_S t} rho e^{i H_S t} with H_S = Omega b^dag b.
CMatrix free_evolution(const CMatrix& rho, double Omega, double t);

/// Phi(t) = exp(+i g0^2 [Omega t - sin(Omega t)] (H_E / Omega)^2) on the
/// environment factor of `h`. The sign is the one that reproduces exp(-iHt).
CMatrix phase_operator(const TotalHamiltonian& h, double t);

/// Closed-form propagator e^{-i(H_S + H_E)t} U_SE(t) (1 (x) Phi(t)) on the
/// joint space, with U_SE = exp{(lambda b^dag - conj(lambda) b) (x) H_E}.
CMatrix closed_form_propagator(const TotalHamiltonian& h, double t);

/// Tr{ e^{-iH_E t} Phi(t) |n><n'| Phi^dag(t) e^{iH_E t} } for environment
/// basis indices n, n'.
cplx delta_identity_trace(const TotalHamiltonian& h, int n, int n_prime, double t);

}  // namespace gravidec
