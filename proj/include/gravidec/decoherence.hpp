#pragma once

// Closed-form decoherence factors |Gamma_t(dx)|^2 = exp[-m (dx / lambda_coh)^2 sin^2(Omega t)]
// and the numerical extraction of lambda_coh from computed matrix elements.
// Everything here is SI with hbar explicit.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gravidec/physmodel.hpp"
#include "gravidec/reduced.hpp"

namespace gravidec {

struct DecoherenceResult {
    double lambda_coh = 0.0;       // m
    double lambda_coh_alt = 0.0;   // m, second algebraic form
    double multiplicity = 1.0;     // m in the exponent: 2N (polarizations x k-modes) or 1
    double Omega = 1.0;            // rad/s
    std::string regime;            // thermal-highT | thermal-single-mode | coherent
    std::vector<std::string> validity_flags;

    /// Value lambda_coh would take without the factor 2 under the square root.
    double lambda_coh_without_half() const;
    /// |Gamma_t(dx)|^2, dx in m, t in s.
    double gamma_abs2(double dx, double t) const;
};

/// N k-modes with `polarizations` each, temperature T.
DecoherenceResult gamma_highT(const ExperimentSpec& spec, const CouplingParams& coupling, double n_kmodes, double T,
                              int polarizations = 2, double max_omega = 0.0,
                              const PhysicalConstants& k = codata2018());

DecoherenceResult gamma_single_thermal_mode(const ExperimentSpec& spec, const CouplingParams& coupling, double omega,
                                            double T, const PhysicalConstants& k = codata2018());

/// Throws RegimeError for alpha = 0 or when 4|alpha|^2 omega^2 gamma1(t)^2 >= 1
/// at any of the requested times.
DecoherenceResult gamma_coherent(const ExperimentSpec& spec, const CouplingParams& coupling, cplx alpha, double omega,
                                 std::span<const double> times = {}, const PhysicalConstants& k = codata2018());

/// Dispatches on spec.environment. Fock environments have no decoherence factor.
DecoherenceResult decoherence_for(const ExperimentSpec& spec, const CouplingParams& coupling,
                                  std::span<const double> times = {}, const PhysicalConstants& k = codata2018());

struct CoherenceSample {
    double delta_xi = 0.0;  // xi - xi'
    double xi_plus = 0.0;   // xi + xi'
    double rho_abs2 = 0.0;  // |rho_t|^2
    double rho0_abs2 = 0.0; // |rho_0t|^2 (free evolution)
};

struct ExtractionOptions {
    double r_min = 0.2;
    double r_max = 0.95;
    double multiplicity = 1.0;
    int min_points = 8;
    double residual_warning = 0.05;
};

struct ExtractionResult {
    double lambda_coh = 0.0;  // m
    double fit_residual = 0.0;
    int points_used = 0;
    bool residual_warning = false;
};

/// Averages R = |rho_t|^2 / |rho_0t|^2 over the xi_+ samples at each Delta,
/// keeps r_min <= R <= r_max and fits -log R = m (dx/lambda)^2 sin^2(Omega t).
ExtractionResult extract_lambda_coh(std::span<const CoherenceSample> samples, double t, double Omega, double kappa,
                                    const ExtractionOptions& opts = {});

/// Anti-diagonal samples of two (grid x grid) |rho|^2 tables, at the xi_+
/// values available on the grid within |xi_+| <= xi_plus_window (at most
/// `xi_plus_count` of them).
std::vector<CoherenceSample> samples_from_grid(const RMatrix& rho_abs2, const RMatrix& rho0_abs2,
                                               const PositionGrid& grid, double xi_plus_window = 0.2,
                                               int xi_plus_count = 5);

/// Evaluates rho_t and the free rho_0t at every (Delta, xi_+) pair through the
/// characteristic-function quadrature.
std::vector<CoherenceSample> sample_coherences(const CharacteristicFunction& chi, const InfluenceFunction& F,
                                               std::span<const double> deltas, std::span<const double> xi_plus,
                                               double t, double Omega, double kappa,
                                               const MatrixElementOptions& opts = {});

/// Five xi_+ samples spread over [-0.2, 0.2].
std::vector<double> default_xi_plus_window();

}  // namespace gravidec
