#pragma once

// Oracle-equivalence and invariant checks shared by `gravidec verify` and the
// acceptance suite.

#include <cstdint>
#include <string>
#include <vector>

#include "gravidec/config.hpp"
#include "gravidec/decoherence.hpp"
#include "gravidec/reduced.hpp"

namespace gravidec {

struct CheckResult {
    std::string name;
    std::string kind;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    double seconds = 0.0;
};

json to_json(const CheckResult& r);

/// Thermal (hbar beta omega = 1), coherent (alpha = 1) and Fock environments at
/// g0 in {0, 1e-3, 0.05, 0.1}, omega = Omega = 1, dims (20, 8), plus a
/// two-mode thermal case.
std::vector<VerifyFixture> default_fixtures();

/// Max Frobenius distance between brute-force and conditional-displacement
/// reduced states over the fixture's initial states and time points in one
/// period. `corrupt_g0_sign` flips g0 on the conditional side only.
CheckResult oracle_equivalence(const VerifyFixture& f, bool corrupt_g0_sign = false, double tol = 1e-8);

/// |purity(2 pi / Omega) - purity(0)| on the conditional-displacement route.
CheckResult recoherence(const VerifyFixture& f, double tol = 1e-10);

/// max_t ||rho_E(t) - rho_E(0)||_F from brute-force evolution. Only
/// meaningful for environments diagonal in the energy basis.
CheckResult environment_invariance(const VerifyFixture& f, double tol = 1e-10);

/// max |Tr{e^{-iH_E t} Phi |n><n'| Phi^dag e^{iH_E t}} - delta_nn'| over
/// `pairs` random Fock pairs and times.
CheckResult delta_identity(const VerifyFixture& f, int pairs, std::uint64_t seed, double tol = 1e-12);

struct PipelineCase {
    std::string name;
    EnvironmentSpec environment;
    StateDescriptor initial_state;
    double g0 = 1e-2;
    double Omega = 1.0;
    double t = 0.0;
};

/// The two toy cases (thermal hbar beta omega = 1 and coherent alpha = 1 with
/// g0 = 1e-2 at t = pi / (2 Omega)).
std::vector<PipelineCase> default_pipeline_cases();

/// Max pointwise |quadrature - Fock route| position matrix element on `grid`
/// (kappa from the grid).
CheckResult pipeline_oracle(const PipelineCase& c, const PositionGrid& grid, double tol = 1e-6);

/// Toy extraction scenario on kappa = 1 (M = 2 hbar, Omega = 1): a squeezed
/// vacuum wide enough to show the decay, sampled at t = pi / (2 Omega).
struct ExtractionCase {
    std::string name;
    EnvironmentSpec environment;
    double g0 = 1e-3;
    double r_min = 0.2;
    double r_max = 0.95;
    int delta_points = 120;
};

/// Single thermal mode (hbar beta omega = 1), coherent (alpha = 2) and a
/// 50-k-mode high-temperature bath, all at coupling g0.
std::vector<ExtractionCase> default_extraction_cases(double g0);

struct ExtractionCheck {
    std::string name;
    double lambda_analytic = 0.0;  // m
    double lambda_extracted = 0.0; // m
    double rel_error = 0.0;
    int points_used = 0;
    double r_min = 0.0;
    double r_max = 0.0;
    double seconds = 0.0;
};

ExtractionCheck run_extraction_case(const ExtractionCase& c);

/// Runs every check and returns them in a stable order.
std::vector<CheckResult> run_verify_suite(const std::vector<VerifyFixture>& fixtures, bool corrupt_g0_sign,
                                          int grid_points);

}  // namespace gravidec
