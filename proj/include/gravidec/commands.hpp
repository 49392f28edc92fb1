#pragma once

// Subcommands behind the gravidec executable. Each returns data or writes CSV
// to a stream; run_cli handles argument parsing, files and exit codes.

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gravidec/config.hpp"

namespace gravidec {

enum ExitCode : int {
    kExitOk = 0,
    kExitVerifyFailed = 1,
    kExitConfig = 2,
    kExitRegime = 3,
    kExitInternal = 4,
};

/// {delta_phi_rad, x_zpf_m, g0, kappa_m2, ...}.
json cmd_coupling(const ScenarioConfig& cfg);

/// {lambda_coh_m, regime, validity_flags, ...}. Regime errors propagate.
json cmd_lcoh(const ScenarioConfig& cfg);

/// Rows (delta_x_m, t_s, gamma_abs2) for every requested t and delta_x.
void cmd_gamma(const ScenarioConfig& cfg, std::span<const double> times, std::ostream& csv);

struct EvolveSummary {
    std::size_t rows = 0;
    std::vector<double> purity;
    std::vector<bool> guard_violated;
};

/// Matrix-element dump (x, x_prime, re, im, abs2, t, model, params_hash) and
/// the purity series (t_s, purity, tail_mass, guard_violated, model, params_hash).
/// `rho_csv` may be null to skip the dump.
EvolveSummary cmd_evolve(const ScenarioConfig& cfg, std::span<const double> times, std::ostream* rho_csv,
                         std::ostream& purity_csv);

/// {all_pass, checks: [...]}.
json cmd_verify(const ScenarioConfig& cfg);

/// One row per sweep value, ordered by value.
void cmd_sweep(const ScenarioConfig& cfg, const SweepSpec& sweep, std::ostream& csv);

/// Maps exceptions to exit codes and writes messages to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gravidec
