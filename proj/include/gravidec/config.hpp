#pragma once

// Scenario configuration (JSON), sweep specifications and CSV/JSON output helpers.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gravidec/fockspace.hpp"
#include "gravidec/physmodel.hpp"
#include "gravidec/states.hpp"

namespace gravidec {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// One oracle-equivalence case: brute-force vs conditional displacement.
struct VerifyFixture {
    std::string name;
    EnvironmentSpec environment = ThermalSingleMode{};
    double g0 = 0.0;
    double Omega = 1.0;  // rad/s
    int dim_system = 20;
    int dim_per_env_mode = 8;
    std::vector<StateDescriptor> initial_states{GroundState{}};
    int time_points = 8;  // per period
};

struct GammaRequest {
    std::optional<double> t_s;
    std::vector<double> delta_x_m;
};

struct ScenarioConfig {
    std::optional<ExperimentSpec> experiment;
    std::optional<double> g0_override;
    StateDescriptor initial_state = GroundState{};
    TruncationPolicy truncation;
    double grid_xi_min = -8.0;
    double grid_xi_max = 8.0;
    int grid_points = 801;
    std::vector<double> time_samples;  // s
    std::string evolve_route = "fock";  // fock | quadrature
    GammaRequest gamma;
    std::vector<VerifyFixture> verify_fixtures;  // empty: built-in toy suite
    bool corrupt_g0_sign = false;
    int verify_grid_points = 41;

    json raw;  // the parsed document, used for hashing and sweeps

    /// Throws ConfigError naming the missing field.
    const ExperimentSpec& require_experiment() const;
    /// Geometry coupling, with g0 replaced when coupling_override.g0 is set.
    CouplingParams coupling() const;
    PositionGrid grid() const;
};

/// Every schema or value problem surfaces as ConfigError.
ScenarioConfig parse_config(const json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

EnvironmentSpec parse_environment(const json& doc, const std::string& where);
StateDescriptor parse_state(const json& doc, const std::string& where);

/// FNV-1a 64 of the canonical (sorted-key) dump, as 16 hex digits.
std::string params_hash(const json& doc);

struct SweepSpec {
    std::string axis;  // dotted path to a numeric leaf
    std::vector<double> values;
    std::vector<std::string> outputs;  // lambda_coh_m | gamma_abs2 | purity_min
    std::optional<double> delta_x_m;   // for gamma_abs2; defaults to gamma.delta_x_m[0]
};

SweepSpec parse_sweep(const json& doc);

/// Copy of `doc` with the numeric leaf at `path` replaced. Paths are tried as
/// given and then under "experiment."; throws ConfigError if neither names a
/// numeric leaf.
json with_leaf(const json& doc, const std::string& path, double value);

/// 17 significant digits, scientific notation.
std::string format_double(double v);

/// Minimal CSV writer: header row, then rows of pre-formatted cells.
class CsvWriter {
public:
    CsvWriter(std::ostream& os, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& os_;
    std::size_t columns_;
};

/// (row, col, re, im) dump of a complex matrix, for debugging.
void write_matrix_csv(std::ostream& os, const CMatrix& m);

}  // namespace gravidec
