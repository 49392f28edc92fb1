#include "gravidec/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "gravidec/errors.hpp"

namespace gravidec {

namespace {

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

void require_object(const json& doc, const std::string& where) {
    if (!doc.is_object()) throw ConfigError((where.empty() ? "config" : where) + " must be an object");
}

void check_keys(const json& doc, std::initializer_list<const char*> allowed, const std::string& where) {
    require_object(doc, where);
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
        if (!known) throw ConfigError("unknown field " + join(where, it.key()));
    }
}

double number(const json& doc, const char* key, const std::string& where) {
    if (!doc.contains(key)) throw ConfigError("missing field " + join(where, key));
    const json& v = doc.at(key);
    if (!v.is_number()) throw ConfigError(join(where, key) + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(join(where, key) + " must be finite");
    return x;
}

double number_or(const json& doc, const char* key, const std::string& where, double fallback) {
    return doc.contains(key) ? number(doc, key, where) : fallback;
}

int integer(const json& doc, const char* key, const std::string& where) {
    if (!doc.contains(key)) throw ConfigError("missing field " + join(where, key));
    const json& v = doc.at(key);
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_number_float()) {
        const double x = v.get<double>();
        if (x == std::round(x) && std::abs(x) < 1e9) return static_cast<int>(x);
    }
    throw ConfigError(join(where, key) + " must be an integer");
}

int integer_or(const json& doc, const char* key, const std::string& where, int fallback) {
    return doc.contains(key) ? integer(doc, key, where) : fallback;
}

std::string string(const json& doc, const char* key, const std::string& where) {
    if (!doc.contains(key)) throw ConfigError("missing field " + join(where, key));
    if (!doc.at(key).is_string()) throw ConfigError(join(where, key) + " must be a string");
    return doc.at(key).get<std::string>();
}

std::vector<double> numbers(const json& doc, const char* key, const std::string& where) {
    if (!doc.contains(key)) throw ConfigError("missing field " + join(where, key));
    const json& v = doc.at(key);
    if (!v.is_array()) throw ConfigError(join(where, key) + " must be an array of numbers");
    std::vector<double> out;
    for (const json& x : v) {
        if (!x.is_number() || !std::isfinite(x.get<double>())) {
            throw ConfigError(join(where, key) + " must contain finite numbers only");
        }
        out.push_back(x.get<double>());
    }
    return out;
}

/// Temperature either directly or through hbar*beta*omega.
double temperature(const json& doc, const std::string& where, double omega) {
    if (doc.contains("T_K") && doc.contains("hbar_beta_omega")) {
        throw ConfigError(where + ": give T_K or hbar_beta_omega, not both");
    }
    if (doc.contains("hbar_beta_omega")) {
        const double x = number(doc, "hbar_beta_omega", where);
        if (!(x > 0.0)) throw ConfigError(join(where, "hbar_beta_omega") + " must be > 0");
        return temperature_for(x, omega);
    }
    return number(doc, "T_K", where);
}

template <class F>
auto wrap_domain(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const DomainError& e) {
        throw ConfigError(where + ": " + e.what());
    } catch (const DimensionError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

}  // namespace

EnvironmentSpec parse_environment(const json& doc, const std::string& where) {
    require_object(doc, where);
    const std::string type = string(doc, "type", where);
    EnvironmentSpec env;
    if (type == "thermal_multimode") {
        check_keys(doc, {"type", "T_K", "hbar_beta_omega", "mode_freqs_rad_s", "n_modes", "mode_omega_rad_s",
                         "polarizations_per_mode"},
                   where);
        ThermalMultimode th;
        if (doc.contains("mode_freqs_rad_s")) {
            if (doc.contains("n_modes")) throw ConfigError(where + ": give mode_freqs_rad_s or n_modes, not both");
            th.mode_freqs = numbers(doc, "mode_freqs_rad_s", where);
        } else {
            const int n = integer(doc, "n_modes", where);
            if (n < 1) throw ConfigError(join(where, "n_modes") + " must be >= 1");
            th.mode_freqs.assign(static_cast<std::size_t>(n), number(doc, "mode_omega_rad_s", where));
        }
        th.polarizations_per_mode = integer_or(doc, "polarizations_per_mode", where, 2);
        const double w_ref = th.mode_freqs.empty() ? 1.0 : *std::max_element(th.mode_freqs.begin(), th.mode_freqs.end());
        th.T = wrap_domain(where, [&] { return temperature(doc, where, w_ref); });
        env = th;
    } else if (type == "thermal_single_mode") {
        check_keys(doc, {"type", "T_K", "hbar_beta_omega", "omega_rad_s"}, where);
        ThermalSingleMode th;
        th.omega = number(doc, "omega_rad_s", where);
        th.T = wrap_domain(where, [&] { return temperature(doc, where, th.omega); });
        env = th;
    } else if (type == "coherent_single_mode") {
        check_keys(doc, {"type", "alpha_re", "alpha_im", "omega_rad_s"}, where);
        env = CoherentSingleMode{{number(doc, "alpha_re", where), number_or(doc, "alpha_im", where, 0.0)},
                                 number(doc, "omega_rad_s", where)};
    } else if (type == "fock_product") {
        check_keys(doc, {"type", "occupations", "mode_freqs_rad_s"}, where);
        FockProduct f;
        for (double x : numbers(doc, "occupations", where)) {
            if (x != std::round(x)) throw ConfigError(join(where, "occupations") + " must be integers");
            f.occupations.push_back(static_cast<int>(x));
        }
        f.mode_freqs = numbers(doc, "mode_freqs_rad_s", where);
        env = f;
    } else {
        throw ConfigError(join(where, "type") + ": unknown environment type '" + type + "'");
    }
    wrap_domain(where, [&] {
        validate(env);
        return 0;
    });
    return env;
}

StateDescriptor parse_state(const json& doc, const std::string& where) {
    require_object(doc, where);
    const std::string type = string(doc, "type", where);
    StateDescriptor s;
    if (type == "ground") {
        check_keys(doc, {"type"}, where);
        s = GroundState{};
    } else if (type == "coherent") {
        check_keys(doc, {"type", "mu_re", "mu_im"}, where);
        s = CoherentState{{number(doc, "mu_re", where), number_or(doc, "mu_im", where, 0.0)}};
    } else if (type == "thermal") {
        check_keys(doc, {"type", "nbar"}, where);
        const double nbar = number(doc, "nbar", where);
        if (nbar < 0.0) throw ConfigError(join(where, "nbar") + " must be >= 0");
        s = ThermalOscillator{nbar};
    } else if (type == "fock") {
        check_keys(doc, {"type", "n"}, where);
        const int n = integer(doc, "n", where);
        if (n < 0) throw ConfigError(join(where, "n") + " must be >= 0");
        s = FockNumberState{n};
    } else if (type == "cat") {
        check_keys(doc, {"type", "mu_re", "mu_im", "phase"}, where);
        s = CatState{{number(doc, "mu_re", where), number_or(doc, "mu_im", where, 0.0)},
                     number_or(doc, "phase", where, 0.0)};
    } else if (type == "squeezed") {
        check_keys(doc, {"type", "r", "phi"}, where);
        const double r = number(doc, "r", where);
        if (r < 0.0) throw ConfigError(join(where, "r") + " must be >= 0");
        s = SqueezedVacuum{r, number_or(doc, "phi", where, 0.0)};
    } else {
        throw ConfigError(join(where, "type") + ": unknown state type '" + type + "'");
    }
    return s;
}

namespace {

VerifyFixture parse_fixture(const json& doc, const std::string& where) {
    check_keys(doc, {"name", "environment", "g0", "omega_rad_s", "dim_system", "dim_per_env_mode", "initial_states",
                     "time_points"},
               where);
    VerifyFixture f;
    f.name = string(doc, "name", where);
    if (!doc.contains("environment")) throw ConfigError("missing field " + join(where, "environment"));
    f.environment = parse_environment(doc.at("environment"), join(where, "environment"));
    f.g0 = number(doc, "g0", where);
    f.Omega = number_or(doc, "omega_rad_s", where, 1.0);
    if (!(f.Omega > 0.0)) throw ConfigError(join(where, "omega_rad_s") + " must be > 0");
    f.dim_system = integer_or(doc, "dim_system", where, 20);
    f.dim_per_env_mode = integer_or(doc, "dim_per_env_mode", where, 8);
    if (f.dim_system < 2 || f.dim_per_env_mode < 1) throw ConfigError(where + ": dimensions too small");
    f.time_points = integer_or(doc, "time_points", where, 8);
    if (f.time_points < 1) throw ConfigError(join(where, "time_points") + " must be >= 1");
    if (doc.contains("initial_states")) {
        const json& list = doc.at("initial_states");
        if (!list.is_array() || list.empty()) throw ConfigError(join(where, "initial_states") + " must be a non-empty array");
        f.initial_states.clear();
        for (std::size_t i = 0; i < list.size(); ++i) {
            f.initial_states.push_back(parse_state(list[i], join(where, "initial_states[" + std::to_string(i) + "]")));
        }
    }
    return f;
}

}  // namespace

const ExperimentSpec& ScenarioConfig::require_experiment() const {
    if (!experiment) throw ConfigError("missing field experiment");
    return *experiment;
}

CouplingParams ScenarioConfig::coupling() const {
    const CouplingParams c = coupling_g0(require_experiment());
    return g0_override ? with_g0(c, *g0_override) : c;
}

PositionGrid ScenarioConfig::grid() const {
    return PositionGrid::uniform(grid_xi_min, grid_xi_max, grid_points, coupling().kappa);
}

ScenarioConfig parse_config(const json& doc) {
    check_keys(doc, {"schema_version", "experiment", "coupling_override", "initial_state", "truncation", "grid",
                     "time_samples_s", "evolve", "gamma", "verify"},
               "");
    ScenarioConfig cfg;
    cfg.raw = doc;
    if (doc.contains("schema_version") && integer(doc, "schema_version", "") != kSchemaVersion) {
        throw ConfigError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
    }
    if (doc.contains("experiment")) {
        const json& e = doc.at("experiment");
        check_keys(e, {"mass_kg", "omega_rad_s", "r_m", "environment"}, "experiment");
        ExperimentSpec spec;
        spec.M = number(e, "mass_kg", "experiment");
        spec.Omega = number(e, "omega_rad_s", "experiment");
        spec.r = number(e, "r_m", "experiment");
        if (!e.contains("environment")) throw ConfigError("missing field experiment.environment");
        spec.environment = parse_environment(e.at("environment"), "experiment.environment");
        wrap_domain("experiment", [&] {
            spec.validate();
            return 0;
        });
        cfg.experiment = spec;
    }
    if (doc.contains("coupling_override")) {
        const json& c = doc.at("coupling_override");
        check_keys(c, {"g0"}, "coupling_override");
        cfg.g0_override = number(c, "g0", "coupling_override");
        if (*cfg.g0_override < 0.0) throw ConfigError("coupling_override.g0 must be >= 0");
    }
    if (doc.contains("initial_state")) cfg.initial_state = parse_state(doc.at("initial_state"), "initial_state");
    if (doc.contains("truncation")) {
        const json& t = doc.at("truncation");
        check_keys(t, {"dim_system", "dim_per_env_mode", "tail_epsilon"}, "truncation");
        cfg.truncation.dim_system = integer_or(t, "dim_system", "truncation", cfg.truncation.dim_system);
        cfg.truncation.dim_per_env_mode = integer_or(t, "dim_per_env_mode", "truncation", cfg.truncation.dim_per_env_mode);
        cfg.truncation.tail_epsilon = number_or(t, "tail_epsilon", "truncation", cfg.truncation.tail_epsilon);
        wrap_domain("truncation", [&] {
            cfg.truncation.validate();
            return 0;
        });
    }
    if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        check_keys(g, {"xi_min", "xi_max", "points"}, "grid");
        cfg.grid_xi_min = number_or(g, "xi_min", "grid", cfg.grid_xi_min);
        cfg.grid_xi_max = number_or(g, "xi_max", "grid", cfg.grid_xi_max);
        cfg.grid_points = integer_or(g, "points", "grid", cfg.grid_points);
        wrap_domain("grid", [&] {
            PositionGrid::uniform(cfg.grid_xi_min, cfg.grid_xi_max, cfg.grid_points).validate();
            return 0;
        });
    }
    if (doc.contains("time_samples_s")) cfg.time_samples = numbers(doc, "time_samples_s", "");
    if (doc.contains("evolve")) {
        const json& e = doc.at("evolve");
        check_keys(e, {"route"}, "evolve");
        cfg.evolve_route = string(e, "route", "evolve");
        if (cfg.evolve_route != "fock" && cfg.evolve_route != "quadrature") {
            throw ConfigError("evolve.route must be 'fock' or 'quadrature'");
        }
    }
    if (doc.contains("gamma")) {
        const json& g = doc.at("gamma");
        check_keys(g, {"t_s", "delta_x_m"}, "gamma");
        if (g.contains("t_s")) cfg.gamma.t_s = number(g, "t_s", "gamma");
        if (g.contains("delta_x_m")) cfg.gamma.delta_x_m = numbers(g, "delta_x_m", "gamma");
    }
    if (doc.contains("verify")) {
        const json& v = doc.at("verify");
        check_keys(v, {"fixtures", "corrupt_g0_sign", "grid_points"}, "verify");
        if (v.contains("fixtures")) {
            const json& list = v.at("fixtures");
            if (!list.is_array()) throw ConfigError("verify.fixtures must be an array");
            for (std::size_t i = 0; i < list.size(); ++i) {
                cfg.verify_fixtures.push_back(parse_fixture(list[i], "verify.fixtures[" + std::to_string(i) + "]"));
            }
        }
        if (v.contains("corrupt_g0_sign")) {
            if (!v.at("corrupt_g0_sign").is_boolean()) throw ConfigError("verify.corrupt_g0_sign must be a boolean");
            cfg.corrupt_g0_sign = v.at("corrupt_g0_sign").get<bool>();
        }
        cfg.verify_grid_points = integer_or(v, "grid_points", "verify", cfg.verify_grid_points);
        if (cfg.verify_grid_points < 3) throw ConfigError("verify.grid_points must be >= 3");
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

std::string params_hash(const json& doc) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : doc.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SweepSpec parse_sweep(const json& doc) {
    check_keys(doc, {"axis", "values", "outputs", "delta_x_m"}, "sweep");
    SweepSpec s;
    s.axis = string(doc, "axis", "sweep");
    s.values = numbers(doc, "values", "sweep");
    if (s.values.empty()) throw ConfigError("sweep.values must not be empty");
    if (!doc.contains("outputs") || !doc.at("outputs").is_array() || doc.at("outputs").empty()) {
        throw ConfigError("sweep.outputs must be a non-empty array");
    }
    for (const json& o : doc.at("outputs")) {
        if (!o.is_string()) throw ConfigError("sweep.outputs must contain strings");
        const std::string name = o.get<std::string>();
        if (name != "lambda_coh_m" && name != "gamma_abs2" && name != "purity_min") {
            throw ConfigError("sweep.outputs: unknown output '" + name + "'");
        }
        s.outputs.push_back(name);
    }
    if (doc.contains("delta_x_m")) s.delta_x_m = number(doc, "delta_x_m", "sweep");
    return s;
}

json with_leaf(const json& doc, const std::string& path, double value) {
    for (const std::string& candidate : {path, "experiment." + path}) {
        json out = doc;
        json* node = &out;
        std::stringstream ss(candidate);
        std::string part;
        bool found = true;
        while (std::getline(ss, part, '.')) {
            if (!node->is_object() || !node->contains(part)) {
                found = false;
                break;
            }
            node = &(*node)[part];
        }
        if (!found || !node->is_number()) continue;
        if (node->is_number_integer()) {
            if (value != std::round(value)) throw ConfigError("sweep axis " + path + " takes integer values");
            *node = static_cast<long long>(value);
        } else {
            *node = value;
        }
        return out;
    }
    throw ConfigError("sweep axis " + path + " does not name a numeric leaf of the config");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os), columns_(header.size()) {
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::logic_error("CSV row has the wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os_ << ',';
        os_ << cells[i];
    }
    os_ << '\n';
}

void write_matrix_csv(std::ostream& os, const CMatrix& m) {
    CsvWriter w(os, {"row", "col", "re", "im"});
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            w.row({std::to_string(i), std::to_string(j), format_double(m(i, j).real()), format_double(m(i, j).imag())});
        }
    }
}

}  // namespace gravidec
