#include "gravidec/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>

#include <CLI11.hpp>

#include "gravidec/decoherence.hpp"
#include "gravidec/dynamics.hpp"
#include "gravidec/errors.hpp"
#include "gravidec/parallel.hpp"
#include "gravidec/reduced.hpp"
#include "gravidec/verification.hpp"

namespace gravidec {

namespace {

json header(const ScenarioConfig& cfg, const char* command) {
    return json{{"schema_version", kSchemaVersion}, {"command", command}, {"params_hash", params_hash(cfg.raw)}};
}

std::vector<double> resolve_times(const ScenarioConfig& cfg, std::span<const double> times) {
    std::vector<double> out(times.begin(), times.end());
    if (out.empty()) out = cfg.time_samples;
    if (out.empty()) throw ConfigError("no time samples: set time_samples_s or pass --t");
    for (double t : out) {
        if (!std::isfinite(t)) throw ConfigError("time samples must be finite");
    }
    return out;
}

std::string route_model(const ScenarioConfig& cfg) {
    return cfg.evolve_route == "fock" ? "conditional-displacement" : "characteristic-function";
}

struct EvolvePoint {
    CMatrix rho_x;  // empty when the dump is skipped
    double purity = 0.0;
    double tail_mass = 0.0;
    bool guard_violated = false;
};

EvolvePoint evolve_point(const ScenarioConfig& cfg, const CouplingParams& c, const EnergyDistribution* dist,
                         const DensityMatrix& rho_s0, const PositionGrid& grid, double t, bool want_matrix) {
    const ExperimentSpec& spec = cfg.require_experiment();
    EvolvePoint p;
    if (cfg.evolve_route == "fock") {
        const ReducedState red = conditional_displacement_reduced(rho_s0, *dist, c.g0, spec.Omega, t);
        p.purity = red.rho.purity();
        p.tail_mass = red.rho.tail_mass;
        p.guard_violated = red.guard_violated;
        if (want_matrix) p.rho_x = fock_to_position(red.rho, grid);
    } else {
        const InfluenceFunction F = exact_influence(spec.environment, c.g0, spec.Omega);
        p.rho_x = matrix_elements_grid(chi_of_state(cfg.initial_state), F, grid, t, spec.Omega);
        // Tr rho^2 = Int dx dx' |rho(x, x')|^2 on the grid.
        const double h = grid.spacing();
        p.purity = p.rho_x.cwiseAbs2().sum() * h * h / grid.kappa;
    }
    return p;
}

double min_purity(const ScenarioConfig& cfg) {
    const CouplingParams c = cfg.coupling();
    const std::vector<double> times = resolve_times(cfg, {});
    const EnergyDistribution dist = energy_distribution(cfg.require_experiment().environment, cfg.truncation.tail_epsilon);
    const DensityMatrix rho_s0 = fock_density(cfg.initial_state, cfg.truncation.dim_system);
    double best = std::numeric_limits<double>::infinity();
    for (double t : times) {
        const ReducedState red = conditional_displacement_reduced(rho_s0, dist, c.g0, cfg.require_experiment().Omega, t);
        best = std::min(best, red.rho.purity());
    }
    return best;
}

void write_json(const json& doc, const std::filesystem::path* dir, const char* file, std::ostream& out) {
    if (dir) {
        std::ofstream f(*dir / file);
        if (!f) throw ConfigError("cannot write " + (*dir / file).string());
        f << doc.dump(2) << '\n';
    }
    out << doc.dump(2) << '\n';
}

std::ofstream open_out(const std::filesystem::path& dir, const char* file) {
    std::ofstream f(dir / file);
    if (!f) throw ConfigError("cannot write " + (dir / file).string());
    return f;
}

}  // namespace

json cmd_coupling(const ScenarioConfig& cfg) {
    const CouplingParams c = cfg.coupling();
    json j = header(cfg, "coupling");
    j["delta_phi_rad"] = c.delta_phi;
    j["x_zpf_m"] = c.x_zpf;
    j["g0"] = c.g0;
    j["kappa_m2"] = c.kappa;
    j["g0_overridden"] = cfg.g0_override.has_value();
    return j;
}

json cmd_lcoh(const ScenarioConfig& cfg) {
    const DecoherenceResult r = decoherence_for(cfg.require_experiment(), cfg.coupling(), cfg.time_samples);
    json j = header(cfg, "lcoh");
    j["lambda_coh_m"] = r.lambda_coh;
    j["lambda_coh_alt_m"] = r.lambda_coh_alt;
    j["lambda_coh_no_half_m"] = r.lambda_coh_without_half();
    j["exponent_multiplicity"] = r.multiplicity;
    j["regime"] = r.regime;
    j["validity_flags"] = r.validity_flags;
    return j;
}

void cmd_gamma(const ScenarioConfig& cfg, std::span<const double> times, std::ostream& csv) {
    std::vector<double> ts(times.begin(), times.end());
    if (ts.empty() && cfg.gamma.t_s) ts.push_back(*cfg.gamma.t_s);
    ts = resolve_times(cfg, ts);
    if (cfg.gamma.delta_x_m.empty()) throw ConfigError("missing field gamma.delta_x_m");
    const DecoherenceResult r = decoherence_for(cfg.require_experiment(), cfg.coupling(), ts);
    CsvWriter w(csv, {"delta_x_m", "t_s", "gamma_abs2"});
    for (double t : ts) {
        for (double dx : cfg.gamma.delta_x_m) w.row({format_double(dx), format_double(t), format_double(r.gamma_abs2(dx, t))});
    }
}

EvolveSummary cmd_evolve(const ScenarioConfig& cfg, std::span<const double> times, std::ostream* rho_csv,
                         std::ostream& purity_csv) {
    const std::vector<double> ts = resolve_times(cfg, times);
    const CouplingParams c = cfg.coupling();
    const PositionGrid grid = cfg.grid();
    const std::string hash = params_hash(cfg.raw);
    const std::string model = route_model(cfg);

    std::optional<EnergyDistribution> dist;
    DensityMatrix rho_s0;
    if (cfg.evolve_route == "fock") {
        dist = energy_distribution(cfg.require_experiment().environment, cfg.truncation.tail_epsilon);
        rho_s0 = fock_density(cfg.initial_state, cfg.truncation.dim_system);
    }

    std::vector<EvolvePoint> points(ts.size());
    // Quadrature grids parallelize internally; the Fock route parallelizes over time.
    if (cfg.evolve_route == "fock") {
        parallel_for(ts.size(), [&](std::size_t i) {
            points[i] = evolve_point(cfg, c, &*dist, rho_s0, grid, ts[i], rho_csv != nullptr);
        });
    } else {
        for (std::size_t i = 0; i < ts.size(); ++i) points[i] = evolve_point(cfg, c, nullptr, rho_s0, grid, ts[i], true);
    }

    EvolveSummary summary;
    if (rho_csv) {
        CsvWriter w(*rho_csv, {"x", "x_prime", "re", "im", "abs2", "t", "model", "params_hash"});
        const double scale = 1.0 / std::sqrt(grid.kappa);
        for (std::size_t k = 0; k < ts.size(); ++k) {
            const std::string tcell = format_double(ts[k]);
            const CMatrix& m = points[k].rho_x;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const std::string xi = format_double(grid.points[i] * scale);
                for (std::size_t j = 0; j < grid.size(); ++j) {
                    const cplx v = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                    w.row({xi, format_double(grid.points[j] * scale), format_double(v.real()), format_double(v.imag()),
                           format_double(std::norm(v)), tcell, model, hash});
                    ++summary.rows;
                }
            }
        }
    }
    CsvWriter p(purity_csv, {"t_s", "purity", "tail_mass", "guard_violated", "model", "params_hash"});
    for (std::size_t k = 0; k < ts.size(); ++k) {
        p.row({format_double(ts[k]), format_double(points[k].purity), format_double(points[k].tail_mass),
               points[k].guard_violated ? "1" : "0", model, hash});
        summary.purity.push_back(points[k].purity);
        summary.guard_violated.push_back(points[k].guard_violated);
    }
    return summary;
}

json cmd_verify(const ScenarioConfig& cfg) {
    const std::vector<VerifyFixture> fixtures = cfg.verify_fixtures.empty() ? default_fixtures() : cfg.verify_fixtures;
    const std::vector<CheckResult> checks = run_verify_suite(fixtures, cfg.corrupt_g0_sign, cfg.verify_grid_points);
    json j = header(cfg, "verify");
    j["checks"] = json::array();
    bool all = true;
    for (const CheckResult& r : checks) {
        j["checks"].push_back(to_json(r));
        all = all && r.pass;
    }
    j["all_pass"] = all;
    return j;
}

void cmd_sweep(const ScenarioConfig& cfg, const SweepSpec& sweep, std::ostream& csv) {
    std::vector<double> values = sweep.values;
    std::sort(values.begin(), values.end());
    struct Row {
        std::vector<double> outputs;
        std::string hash;
    };
    std::vector<ScenarioConfig> configs;
    configs.reserve(values.size());
    for (double v : values) configs.push_back(parse_config(with_leaf(cfg.raw, sweep.axis, v)));

    std::vector<Row> rows(values.size());
    parallel_for(values.size(), [&](std::size_t i) {
        const ScenarioConfig& pc = configs[i];
        Row row;
        row.hash = params_hash(pc.raw);
        for (const std::string& out : sweep.outputs) {
            if (out == "lambda_coh_m") {
                row.outputs.push_back(decoherence_for(pc.require_experiment(), pc.coupling(), pc.time_samples).lambda_coh);
            } else if (out == "gamma_abs2") {
                double t = 0.0;
                if (pc.gamma.t_s) {
                    t = *pc.gamma.t_s;
                } else if (!pc.time_samples.empty()) {
                    t = pc.time_samples.front();
                } else {
                    throw ConfigError("gamma_abs2 needs gamma.t_s or time_samples_s");
                }
                double dx = 0.0;
                if (sweep.delta_x_m) {
                    dx = *sweep.delta_x_m;
                } else if (!pc.gamma.delta_x_m.empty()) {
                    dx = pc.gamma.delta_x_m.front();
                } else {
                    throw ConfigError("gamma_abs2 needs sweep.delta_x_m or gamma.delta_x_m");
                }
                const std::vector<double> ts{t};
                row.outputs.push_back(decoherence_for(pc.require_experiment(), pc.coupling(), ts).gamma_abs2(dx, t));
            } else {
                row.outputs.push_back(min_purity(pc));
            }
        }
        rows[i] = std::move(row);
    });

    std::vector<std::string> head{sweep.axis};
    head.insert(head.end(), sweep.outputs.begin(), sweep.outputs.end());
    head.push_back("params_hash");
    CsvWriter w(csv, head);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::vector<std::string> cells{format_double(values[i])};
        for (double x : rows[i].outputs) cells.push_back(format_double(x));
        cells.push_back(rows[i].hash);
        w.row(cells);
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gravitational light-bending decoherence of a trapped oscillator", "gravidec"};
    app.require_subcommand(1);

    std::string config_path, out_dir, sweep_path;
    std::vector<double> times;
    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", config_path, "Scenario JSON");
        if (config_required) opt->required();
        sub->add_option("--out", out_dir, "Output directory");
    };
    CLI::App* coupling = app.add_subcommand("coupling", "Deflection angle, zero-point length and g0");
    CLI::App* lcoh = app.add_subcommand("lcoh", "Closed-form coherence length");
    CLI::App* gamma = app.add_subcommand("gamma", "Decoherence factor |Gamma_t(dx)|^2 as CSV");
    CLI::App* evolve = app.add_subcommand("evolve", "Reduced position matrix elements and purity over time");
    CLI::App* verify = app.add_subcommand("verify", "Oracle-equivalence and invariant suite");
    CLI::App* sweep = app.add_subcommand("sweep", "Scalar outputs over one config axis");
    for (CLI::App* s : {coupling, lcoh, gamma, evolve, sweep}) add_common(s, true);
    add_common(verify, false);
    for (CLI::App* s : {gamma, evolve}) s->add_option("--t", times, "Time samples in s (overrides the config)");
    sweep->add_option("--sweep", sweep_path, "Sweep JSON")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        ScenarioConfig cfg = config_path.empty() ? parse_config(json::object()) : load_config(config_path);
        std::optional<std::filesystem::path> dir;
        if (!out_dir.empty()) {
            dir = out_dir;
            std::error_code ec;
            std::filesystem::create_directories(*dir, ec);
            if (ec) throw ConfigError("cannot create output directory " + out_dir + ": " + ec.message());
        }
        const std::filesystem::path* d = dir ? &*dir : nullptr;

        if (*coupling) {
            write_json(cmd_coupling(cfg), d, "coupling.json", out);
        } else if (*lcoh) {
            write_json(cmd_lcoh(cfg), d, "lcoh.json", out);
        } else if (*gamma) {
            if (d) {
                std::ofstream f = open_out(*d, "gamma.csv");
                cmd_gamma(cfg, times, f);
            } else {
                cmd_gamma(cfg, times, out);
            }
        } else if (*evolve) {
            if (!d) throw ConfigError("evolve writes rho.csv and purity.csv and needs --out DIR");
            std::ofstream rho = open_out(*d, "rho.csv");
            std::ofstream purity = open_out(*d, "purity.csv");
            const EvolveSummary s = cmd_evolve(cfg, times, &rho, purity);
            for (std::size_t i = 0; i < s.guard_violated.size(); ++i) {
                if (s.guard_violated[i]) err << "warning: displacement guard violated at time sample " << i << '\n';
            }
            out << json{{"rows", s.rows}, {"purity", s.purity}}.dump() << '\n';
        } else if (*verify) {
            const json report = cmd_verify(cfg);
            write_json(report, d, "verify.json", out);
            if (!report.at("all_pass").get<bool>()) {
                err << "verification failed\n";
                return kExitVerifyFailed;
            }
        } else if (*sweep) {
            std::ifstream in(sweep_path);
            if (!in) throw ConfigError("cannot open sweep spec " + sweep_path);
            json doc;
            try {
                doc = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError("sweep spec is not valid JSON: " + std::string(e.what()));
            }
            const SweepSpec spec = parse_sweep(doc);
            if (d) {
                std::ofstream f = open_out(*d, "sweep.csv");
                cmd_sweep(cfg, spec, f);
            } else {
                cmd_sweep(cfg, spec, out);
            }
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const RegimeError& e) {
        err << "regime error: " << e.what() << '\n';
        return kExitRegime;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return kExitRegime;
    } catch (const DimensionError& e) {
        err << "dimension error: " << e.what() << '\n';
        return kExitRegime;
    } catch (const QuadratureError& e) {
        err << "quadrature error: " << e.what() << '\n';
        return kExitRegime;
    } catch (const ExtractionError& e) {
        err << "extraction error: " << e.what() << '\n';
        return kExitRegime;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitOk;
}

}  // namespace gravidec
