#include "gravidec/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "gravidec/dynamics.hpp"
#include "gravidec/errors.hpp"
#include "gravidec/parallel.hpp"

namespace gravidec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

CheckResult finish(std::string name, std::string kind, double measured, double tol, const Stopwatch& sw) {
    CheckResult r;
    r.name = std::move(name);
    r.kind = std::move(kind);
    r.measured = measured;
    r.tolerance = tol;
    r.pass = std::isfinite(measured) && measured <= tol;
    r.seconds = sw.seconds();
    return r;
}

std::vector<int> mode_dims(const std::vector<double>& freqs, int dim_per_mode) {
    return std::vector<int>(freqs.size(), dim_per_mode);
}

}  // namespace

json to_json(const CheckResult& r) {
    return json{{"name", r.name},           {"kind", r.kind},         {"measured", r.measured},
                {"tolerance", r.tolerance}, {"pass", r.pass},         {"seconds", r.seconds}};
}

std::vector<VerifyFixture> default_fixtures() {
    const double T1 = temperature_for(1.0, 1.0);
    const std::vector<StateDescriptor> states{GroundState{}, CoherentState{{0.5, 0.3}}, ThermalOscillator{0.3}};
    const std::vector<std::pair<std::string, EnvironmentSpec>> envs{
        {"thermal", ThermalSingleMode{T1, 1.0}},
        {"coherent", CoherentSingleMode{{1.0, 0.0}, 1.0}},
        {"fock", FockProduct{{2}, {1.0}}},
    };
    std::vector<VerifyFixture> out;
    for (const auto& [label, env] : envs) {
        for (double g0 : {0.0, 1e-3, 0.05, 0.1}) {
            VerifyFixture f;
            f.name = label + "/g0=" + format_double(g0);
            f.environment = env;
            f.g0 = g0;
            f.initial_states = states;
            out.push_back(f);
        }
    }
    // Two distinct field modes, one polarization each.
    for (double g0 : {0.05, 0.1}) {
        VerifyFixture f;
        f.name = "thermal-two-mode/g0=" + format_double(g0);
        f.environment = ThermalMultimode{temperature_for(1.0, 1.0), {1.0, 1.3}, 1};
        f.g0 = g0;
        f.dim_per_env_mode = 4;
        f.initial_states = {GroundState{}, CoherentState{{0.5, 0.3}}};
        out.push_back(f);
    }
    return out;
}

CheckResult oracle_equivalence(const VerifyFixture& f, bool corrupt_g0_sign, double tol) {
    const Stopwatch sw;
    const std::vector<double> freqs = field_mode_frequencies(f.environment);
    const BruteForceEvolver bf(build_total_hamiltonian(f.g0, f.Omega, freqs, f.dim_system, f.dim_per_env_mode));
    const DensityMatrix rho_e = environment_density(f.environment, f.dim_per_env_mode);
    const EnergyDistribution dist =
        energy_distribution_from_diagonal(rho_e, mode_dims(freqs, f.dim_per_env_mode), freqs);
    const double g0_cd = corrupt_g0_sign ? -f.g0 : f.g0;
    double worst = 0.0;
    for (const StateDescriptor& s : f.initial_states) {
        const DensityMatrix rho_s = fock_density(s, f.dim_system);
        for (int k = 0; k < f.time_points; ++k) {
            const double t = kTwoPi / f.Omega * (k + 0.5) / f.time_points;
            const DensityMatrix a = bf.system_state(rho_s, rho_e, t);
            const ReducedState b = conditional_displacement_reduced(rho_s, dist, g0_cd, f.Omega, t);
            worst = std::max(worst, frobenius_distance(a.data, b.rho.data));
        }
    }
    return finish("oracle:" + f.name, "oracle_equivalence", worst, tol, sw);
}

CheckResult recoherence(const VerifyFixture& f, double tol) {
    const Stopwatch sw;
    const std::vector<double> freqs = field_mode_frequencies(f.environment);
    const DensityMatrix rho_e = environment_density(f.environment, f.dim_per_env_mode);
    const EnergyDistribution dist =
        energy_distribution_from_diagonal(rho_e, mode_dims(freqs, f.dim_per_env_mode), freqs);
    double worst = 0.0;
    for (const StateDescriptor& s : f.initial_states) {
        const DensityMatrix rho_s = fock_density(s, f.dim_system);
        const double p0 = conditional_displacement_reduced(rho_s, dist, f.g0, f.Omega, 0.0).rho.purity();
        const double p1 = conditional_displacement_reduced(rho_s, dist, f.g0, f.Omega, kTwoPi / f.Omega).rho.purity();
        worst = std::max(worst, std::abs(p1 - p0));
    }
    return finish("recoherence:" + f.name, "recoherence", worst, tol, sw);
}

CheckResult environment_invariance(const VerifyFixture& f, double tol) {
    const Stopwatch sw;
    const std::vector<double> freqs = field_mode_frequencies(f.environment);
    const BruteForceEvolver bf(build_total_hamiltonian(f.g0, f.Omega, freqs, f.dim_system, f.dim_per_env_mode));
    const DensityMatrix rho_e = environment_density(f.environment, f.dim_per_env_mode);
    double worst = 0.0;
    for (const StateDescriptor& s : f.initial_states) {
        const DensityMatrix rho_s = fock_density(s, f.dim_system);
        // Compare against the t = 0 reduction so both sides carry the same system trace.
        const DensityMatrix ref = bf.environment_state(rho_s, rho_e, 0.0);
        for (int k = 1; k <= f.time_points; ++k) {
            const double t = kTwoPi / f.Omega * k / f.time_points * 0.93;
            worst = std::max(worst, frobenius_distance(bf.environment_state(rho_s, rho_e, t).data, ref.data));
        }
    }
    return finish("env-invariance:" + f.name, "environment_invariance", worst, tol, sw);
}

CheckResult delta_identity(const VerifyFixture& f, int pairs, std::uint64_t seed, double tol) {
    const Stopwatch sw;
    const std::vector<double> freqs = field_mode_frequencies(f.environment);
    const TotalHamiltonian h = build_total_hamiltonian(f.g0, f.Omega, freqs, 2, f.dim_per_env_mode);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> idx(0, h.dim_environment() - 1);
    std::uniform_real_distribution<double> time(0.0, 3.0 * kTwoPi / f.Omega);
    double worst = 0.0;
    for (int i = 0; i < pairs; ++i) {
        const int n = idx(rng);
        const int m = (i % 3 == 0) ? n : idx(rng);
        const cplx tr = delta_identity_trace(h, n, m, time(rng));
        worst = std::max(worst, std::abs(tr - cplx(n == m ? 1.0 : 0.0, 0.0)));
    }
    return finish("delta-identity:" + f.name, "delta_identity", worst, tol, sw);
}

std::vector<PipelineCase> default_pipeline_cases() {
    const double t = std::numbers::pi / 2.0;
    return {
        {"toy-thermal", ThermalSingleMode{temperature_for(1.0, 1.0), 1.0}, GroundState{}, 1e-2, 1.0, t},
        {"toy-coherent", CoherentSingleMode{{1.0, 0.0}, 1.0}, GroundState{}, 1e-2, 1.0, t},
    };
}

CheckResult pipeline_oracle(const PipelineCase& c, const PositionGrid& grid, double tol) {
    const Stopwatch sw;
    constexpr int kFockDim = 30;
    const EnergyDistribution dist = energy_distribution(c.environment, 1e-12);
    const ReducedState red =
        conditional_displacement_reduced(fock_density(c.initial_state, kFockDim), dist, c.g0, c.Omega, c.t);
    const CMatrix fock_route = fock_to_position(red.rho, grid);
    const CMatrix quad_route = matrix_elements_grid(chi_of_state(c.initial_state),
                                                    exact_influence(c.environment, c.g0, c.Omega), grid, c.t, c.Omega);
    const double diff = (fock_route - quad_route).cwiseAbs().maxCoeff() / std::sqrt(grid.kappa);
    return finish("pipeline:" + c.name, "pipeline_oracle", diff, tol, sw);
}

std::vector<ExtractionCase> default_extraction_cases(double g0) {
    std::vector<double> freqs;
    for (int i = 0; i < 50; ++i) freqs.push_back(0.01 * (0.5 + i / 49.0));
    // The single mode decays slowly in Delta at small R; its fit stays near R = 1.
    return {
        {"single-mode", ThermalSingleMode{temperature_for(1.0, 1.0), 1.0}, g0, 0.9, 0.99, 120},
        {"coherent", CoherentSingleMode{{2.0, 0.0}, 1.0}, g0, 0.2, 0.95, 120},
        {"thermal-highT", ThermalMultimode{temperature_for(0.01, 0.01), freqs, 2}, g0, 0.2, 0.95, 120},
    };
}

ExtractionCheck run_extraction_case(const ExtractionCase& c) {
    const Stopwatch sw;
    const double Omega = 1.0;
    const double t = std::numbers::pi / (2.0 * Omega);
    ExperimentSpec spec;
    spec.M = 2.0 * codata2018().hbar;
    spec.Omega = Omega;
    spec.r = 1.0;
    spec.environment = c.environment;
    const CouplingParams coup = with_g0(coupling_g0(spec), c.g0);
    const DecoherenceResult an = decoherence_for(spec, coup);
    const double lam_xi = an.lambda_coh * std::sqrt(coup.kappa);
    const double m = an.multiplicity;

    const CharacteristicFunction chi = chi_of_state(SqueezedVacuum{std::log(4.0 * lam_xi), 0.0});
    const double reach = (c.r_min > 0.5 ? 0.5 : 1.5) * lam_xi / std::sqrt(m);
    std::vector<double> deltas;
    for (int i = 1; i <= c.delta_points; ++i) deltas.push_back(reach * i / c.delta_points);
    const std::vector<CoherenceSample> samples = sample_coherences(
        chi, exact_influence(c.environment, c.g0, Omega), deltas, default_xi_plus_window(), t, Omega, coup.kappa);

    ExtractionOptions o;
    o.r_min = c.r_min;
    o.r_max = c.r_max;
    o.multiplicity = m;
    const ExtractionResult e = extract_lambda_coh(samples, t, Omega, coup.kappa, o);

    ExtractionCheck out;
    out.name = c.name;
    out.lambda_analytic = an.lambda_coh;
    out.lambda_extracted = e.lambda_coh;
    out.rel_error = std::abs(e.lambda_coh / an.lambda_coh - 1.0);
    out.points_used = e.points_used;
    out.r_min = c.r_min;
    out.r_max = c.r_max;
    out.seconds = sw.seconds();
    return out;
}

std::vector<CheckResult> run_verify_suite(const std::vector<VerifyFixture>& fixtures, bool corrupt_g0_sign,
                                          int grid_points) {
    std::vector<std::function<CheckResult()>> jobs;
    for (const VerifyFixture& f : fixtures) {
        jobs.emplace_back([&f, corrupt_g0_sign] { return oracle_equivalence(f, corrupt_g0_sign); });
    }
    for (const VerifyFixture& f : fixtures) {
        jobs.emplace_back([&f] { return recoherence(f); });
        const bool diagonal = !std::holds_alternative<CoherentSingleMode>(f.environment);
        if (diagonal && f.g0 > 0.0) jobs.emplace_back([&f] { return environment_invariance(f); });
        if (f.g0 > 0.0) jobs.emplace_back([&f] { return delta_identity(f, 50, 20240611u, 1e-12); });
    }
    const PositionGrid grid = PositionGrid::uniform(-8.0, 8.0, grid_points);
    for (const PipelineCase& c : default_pipeline_cases()) {
        jobs.emplace_back([c, grid] { return pipeline_oracle(c, grid); });
    }
    std::vector<CheckResult> out(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t i) { out[i] = jobs[i](); });
    return out;
}

}  // namespace gravidec
