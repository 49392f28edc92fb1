#include "gravidec/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gravidec/errors.hpp"
#include "gravidec/states.hpp"

namespace gravidec {

namespace {

bool same_energy(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({std::abs(a), std::abs(b), 1.0}); }

std::vector<EnergyLevel> merge_sorted(std::vector<EnergyLevel> levels) {
    std::sort(levels.begin(), levels.end(), [](const EnergyLevel& a, const EnergyLevel& b) { return a.E < b.E; });
    std::vector<EnergyLevel> out;
    for (const EnergyLevel& l : levels) {
        if (!out.empty() && same_energy(out.back().E, l.E)) {
            out.back().p += l.p;
        } else {
            out.push_back(l);
        }
    }
    return out;
}

/// Geometric weights q^n (1 - q) for n <= n_max with q^{n_max+1} <= eps.
std::vector<double> geometric_weights(double beta_omega, double eps) {
    const double one_minus_q = -std::expm1(-beta_omega);
    const double log_q = -beta_omega;
    const int n_max = std::max(0, static_cast<int>(std::ceil(std::log(eps) / log_q)) - 1);
    std::vector<double> w(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) w[static_cast<std::size_t>(n)] = std::exp(log_q * n) * one_minus_q;
    return w;
}

std::vector<double> poisson_weights(double mean, double eps) {
    std::vector<double> w;
    double p = std::exp(-mean);
    double sum = 0.0;
    for (int n = 0;; ++n) {
        w.push_back(p);
        sum += p;
        const double next = p * mean / (n + 1);
        // Remaining mass beyond n is at most next / (1 - mean/(n+2)) once n+2 > mean.
        if (n + 2 > mean) {
            const double bound = next / (1.0 - mean / (n + 2));
            if (bound <= eps || 1.0 - sum <= eps * 1e-3) break;
        }
        if (n > 100000) throw DimensionError("Poisson cutoff exceeds 1e5 levels");
        p = next;
    }
    return w;
}

std::vector<int> digits_of(long index, std::span<const int> dims) {
    std::vector<int> d(dims.size());
    for (std::size_t k = dims.size(); k-- > 0;) {
        d[k] = static_cast<int>(index % dims[k]);
        index /= dims[k];
    }
    return d;
}

RVector env_energy_diagonal(std::span<const double> mode_freqs, int dim_per_mode) {
    const std::vector<int> dims(mode_freqs.size(), dim_per_mode);
    long total = 1;
    for (int d : dims) total *= d;
    RVector e(total);
    for (long i = 0; i < total; ++i) {
        const std::vector<int> n = digits_of(i, dims);
        double E = 0.0;
        for (std::size_t k = 0; k < n.size(); ++k) E += mode_freqs[k] * n[k];
        e(i) = E;
    }
    return e;
}

}  // namespace

EnergyDistribution EnergyDistribution::from_levels(std::vector<EnergyLevel> levels, double tail_mass) {
    EnergyDistribution d;
    d.entries = merge_sorted(std::move(levels));
    d.tail_mass = tail_mass;
    d.validate();
    return d;
}

void EnergyDistribution::validate() const {
    double s = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!(entries[i].p >= 0.0)) throw DomainError("energy distribution has a negative weight");
        if (i > 0 && !(entries[i].E > entries[i - 1].E)) throw DomainError("energy distribution not sorted/merged");
        s += entries[i].p;
    }
    if (tail_mass < 0.0 || std::abs(s + tail_mass - 1.0) > 1e-12) {
        throw DomainError("energy distribution mass " + std::to_string(s) + " + tail " +
                          std::to_string(tail_mass) + " != 1");
    }
}

double EnergyDistribution::total() const {
    return std::accumulate(entries.begin(), entries.end(), 0.0,
                           [](double acc, const EnergyLevel& l) { return acc + l.p; });
}

double EnergyDistribution::max_energy() const { return entries.empty() ? 0.0 : entries.back().E; }

EnergyDistribution energy_distribution(const EnvironmentSpec& env, double tail_epsilon, const PhysicalConstants& k,
                                       std::size_t max_tuples) {
    if (!(tail_epsilon > 0.0 && tail_epsilon <= 1e-3)) throw DomainError("tail_epsilon must lie in (0, 1e-3]");
    validate(env);

    auto convolve_modes = [&](const std::vector<double>& freqs, auto weights_for) {
        const double per_mode = tail_epsilon / static_cast<double>(freqs.size());
        std::vector<EnergyLevel> acc{{0.0, 1.0}};
        for (double w : freqs) {
            const std::vector<double> pw = weights_for(w, per_mode);
            if (acc.size() * pw.size() > max_tuples) {
                throw DimensionError("energy distribution exceeds " + std::to_string(max_tuples) + " levels");
            }
            std::vector<EnergyLevel> next;
            next.reserve(acc.size() * pw.size());
            for (const EnergyLevel& l : acc) {
                for (std::size_t n = 0; n < pw.size(); ++n) next.push_back({l.E + w * static_cast<double>(n), l.p * pw[n]});
            }
            acc = merge_sorted(std::move(next));
        }
        double kept = 0.0;
        for (const EnergyLevel& l : acc) kept += l.p;
        return EnergyDistribution::from_levels(std::move(acc), std::max(0.0, 1.0 - kept));
    };

    if (const auto* th = std::get_if<ThermalMultimode>(&env)) {
        const double beta = beta_natural(th->T, k);
        return convolve_modes(field_mode_frequencies(env),
                              [&](double w, double eps) { return geometric_weights(beta * w, eps); });
    }
    if (const auto* th = std::get_if<ThermalSingleMode>(&env)) {
        const double beta = beta_natural(th->T, k);
        return convolve_modes({th->omega}, [&](double w, double eps) { return geometric_weights(beta * w, eps); });
    }
    if (const auto* coh = std::get_if<CoherentSingleMode>(&env)) {
        const double mean = std::norm(coh->alpha);
        return convolve_modes({coh->omega}, [&](double, double eps) { return poisson_weights(mean, eps); });
    }
    const auto& fock = std::get<FockProduct>(env);
    double E = 0.0;
    for (std::size_t i = 0; i < fock.occupations.size(); ++i) E += fock.mode_freqs[i] * fock.occupations[i];
    return EnergyDistribution::from_levels({{E, 1.0}}, 0.0);
}

EnergyDistribution energy_distribution_from_diagonal(const DensityMatrix& rho_env, std::span<const int> mode_dims,
                                                     std::span<const double> mode_freqs) {
    if (mode_dims.size() != mode_freqs.size()) throw DimensionError("mode dims and frequencies differ in length");
    const long total = std::accumulate(mode_dims.begin(), mode_dims.end(), 1L, std::multiplies<long>());
    if (total != rho_env.dim()) throw DimensionError("environment state does not match mode dimensions");
    std::vector<EnergyLevel> levels;
    double kept = 0.0;
    for (long i = 0; i < total; ++i) {
        const double p = rho_env.data(i, i).real();
        if (p == 0.0) continue;
        const std::vector<int> n = digits_of(i, mode_dims);
        double E = 0.0;
        for (std::size_t k = 0; k < n.size(); ++k) E += mode_freqs[k] * n[k];
        levels.push_back({E, p});
        kept += p;
    }
    return EnergyDistribution::from_levels(std::move(levels), std::max(0.0, 1.0 - kept));
}

TotalHamiltonian build_total_hamiltonian(double g0, double Omega, std::span<const double> mode_freqs, int dim_system,
                                         int dim_per_mode, int joint_cap) {
    if (!(Omega > 0.0)) throw DomainError("Omega must be positive");
    if (mode_freqs.empty()) throw DimensionError("at least one field mode is required");
    if (dim_system < 2 || dim_per_mode < 2) throw DimensionError("truncation dimensions must be >= 2");
    double joint = dim_system;
    for (std::size_t k = 0; k < mode_freqs.size(); ++k) joint *= dim_per_mode;
    if (joint > joint_cap) {
        throw DimensionError("joint dimension " + std::to_string(static_cast<long long>(joint)) + " = " +
                             std::to_string(dim_system) + " (system) x " + std::to_string(dim_per_mode) + "^" +
                             std::to_string(mode_freqs.size()) + " (modes) exceeds cap " + std::to_string(joint_cap));
    }

    TotalHamiltonian h;
    h.dims.push_back(dim_system);
    for (std::size_t k = 0; k < mode_freqs.size(); ++k) h.dims.push_back(dim_per_mode);
    h.g0 = g0;
    h.Omega = Omega;
    h.mode_freqs.assign(mode_freqs.begin(), mode_freqs.end());
    h.env_energies = env_energy_diagonal(mode_freqs, dim_per_mode);

    const Ladder l = ladder(dim_system);
    const RMatrix n = l.n.data.real();
    const RMatrix x = (l.a.data + l.a_dag.data).real();
    const RMatrix he = h.env_energies.asDiagonal();
    const RMatrix id_s = RMatrix::Identity(dim_system, dim_system);
    const RMatrix id_e = RMatrix::Identity(he.rows(), he.cols());
    h.matrix = Omega * kron(n, id_e) + kron(id_s, he) - g0 * kron(x, he);
    return h;
}

TotalHamiltonian build_total_hamiltonian(const ExperimentSpec& spec, const CouplingParams& coupling,
                                         const TruncationPolicy& policy, int joint_cap) {
    spec.validate();
    policy.validate();
    const std::vector<double> freqs = field_mode_frequencies(spec.environment);
    return build_total_hamiltonian(coupling.g0, spec.Omega, freqs, policy.dim_system, policy.dim_per_env_mode,
                                   joint_cap);
}

DensityMatrix environment_density(const EnvironmentSpec& env, int dim_per_mode, const PhysicalConstants& k) {
    validate(env);
    if (dim_per_mode < 2) throw DimensionError("dim_per_mode must be >= 2");
    auto thermal_mode = [&](double beta_omega) {
        DensityMatrix rho;
        rho.data = CMatrix::Zero(dim_per_mode, dim_per_mode);
        double kept = 0.0;
        for (int n = 0; n < dim_per_mode; ++n) {
            const double p = std::exp(-beta_omega * n) * -std::expm1(-beta_omega);
            rho.data(n, n) = p;
            kept += p;
        }
        rho.tail_mass = 1.0 - kept;
        return rho;
    };
    auto product = [](const std::vector<DensityMatrix>& factors) {
        DensityMatrix out = factors.front();
        for (std::size_t i = 1; i < factors.size(); ++i) {
            out.data = kron(out.data, factors[i].data);
        }
        out.tail_mass = 1.0 - out.data.trace().real();
        return out;
    };

    if (const auto* th = std::get_if<ThermalMultimode>(&env)) {
        const double beta = beta_natural(th->T, k);
        std::vector<DensityMatrix> f;
        for (double w : field_mode_frequencies(env)) f.push_back(thermal_mode(beta * w));
        return product(f);
    }
    if (const auto* th = std::get_if<ThermalSingleMode>(&env)) {
        return thermal_mode(beta_natural(th->T, k) * th->omega);
    }
    if (const auto* coh = std::get_if<CoherentSingleMode>(&env)) {
        return fock_density(CoherentState{coh->alpha}, dim_per_mode);
    }
    const auto& fock = std::get<FockProduct>(env);
    std::vector<DensityMatrix> f;
    for (int n : fock.occupations) {
        if (n >= dim_per_mode) throw DimensionError("occupation " + std::to_string(n) + " outside truncation");
        f.push_back(fock_density(FockNumberState{n}, dim_per_mode));
    }
    return product(f);
}

BruteForceEvolver::BruteForceEvolver(TotalHamiltonian h) : h_(std::move(h)), prop_(h_.matrix) {}

DensityMatrix BruteForceEvolver::joint_state(const DensityMatrix& rho_s0, const DensityMatrix& rho_e0, double t) const {
    if (rho_s0.dim() != h_.dim_system() || rho_e0.dim() != h_.dim_environment()) {
        throw DimensionError("initial states do not match the Hamiltonian factors");
    }
    DensityMatrix out;
    out.data = prop_.evolve(kron(rho_s0.data, rho_e0.data), t);
    out.tail_mass = 1.0 - (1.0 - rho_s0.tail_mass) * (1.0 - rho_e0.tail_mass);
    return out;
}

DensityMatrix BruteForceEvolver::system_state(const DensityMatrix& rho_s0, const DensityMatrix& rho_e0, double t) const {
    const std::vector<int> dims{h_.dim_system(), h_.dim_environment()};
    return partial_trace(joint_state(rho_s0, rho_e0, t), dims, 0);
}

DensityMatrix BruteForceEvolver::environment_state(const DensityMatrix& rho_s0, const DensityMatrix& rho_e0,
                                                   double t) const {
    const std::vector<int> dims{h_.dim_system(), h_.dim_environment()};
    return partial_trace(joint_state(rho_s0, rho_e0, t), dims, 1);
}

DensityMatrix brute_force_joint_state(const TotalHamiltonian& h, const DensityMatrix& rho_s0,
                                      const DensityMatrix& rho_e0, double t) {
    return BruteForceEvolver(h).joint_state(rho_s0, rho_e0, t);
}

DensityMatrix environment_state(const TotalHamiltonian& h, const DensityMatrix& rho_s0, const DensityMatrix& rho_e0,
                                double t) {
    return BruteForceEvolver(h).environment_state(rho_s0, rho_e0, t);
}

CMatrix free_evolution(const CMatrix& rho, double Omega, double t) {
    CMatrix out = rho;
    for (Eigen::Index n = 0; n < rho.cols(); ++n) {
        for (Eigen::Index m = 0; m < rho.rows(); ++m) {
            out(m, n) *= std::polar(1.0, -Omega * static_cast<double>(m - n) * t);
        }
    }
    return out;
}

ReducedState conditional_displacement_reduced(const DensityMatrix& rho_s0, const EnergyDistribution& dist, double g0,
                                              double Omega, double t) {
    const cplx lam = lambda_t(g0, Omega, t);
    const double mag = std::abs(lam);
    const int dim = rho_s0.dim();

    ReducedState out;
    CMatrix acc = CMatrix::Zero(dim, dim);
    if (mag == 0.0) {
        acc = dist.total() * rho_s0.data;
    } else {
        const DisplacementFamily family(std::arg(lam), dim);
        for (const EnergyLevel& level : dist.entries) {
            const double s = level.E * mag;
            if (s == 0.0) {
                acc += level.p * rho_s0.data;
                continue;
            }
            out.guard_violated = out.guard_violated || family.guard_violated(s);
            const CMatrix d = family.at(s);
            acc += level.p * (d * rho_s0.data * d.adjoint());
        }
    }
    out.rho.data = free_evolution(acc, Omega, t);
    out.rho.tail_mass = 1.0 - (1.0 - rho_s0.tail_mass) * (1.0 - dist.tail_mass);
    return out;
}

CMatrix phase_operator(const TotalHamiltonian& h, double t) {
    const RMatrix gen = (h.env_energies / h.Omega).array().square().matrix().asDiagonal();
    const double s = h.g0 * h.g0 * (h.Omega * t - std::sin(h.Omega * t));
    return HermitianPropagator(gen).at(-s);
}

CMatrix closed_form_propagator(const TotalHamiltonian& h, double t) {
    const int ds = h.dim_system();
    const int de = h.dim_environment();
    const cplx lam = lambda_t(h.g0, h.Omega, t);

    CMatrix u_se = CMatrix::Zero(static_cast<Eigen::Index>(ds) * de, static_cast<Eigen::Index>(ds) * de);
    const bool moving = std::abs(lam) > 0.0;
    const std::optional<DisplacementFamily> family =
        moving ? std::optional<DisplacementFamily>(std::in_place, std::arg(lam), ds) : std::nullopt;
    for (int e = 0; e < de; ++e) {
        const double s = h.env_energies(e) * std::abs(lam);
        const CMatrix d = (family && s != 0.0) ? family->at(s) : identity(ds);
        for (int i = 0; i < ds; ++i) {
            for (int j = 0; j < ds; ++j) u_se(static_cast<Eigen::Index>(i) * de + e, static_cast<Eigen::Index>(j) * de + e) = d(i, j);
        }
    }

    CVector free_phase(static_cast<Eigen::Index>(ds) * de);
    for (int i = 0; i < ds; ++i) {
        for (int e = 0; e < de; ++e) {
            free_phase(static_cast<Eigen::Index>(i) * de + e) = std::polar(1.0, -(h.Omega * i + h.env_energies(e)) * t);
        }
    }
    const CMatrix phi = kron(identity(ds), phase_operator(h, t));
    return free_phase.asDiagonal() * u_se * phi;
}

cplx delta_identity_trace(const TotalHamiltonian& h, int n, int n_prime, double t) {
    const int de = h.dim_environment();
    if (n < 0 || n >= de || n_prime < 0 || n_prime >= de) throw DimensionError("environment index out of range");
    const CMatrix free_e = HermitianPropagator(RMatrix(h.env_energies.asDiagonal())).at(t);
    const CMatrix left = free_e * phase_operator(h, t);
    CMatrix ket_bra = CMatrix::Zero(de, de);
    ket_bra(n, n_prime) = 1.0;
    return (left * ket_bra * left.adjoint()).trace();
}

}  // namespace gravidec
