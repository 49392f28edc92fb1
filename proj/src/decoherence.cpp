#include "gravidec/decoherence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gravidec/errors.hpp"
#include "gravidec/parallel.hpp"

namespace gravidec {

namespace {

void check_forms(double a, double b, const char* what) {
    if (!(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), std::abs(b)))) {
        std::ostringstream os;
        os << what << ": the two closed forms disagree (" << a << " vs " << b << ")";
        throw std::logic_error(os.str());
    }
}

/// Deflection angle consistent with the (possibly overridden) g0:
/// g0 = delta_phi x_zpf / r.
double effective_delta_phi(const ExperimentSpec& spec, const CouplingParams& c) { return c.g0 * spec.r / c.x_zpf; }

DecoherenceResult base(const ExperimentSpec& spec, const CouplingParams& c, const char* regime) {
    spec.validate();
    if (!(c.g0 > 0.0) || !(c.x_zpf > 0.0)) throw DomainError("decoherence needs g0 > 0 and x_zpf > 0");
    DecoherenceResult r;
    r.Omega = spec.Omega;
    r.regime = regime;
    const double geometric = deflection_angle(spec.M, spec.r);
    if (std::abs(effective_delta_phi(spec, c) - geometric) > 1e-9 * geometric) r.validity_flags.push_back("g0_override");
    return r;
}

}  // namespace

double DecoherenceResult::lambda_coh_without_half() const { return lambda_coh * std::numbers::sqrt2; }

double DecoherenceResult::gamma_abs2(double dx, double t) const {
    // Reducing the phase first makes Omega t on a multiple of pi land on sin = 0.
    const double s = std::sin(std::remainder(Omega * t, std::numbers::pi));
    const double q = dx / lambda_coh;
    return std::exp(-multiplicity * q * q * s * s);
}

DecoherenceResult gamma_highT(const ExperimentSpec& spec, const CouplingParams& coupling, double n_kmodes, double T,
                              int polarizations, double max_omega, const PhysicalConstants& k) {
    if (!(T > 0.0)) throw DomainError("temperature must be > 0");
    if (!(n_kmodes >= 1.0) || polarizations < 1) throw DomainError("need at least one field mode");
    DecoherenceResult r = base(spec, coupling, "thermal-highT");
    const double kT = k.k_B * T;
    const double g0 = coupling.g0;
    const double a = std::sqrt(k.hbar * k.hbar * k.hbar * spec.Omega / (2.0 * g0 * g0 * spec.M)) / kT;
    const double b = spec.r / effective_delta_phi(spec, coupling) * (k.hbar * spec.Omega / kT);
    check_forms(a, b, "thermal high-T lambda_coh");
    r.lambda_coh = a;
    r.lambda_coh_alt = b;
    r.multiplicity = n_kmodes * polarizations;
    r.validity_flags.push_back("sqrt2_convention_ambiguity");
    if (max_omega > 0.0 && k.hbar * max_omega / kT > 0.1) r.validity_flags.push_back("hbar*omega/(k_B*T)>0.1");
    if (g0 * kT / (k.hbar * spec.Omega) > 0.01) r.validity_flags.push_back("g0*k_B*T/(hbar*Omega)>0.01");
    return r;
}

DecoherenceResult gamma_single_thermal_mode(const ExperimentSpec& spec, const CouplingParams& coupling, double omega,
                                            double T, const PhysicalConstants& k) {
    if (!(T > 0.0) || !(omega > 0.0)) throw DomainError("single thermal mode needs T > 0 and omega > 0");
    DecoherenceResult r = base(spec, coupling, "thermal-single-mode");
    const double x = k.hbar * omega / (k.k_B * T);
    const double em1 = std::expm1(x);
    if (!std::isfinite(em1)) {
        std::ostringstream os;
        os << "no decoherence: thermal mode unoccupied (hbar*omega/(k_B*T)=" << x << ")";
        throw RegimeError(os.str());
    }
    const double g0 = coupling.g0;
    // (e^x - 1) e^{-x/2} = 2 sinh(x/2)
    const double a = std::sqrt(k.hbar * spec.Omega / (2.0 * g0 * g0 * spec.M)) * 2.0 * std::sinh(0.5 * x) / omega;
    // r/dphi (hbar Omega / E) sqrt(nbar / (1 + nbar)) with E = hbar omega nbar, 1/nbar = e^x - 1
    const double b = spec.r / effective_delta_phi(spec, coupling) * (spec.Omega / omega) * em1 * std::exp(-0.5 * x);
    check_forms(a, b, "single-mode lambda_coh");
    r.lambda_coh = a;
    r.lambda_coh_alt = b;
    r.multiplicity = 1.0;
    if (g0 * omega / spec.Omega > 0.01) r.validity_flags.push_back("g0*omega/Omega>0.01");
    return r;
}

DecoherenceResult gamma_coherent(const ExperimentSpec& spec, const CouplingParams& coupling, cplx alpha, double omega,
                                 std::span<const double> times, const PhysicalConstants& k) {
    const double a_abs = std::abs(alpha);
    if (a_abs == 0.0) throw RegimeError("no decoherence: |alpha|=0");
    if (!(omega > 0.0)) throw DomainError("coherent mode needs omega > 0");
    DecoherenceResult r = base(spec, coupling, "coherent");
    const double g0 = coupling.g0;
    for (double t : times) {
        const double g1 = gamma12(g0, spec.Omega, t).gamma1;
        if (4.0 * a_abs * a_abs * omega * omega * g1 * g1 >= 1.0) {
            std::ostringstream os;
            os << "expansion invalid: sigma(t)<=0 at t=" << t << " s";
            throw RegimeError(os.str());
        }
    }
    const double a = std::sqrt(k.hbar * spec.Omega / (2.0 * g0 * g0 * omega * omega * spec.M * a_abs * a_abs));
    const double b = spec.r / (a_abs * effective_delta_phi(spec, coupling)) * (spec.Omega / omega);
    check_forms(a, b, "coherent lambda_coh");
    r.lambda_coh = a;
    r.lambda_coh_alt = b;
    r.multiplicity = 1.0;
    return r;
}

DecoherenceResult decoherence_for(const ExperimentSpec& spec, const CouplingParams& coupling,
                                  std::span<const double> times, const PhysicalConstants& k) {
    const EnvironmentSpec& env = spec.environment;
    if (const auto* th = std::get_if<ThermalMultimode>(&env)) {
        const double max_w = th->mode_freqs.empty() ? 0.0 : *std::max_element(th->mode_freqs.begin(), th->mode_freqs.end());
        return gamma_highT(spec, coupling, static_cast<double>(th->mode_freqs.size()), th->T, th->polarizations_per_mode,
                           max_w, k);
    }
    if (const auto* th = std::get_if<ThermalSingleMode>(&env)) {
        return gamma_single_thermal_mode(spec, coupling, th->omega, th->T, k);
    }
    if (const auto* coh = std::get_if<CoherentSingleMode>(&env)) {
        return gamma_coherent(spec, coupling, coh->alpha, coh->omega, times, k);
    }
    throw RegimeError("no decoherence factor for a Fock environment: the coupling only adds a phase");
}

ExtractionResult extract_lambda_coh(std::span<const CoherenceSample> samples, double t, double Omega, double kappa,
                                    const ExtractionOptions& opts) {
    if (!(kappa > 0.0) || !(Omega > 0.0)) throw DomainError("extraction needs kappa > 0 and Omega > 0");
    if (!(opts.r_min > 0.0 && opts.r_min < opts.r_max && opts.r_max < 1.0)) {
        throw DomainError("extraction window needs 0 < r_min < r_max < 1");
    }
    const double s = std::sin(std::remainder(Omega * t, std::numbers::pi));
    if (s * s < 0.5) throw DomainError("extraction needs sin^2(Omega t) >= 0.5");

    // Average R over the xi_+ samples that share a Delta.
    std::map<double, std::pair<double, int>> by_delta;
    for (const CoherenceSample& c : samples) {
        if (c.delta_xi == 0.0 || !(c.rho0_abs2 > 0.0)) continue;
        auto& slot = by_delta[std::abs(c.delta_xi)];
        slot.first += c.rho_abs2 / c.rho0_abs2;
        ++slot.second;
    }
    bool any_decay = false;
    double sxx = 0.0, sxy = 0.0;
    std::vector<std::pair<double, double>> used;
    for (const auto& [delta, acc] : by_delta) {
        const double R = acc.first / acc.second;
        if (R < 1.0 - 1e-12) any_decay = true;
        if (R < opts.r_min || R > opts.r_max) continue;
        const double dx = delta / std::sqrt(kappa);
        const double X = opts.multiplicity * dx * dx * s * s;
        const double y = -std::log(R);
        used.emplace_back(X, y);
        sxx += X * X;
        sxy += X * y;
    }
    if (!any_decay) throw ExtractionError("no decay to fit");
    if (static_cast<int>(used.size()) < opts.min_points) {
        std::ostringstream os;
        os << "only " << used.size() << " points with R in [" << opts.r_min << ", " << opts.r_max << "], need "
           << opts.min_points;
        throw ExtractionError(os.str());
    }
    const double c = sxy / sxx;
    double ss_res = 0.0, ss_y = 0.0;
    for (const auto& [X, y] : used) {
        ss_res += (y - c * X) * (y - c * X);
        ss_y += y * y;
    }
    ExtractionResult out;
    out.lambda_coh = 1.0 / std::sqrt(c);
    out.fit_residual = std::sqrt(ss_res / ss_y);
    out.points_used = static_cast<int>(used.size());
    out.residual_warning = out.fit_residual > opts.residual_warning;
    return out;
}

std::vector<CoherenceSample> samples_from_grid(const RMatrix& rho_abs2, const RMatrix& rho0_abs2,
                                               const PositionGrid& grid, double xi_plus_window, int xi_plus_count) {
    grid.validate();
    const auto n = static_cast<long>(grid.size());
    if (rho_abs2.rows() != n || rho_abs2.cols() != n || rho0_abs2.rows() != n || rho0_abs2.cols() != n) {
        throw DimensionError("samples_from_grid: tables must be grid x grid");
    }
    // Anti-diagonals i + j = n - 1 + k carry xi_+ = k h on a symmetric uniform grid.
    const double h = grid.spacing();
    std::vector<long> offsets{0};
    for (long k = 1; static_cast<int>(offsets.size()) < xi_plus_count && k * h <= xi_plus_window + 1e-12 * h; ++k) {
        offsets.push_back(k);
        if (static_cast<int>(offsets.size()) < xi_plus_count) offsets.push_back(-k);
    }
    std::vector<CoherenceSample> out;
    for (long k : offsets) {
        const long sum = n - 1 + k;
        for (long i = std::max(0L, sum - (n - 1)); i <= std::min(n - 1, sum); ++i) {
            const long j = sum - i;
            if (i <= j) continue;
            const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
            // Snap Delta to the lattice so samples from different diagonals group together.
            const double delta = std::round((grid.points[ui] - grid.points[uj]) / h) * h;
            out.push_back({delta, grid.points[ui] + grid.points[uj], rho_abs2(i, j), rho0_abs2(i, j)});
        }
    }
    return out;
}

std::vector<CoherenceSample> sample_coherences(const CharacteristicFunction& chi, const InfluenceFunction& F,
                                               std::span<const double> deltas, std::span<const double> xi_plus,
                                               double t, double Omega, double kappa, const MatrixElementOptions& opts) {
    const InfluenceFunction free = make_unit_influence();
    std::vector<CoherenceSample> out(deltas.size() * xi_plus.size());
    parallel_for(out.size(), [&](std::size_t idx) {
        const double d = deltas[idx / xi_plus.size()];
        const double xp = xi_plus[idx % xi_plus.size()];
        const double xi = 0.5 * (xp + d), xi_prime = 0.5 * (xp - d);
        const double a = std::norm(matrix_elements_general(chi, F, xi, xi_prime, t, Omega, kappa, opts));
        const double b = std::norm(matrix_elements_general(chi, free, xi, xi_prime, t, Omega, kappa, opts));
        out[idx] = {d, xp, a, b};
    });
    return out;
}

std::vector<double> default_xi_plus_window() { return {-0.2, -0.1, 0.0, 0.1, 0.2}; }

}  // namespace gravidec
