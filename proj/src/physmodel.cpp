#include "gravidec/physmodel.hpp"

#include <cmath>
#include <string>

#include "gravidec/errors.hpp"

namespace gravidec {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(name) + " must be positive and finite, got " +
                          std::to_string(v));
    }
}

void require_frequencies(const std::vector<double>& freqs) {
    if (freqs.empty()) throw DomainError("environment needs at least one mode frequency");
    for (double w : freqs) require_positive(w, "mode frequency");
}

}  // namespace

void PhysicalConstants::validate() const {
    require_positive(G, "G");
    require_positive(c, "c");
    require_positive(hbar, "hbar");
    require_positive(k_B, "k_B");
}

const PhysicalConstants& codata2018() {
    static const PhysicalConstants k{};
    return k;
}

void validate(const EnvironmentSpec& env) {
    struct Visitor {
        void operator()(const ThermalMultimode& e) const {
            require_positive(e.T, "T");
            require_frequencies(e.mode_freqs);
            if (e.polarizations_per_mode < 1) throw DomainError("polarizations_per_mode must be >= 1");
        }
        void operator()(const ThermalSingleMode& e) const {
            require_positive(e.T, "T");
            require_positive(e.omega, "omega");
        }
        void operator()(const CoherentSingleMode& e) const {
            require_positive(e.omega, "omega");
            if (!std::isfinite(e.alpha.real()) || !std::isfinite(e.alpha.imag())) {
                throw DomainError("alpha must be finite");
            }
        }
        void operator()(const FockProduct& e) const {
            require_frequencies(e.mode_freqs);
            if (e.occupations.size() != e.mode_freqs.size()) {
                throw DomainError("fock_product: occupations and mode_freqs differ in length");
            }
            for (int n : e.occupations) {
                if (n < 0) throw DomainError("occupation numbers must be >= 0");
            }
        }
    };
    std::visit(Visitor{}, env);
}

std::vector<double> field_mode_frequencies(const EnvironmentSpec& env) {
    struct Visitor {
        std::vector<double> operator()(const ThermalMultimode& e) const {
            std::vector<double> out;
            for (double w : e.mode_freqs) {
                for (int nu = 0; nu < e.polarizations_per_mode; ++nu) out.push_back(w);
            }
            return out;
        }
        std::vector<double> operator()(const ThermalSingleMode& e) const { return {e.omega}; }
        std::vector<double> operator()(const CoherentSingleMode& e) const { return {e.omega}; }
        std::vector<double> operator()(const FockProduct& e) const { return e.mode_freqs; }
    };
    return std::visit(Visitor{}, env);
}

void ExperimentSpec::validate() const {
    require_positive(M, "mass");
    require_positive(Omega, "Omega");
    require_positive(r, "r");
    gravidec::validate(environment);
}

double deflection_angle(double M, double r, const PhysicalConstants& k) {
    if (!(M >= 0.0) || !std::isfinite(M)) throw DomainError("mass must be >= 0");
    require_positive(r, "r");
    return 4.0 * k.G * M / (r * k.c * k.c);
}

double zero_point_length(double M, double Omega, const PhysicalConstants& k) {
    require_positive(M, "mass");
    require_positive(Omega, "Omega");
    return std::sqrt(k.hbar / (2.0 * M * Omega));
}

double position_scale(double M, double Omega, const PhysicalConstants& k) {
    require_positive(M, "mass");
    require_positive(Omega, "Omega");
    return M * Omega / (2.0 * k.hbar);
}

CouplingParams coupling_g0(const ExperimentSpec& spec, const PhysicalConstants& k) {
    spec.validate();
    k.validate();
    CouplingParams out;
    out.delta_phi = deflection_angle(spec.M, spec.r, k);
    out.x_zpf = zero_point_length(spec.M, spec.Omega, k);
    out.kappa = position_scale(spec.M, spec.Omega, k);
    out.g0 = 4.0 * k.G * spec.M / (spec.r * spec.r * k.c * k.c) *
             std::sqrt(k.hbar / (2.0 * spec.M * spec.Omega));
    const double alt = out.delta_phi * out.x_zpf / spec.r;
    if (std::abs(out.g0 - alt) > 1e-12 * std::abs(out.g0)) {
        throw DomainError("coupling forms disagree: " + std::to_string(out.g0) + " vs " +
                          std::to_string(alt));
    }
    return out;
}

CouplingParams with_g0(CouplingParams params, double g0) {
    if (!std::isfinite(g0)) throw DomainError("g0 must be finite");
    params.g0 = g0;
    return params;
}

cplx lambda_t(double g0, double Omega, double t) {
    require_positive(Omega, "Omega");
    const double ph = Omega * t;
    return (g0 / Omega) * cplx(std::cos(ph) - 1.0, std::sin(ph));
}

Gamma12 gamma12(double g0, double Omega, double t) {
    require_positive(Omega, "Omega");
    const double ph = Omega * t;
    return {(g0 / Omega) * (1.0 - std::cos(ph)), (g0 / Omega) * std::sin(ph)};
}

double beta_natural(double T, const PhysicalConstants& k) {
    require_positive(T, "T");
    return k.hbar / (k.k_B * T);
}

double temperature_for(double beta_omega, double omega, const PhysicalConstants& k) {
    require_positive(beta_omega, "beta*omega");
    require_positive(omega, "omega");
    return k.hbar * omega / (k.k_B * beta_omega);
}

}  // namespace gravidec
