#include "gravidec/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gravidec/errors.hpp"
#include "gravidec/parallel.hpp"

namespace gravidec {

namespace {

constexpr cplx kI{0.0, 1.0};

/// <a| D(beta) |b> for coherent states a, b, evaluated through one exponent.
cplx coherent_d_element(cplx a, cplx b, cplx beta) {
    const cplx g = beta + b;
    const cplx exponent = -0.5 * std::norm(a) - 0.5 * std::norm(g) + std::conj(a) * g +
                          0.5 * (beta * std::conj(b) - std::conj(beta) * b);
    return std::exp(exponent);
}

double decay_scale(const GaussianEnvelope& e) {
    // Largest eigenvalue of the 2x2 form sets the narrowest width.
    const double tr = e.qxx + e.qyy;
    const double det = e.qxx * e.qyy - e.qxy * e.qxy;
    const double lmax = 0.5 * tr + std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    return 1.0 / std::sqrt(lmax);
}

CharacteristicFunction finish(std::function<cplx(cplx)> f, std::vector<GaussianEnvelope> env, std::string label) {
    CharacteristicFunction chi;
    chi.evaluate = std::move(f);
    chi.envelopes = std::move(env);
    chi.label = std::move(label);
    chi.gaussian_decay_scale = std::numeric_limits<double>::infinity();
    for (const GaussianEnvelope& e : chi.envelopes) chi.gaussian_decay_scale = std::min(chi.gaussian_decay_scale, decay_scale(e));
    return chi;
}

double quad_form(const GaussianEnvelope& e, double x, double y) { return e.qxx * x * x + 2.0 * e.qxy * x * y + e.qyy * y * y; }
double bilinear(const GaussianEnvelope& e, double x1, double y1, double x2, double y2) {
    return e.qxx * x1 * x2 + e.qxy * (x1 * y2 + y1 * x2) + e.qyy * y1 * y2;
}

double mode_occupation(double beta_omega) { return 1.0 / std::expm1(beta_omega); }

}  // namespace

CharacteristicFunction chi_of_state(const StateDescriptor& state) {
    struct Visitor {
        CharacteristicFunction operator()(const GroundState&) const {
            return finish([](cplx b) { return cplx(std::exp(-0.5 * std::norm(b)), 0.0); }, {GaussianEnvelope{}}, "ground");
        }
        CharacteristicFunction operator()(const CoherentState& c) const {
            const cplx mu = c.mu;
            return finish(
                [mu](cplx b) { return std::exp(-0.5 * std::norm(b) + b * std::conj(mu) - std::conj(b) * mu); },
                {GaussianEnvelope{}}, describe(c));
        }
        CharacteristicFunction operator()(const ThermalOscillator& t) const {
            if (!(t.nbar >= 0.0)) throw DomainError("thermal oscillator needs nbar >= 0");
            const double w = 2.0 * t.nbar + 1.0;
            GaussianEnvelope e;
            e.qxx = e.qyy = w;
            return finish([w](cplx b) { return cplx(std::exp(-0.5 * w * std::norm(b)), 0.0); }, {e}, describe(t));
        }
        CharacteristicFunction operator()(const FockNumberState& f) const {
            if (f.n < 0) throw DomainError("Fock level must be >= 0");
            const auto n = static_cast<unsigned>(f.n);
            GaussianEnvelope e;
            e.poly_degree = 2 * f.n;
            return finish(
                [n](cplx b) {
                    const double x = std::norm(b);
                    return cplx(std::exp(-0.5 * x) * std::laguerre(n, x), 0.0);
                },
                {e}, describe(f));
        }
        CharacteristicFunction operator()(const CatState& c) const {
            const cplx mu = c.mu;
            const cplx ph = std::polar(1.0, c.phase);
            const double norm2 = 2.0 + 2.0 * std::cos(c.phase) * std::exp(-2.0 * std::norm(mu));
            if (!(norm2 > 1e-300)) throw DomainError("cat state has zero norm");
            std::vector<GaussianEnvelope> env(3);
            env[1].center = 2.0 * mu;
            env[2].center = -2.0 * mu;
            return finish(
                [mu, ph, norm2](cplx b) {
                    return (coherent_d_element(mu, mu, b) + ph * coherent_d_element(mu, -mu, b) +
                            std::conj(ph) * coherent_d_element(-mu, mu, b) + coherent_d_element(-mu, -mu, b)) /
                           norm2;
                },
                env, describe(c));
        }
        CharacteristicFunction operator()(const SqueezedVacuum& s) const {
            if (!(s.r >= 0.0)) throw DomainError("squeezing needs r >= 0");
            const double ch = std::cosh(s.r);
            const cplx sh = std::polar(std::sinh(s.r), s.phi);
            // beta' = beta cosh r + conj(beta) e^{i phi} sinh r = M (Re beta, Im beta).
            const double cp = std::cos(s.phi) * std::sinh(s.r);
            const double sp = std::sin(s.phi) * std::sinh(s.r);
            const double m11 = ch + cp, m12 = sp, m21 = sp, m22 = ch - cp;
            GaussianEnvelope e;
            e.qxx = m11 * m11 + m21 * m21;
            e.qxy = m11 * m12 + m21 * m22;
            e.qyy = m12 * m12 + m22 * m22;
            return finish(
                [ch, sh](cplx b) {
                    const cplx bp = b * ch + std::conj(b) * sh;
                    return cplx(std::exp(-0.5 * std::norm(bp)), 0.0);
                },
                {e}, describe(s));
        }
    };
    return std::visit(Visitor{}, state);
}

std::string to_string(InfluenceModel m) {
    switch (m) {
        case InfluenceModel::Unit: return "free";
        case InfluenceModel::ThermalExact: return "thermal-exact";
        case InfluenceModel::ThermalHighT: return "thermal-highT";
        case InfluenceModel::ThermalSingleMode: return "thermal-single-mode";
        case InfluenceModel::Coherent: return "coherent";
        case InfluenceModel::Distribution: return "distribution";
    }
    return "unknown";
}

cplx influence_thermal_exact(double p, double delta, double t, std::span<const double> field_freqs, double beta,
                             double g0, double Omega) {
    const Gamma12 g = gamma12(g0, Omega, t);
    const double u = g.gamma1 * p + g.gamma2 * delta;
    cplx out{1.0, 0.0};
    for (double w : field_freqs) {
        const double bw = beta * w;
        if (!(bw > 0.0)) throw DomainError("thermal influence needs beta*omega > 0");
        const double num = std::expm1(bw);
        const double theta = 2.0 * w * u;
        const double s = std::sin(0.5 * theta);
        // e^{bw} - e^{i theta} = expm1(bw) + (1 - cos theta) - i sin theta
        const cplx den(num + 2.0 * s * s, -std::sin(theta));
        if (std::abs(den) < 1e-14 * std::max(1.0, num)) throw DomainError("thermal influence denominator is singular");
        out *= num / den;
    }
    return out;
}

cplx influence_thermal_highT(double p, double delta, double t, double field_mode_count, double beta, double g0,
                             double Omega) {
    const Gamma12 g = gamma12(g0, Omega, t);
    const double u = (g.gamma1 * p + g.gamma2 * delta) / beta;
    const double m = field_mode_count;
    return {1.0 - 2.0 * m * (m + 1.0) * u * u, 2.0 * m * u};
}

cplx influence_single_thermal_mode(double p, double delta, double t, double omega, double beta, double g0,
                                   double Omega) {
    const Gamma12 g = gamma12(g0, Omega, t);
    const double u = g.gamma1 * p + g.gamma2 * delta;
    const double bw = beta * omega;
    const double em1 = std::expm1(bw);
    const double first = 2.0 * omega * u / em1;
    const double second = 2.0 * omega * omega * (2.0 + em1) / (em1 * em1) * u * u;
    return {1.0 - second, first};
}

cplx influence_coherent(double p, double delta, double t, cplx alpha, double omega, double g0, double Omega) {
    const Gamma12 g = gamma12(g0, Omega, t);
    const double theta = 2.0 * omega * (g.gamma1 * p + g.gamma2 * delta);
    const double s = std::sin(0.5 * theta);
    // 1 - e^{i theta} = 2 sin^2(theta/2) - i sin(theta)
    return std::exp(-std::norm(alpha) * cplx(2.0 * s * s, -std::sin(theta)));
}

cplx influence_from_distribution(double p, double delta, double t, const EnergyDistribution& dist, double g0,
                                 double Omega) {
    const Gamma12 g = gamma12(g0, Omega, t);
    const double u = g.gamma1 * p + g.gamma2 * delta;
    cplx acc{0.0, 0.0};
    for (const EnergyLevel& l : dist.entries) acc += l.p * std::polar(1.0, 2.0 * l.E * u);
    return acc;
}

InfluenceFunction make_unit_influence() {
    InfluenceFunction f;
    f.evaluate = [](double, double, double) { return cplx(1.0, 0.0); };
    f.model = InfluenceModel::Unit;
    return f;
}

InfluenceFunction make_thermal_exact(std::vector<double> field_freqs, double beta, double g0, double Omega) {
    InfluenceFunction f;
    f.model = InfluenceModel::ThermalExact;
    f.g0 = g0;
    f.Omega = Omega;
    double osc = 0.0;
    double max_w = 0.0;
    for (double w : field_freqs) {
        osc += 2.0 * w * (mode_occupation(beta * w) + 1.0);
        max_w = std::max(max_w, w);
    }
    f.oscillation_scale = osc;
    if (std::abs(g0) * max_w / Omega > 0.1) f.validity_flags.push_back("g0*omega/Omega>0.1");
    f.evaluate = [freqs = std::move(field_freqs), beta, g0, Omega](double p, double d, double t) {
        return influence_thermal_exact(p, d, t, freqs, beta, g0, Omega);
    };
    return f;
}

InfluenceFunction make_thermal_highT(double n_kmodes, int polarizations, double beta, double g0, double Omega,
                                     double max_omega) {
    InfluenceFunction f;
    f.model = InfluenceModel::ThermalHighT;
    f.g0 = g0;
    f.Omega = Omega;
    const double m = n_kmodes * polarizations;
    f.oscillation_scale = 2.0 * m * (1.0 / beta + 1.0);
    if (max_omega > 0.0 && beta * max_omega > 0.1) f.validity_flags.push_back("hbar*beta*omega>0.1");
    if (std::abs(g0) / (beta * Omega) > 0.01) f.validity_flags.push_back("g0*k_B*T/(hbar*Omega)>0.01");
    f.evaluate = [m, beta, g0, Omega](double p, double d, double t) {
        return influence_thermal_highT(p, d, t, m, beta, g0, Omega);
    };
    return f;
}

InfluenceFunction make_single_thermal_mode(double omega, double beta, double g0, double Omega) {
    InfluenceFunction f;
    f.model = InfluenceModel::ThermalSingleMode;
    f.g0 = g0;
    f.Omega = Omega;
    f.oscillation_scale = 2.0 * omega * (mode_occupation(beta * omega) + 1.0);
    if (std::abs(g0) * omega / Omega > 1e-2) f.validity_flags.push_back("g0*omega/Omega>0.01");
    f.evaluate = [omega, beta, g0, Omega](double p, double d, double t) {
        return influence_single_thermal_mode(p, d, t, omega, beta, g0, Omega);
    };
    return f;
}

InfluenceFunction make_coherent(cplx alpha, double omega, double g0, double Omega) {
    InfluenceFunction f;
    f.model = InfluenceModel::Coherent;
    f.g0 = g0;
    f.Omega = Omega;
    const double a = std::abs(alpha);
    f.oscillation_scale = 2.0 * omega * (a * a + 3.0 * a + 1.0);
    f.evaluate = [alpha, omega, g0, Omega](double p, double d, double t) {
        return influence_coherent(p, d, t, alpha, omega, g0, Omega);
    };
    return f;
}

InfluenceFunction make_distribution_influence(EnergyDistribution dist, double g0, double Omega) {
    InfluenceFunction f;
    f.model = InfluenceModel::Distribution;
    f.g0 = g0;
    f.Omega = Omega;
    f.oscillation_scale = 2.0 * std::max(dist.max_energy(), 1e-300);
    f.evaluate = [dist = std::move(dist), g0, Omega](double p, double d, double t) {
        return influence_from_distribution(p, d, t, dist, g0, Omega);
    };
    return f;
}

InfluenceFunction exact_influence(const EnvironmentSpec& env, double g0, double Omega, const PhysicalConstants& k) {
    validate(env);
    if (const auto* th = std::get_if<ThermalMultimode>(&env)) {
        return make_thermal_exact(field_mode_frequencies(env), beta_natural(th->T, k), g0, Omega);
    }
    if (const auto* th = std::get_if<ThermalSingleMode>(&env)) {
        return make_thermal_exact({th->omega}, beta_natural(th->T, k), g0, Omega);
    }
    if (const auto* coh = std::get_if<CoherentSingleMode>(&env)) {
        return make_coherent(coh->alpha, coh->omega, g0, Omega);
    }
    return make_distribution_influence(energy_distribution(env, 1e-3, k), g0, Omega);
}

cplx matrix_elements_general(const CharacteristicFunction& chi, const InfluenceFunction& F, double xi,
                             double xi_prime, double t, double Omega, double kappa, const MatrixElementOptions& opts) {
    if (chi.envelopes.empty() || !std::isfinite(chi.gaussian_decay_scale)) {
        throw DomainError("characteristic function needs a finite Gaussian decay scale");
    }
    const double delta = xi - xi_prime;
    const double xi_plus = xi + xi_prime;
    const cplx rot = std::polar(1.0, Omega * t);

    // Windows in p from each envelope along the line beta(p) = rot (-delta + i p).
    const cplx dir = rot * kI;
    const double bx = dir.real(), by = dir.imag();
    struct Peak {
        double center, width, log_height;
        int degree;
    };
    std::vector<Peak> peaks;
    double best = -std::numeric_limits<double>::infinity();
    for (const GaussianEnvelope& e : chi.envelopes) {
        const cplx a = rot * (-delta) - e.center;
        const double qb = quad_form(e, bx, by);
        const double bqa = bilinear(e, bx, by, a.real(), a.imag());
        const double pstar = -bqa / qb;
        const double qmin = std::max(0.0, quad_form(e, a.real(), a.imag()) - bqa * bqa / qb);
        peaks.push_back({pstar, 1.0 / std::sqrt(qb), -0.5 * qmin, e.poly_degree});
        best = std::max(best, -0.5 * qmin);
    }
    std::vector<Interval> windows;
    double min_width = std::numeric_limits<double>::infinity();
    double natural = 0.0;
    for (const Peak& pk : peaks) {
        natural += pk.width * std::sqrt(2.0 * std::numbers::pi);
        if (pk.log_height < best - 80.0) continue;
        const double k = 9.0 + 2.0 * std::sqrt(static_cast<double>(pk.degree) + 1.0);
        windows.push_back({pk.center - k * pk.width, pk.center + k * pk.width});
        min_width = std::min(min_width, pk.width);
    }

    const Gamma12 g = gamma12(F.g0, F.Omega, t);
    const double osc = std::abs(xi_plus) + std::abs(g.gamma1) * F.oscillation_scale;
    QuadratureOptions q;
    q.rel_tol = opts.rel_tol;
    q.abs_tol = 1e-16 * natural;
    q.max_intervals = opts.max_intervals;
    q.initial_panel = std::min(min_width, osc > 0.0 ? std::numbers::pi / osc : min_width);

    const auto integrand = [&](double p) {
        const cplx beta = rot * cplx(-delta, p);
        return chi(beta) * std::polar(1.0, -xi_plus * p) * F(p, delta, t);
    };

    // Grow the windows while the integrand is still visible at their edges.
    std::vector<Interval> domain = merge_intervals(windows);
    for (int pass = 0; pass < 40; ++pass) {
        double edge = 0.0;
        for (const Interval& iv : domain) edge = std::max({edge, std::abs(integrand(iv.lo)), std::abs(integrand(iv.hi))});
        if (edge <= 1e-12 * std::exp(best) || edge == 0.0) break;
        for (Interval& iv : domain) {
            const double half = 0.5 * (iv.hi - iv.lo), mid = 0.5 * (iv.hi + iv.lo);
            iv = {mid - 2.0 * half, mid + 2.0 * half};
        }
        domain = merge_intervals(domain);
    }

    const QuadratureResult res = integrate_gk15(integrand, domain, q);
    if (res.error > std::max(opts.fail_tol * res.l1, q.abs_tol)) {
        std::ostringstream os;
        os << "quadrature did not converge at xi=" << xi << ", xi'=" << xi_prime << ": error " << res.error
           << " vs |integrand| " << res.l1;
        throw QuadratureError(os.str(), res.error * std::sqrt(kappa) / std::numbers::pi);
    }
    return std::sqrt(kappa) / std::numbers::pi * res.value;
}

CMatrix matrix_elements_grid(const CharacteristicFunction& chi, const InfluenceFunction& F, const PositionGrid& grid,
                             double t, double Omega, const MatrixElementOptions& opts) {
    grid.validate();
    const auto n = static_cast<Eigen::Index>(grid.size());
    CMatrix out(n, n);
    parallel_for(grid.size(), [&](std::size_t i) {
        const auto row = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = row; j < n; ++j) {
            out(row, j) = matrix_elements_general(chi, F, grid.points[i], grid.points[static_cast<std::size_t>(j)], t,
                                                  Omega, grid.kappa, opts);
        }
    });
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) out(i, j) = std::conj(out(j, i));
    }
    return out;
}

}  // namespace gravidec
