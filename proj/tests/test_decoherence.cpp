#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gravidec/decoherence.hpp"
#include "gravidec/errors.hpp"
#include "gravidec/verification.hpp"
#include "support.hpp"

using namespace gravidec;
using testsupport::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

ExperimentSpec lab() {
    ExperimentSpec s;
    s.M = 10.0;
    s.Omega = 2.0 * kPi * 150.0;
    s.r = 0.25;
    s.environment = ThermalMultimode{1e20, {1.0}, 2};
    return s;
}

bool has_flag(const DecoherenceResult& r, const std::string& f) {
    return std::find(r.validity_flags.begin(), r.validity_flags.end(), f) != r.validity_flags.end();
}

}  // namespace

TEST_CASE("lab headline value") {
    const ExperimentSpec s = lab();
    const DecoherenceResult r = gamma_highT(s, coupling_g0(s), 1.0, 1e20);
    CHECK(r.lambda_coh == Approx(1.514675894228312e-4).epsilon(1e-12));
    CHECK(r.lambda_coh_alt == Approx(r.lambda_coh).epsilon(1e-12));
    CHECK(r.lambda_coh_without_half() == Approx(2.142075192217275e-4).epsilon(1e-12));
    CHECK(r.lambda_coh / 215e-6 > 1.0 / 1.5);
    CHECK(r.lambda_coh / 215e-6 < 1.5);
    CHECK(has_flag(r, "sqrt2_convention_ambiguity"));
    CHECK(r.regime == "thermal-highT");
    CHECK(r.multiplicity == 2.0);
    CHECK_FALSE(has_flag(r, "g0_override"));
}

TEST_CASE("both closed forms agree on random inputs") {
    testsupport::Gen gen(61);
    for (int i = 0; i < 10000; ++i) {
        ExperimentSpec s;
        s.M = gen.log_uniform(1e-3, 1e3);
        s.Omega = gen.log_uniform(1.0, 1e5);
        s.r = gen.log_uniform(1e-3, 10.0);
        s.environment = ThermalMultimode{300.0, {1e12}, 2};
        const CouplingParams c = coupling_g0(s);
        const DecoherenceResult h = gamma_highT(s, c, 3.0, gen.log_uniform(1.0, 1e25));
        REQUIRE(h.lambda_coh_alt == Approx(h.lambda_coh).epsilon(1e-10));
        const double omega = gen.log_uniform(1e3, 1e14);
        const double T = temperature_for(gen.log_uniform(1e-6, 300.0), omega);
        const DecoherenceResult m = gamma_single_thermal_mode(s, c, omega, T);
        REQUIRE(m.lambda_coh_alt == Approx(m.lambda_coh).epsilon(1e-10));
        const DecoherenceResult k = gamma_coherent(s, c, gen.complex_in_disk(5.0) + 0.01, gen.log_uniform(1e3, 1e15));
        REQUIRE(k.lambda_coh_alt == Approx(k.lambda_coh).epsilon(1e-10));
    }
}

TEST_CASE("high-T scaling") {
    testsupport::Gen gen(62);
    for (int i = 0; i < 100; ++i) {
        ExperimentSpec s = lab();
        s.M = gen.log_uniform(0.1, 100.0);
        s.r = gen.log_uniform(0.01, 1.0);
        const double T = gen.log_uniform(1e10, 1e20);
        const double N = gen.integer(1, 1000);
        const CouplingParams c = coupling_g0(s);
        const DecoherenceResult a = gamma_highT(s, c, N, T);
        CHECK(gamma_highT(s, c, N, 2.0 * T).lambda_coh == Approx(a.lambda_coh / 2.0).epsilon(1e-12));
        CHECK(gamma_highT(s, c, 2.0 * N, T).lambda_coh == Approx(a.lambda_coh).epsilon(1e-12));
        CHECK(gamma_highT(s, c, 2.0 * N, T).multiplicity == 2.0 * a.multiplicity);
        // lambda = (r / delta_phi) hbar Omega / k_B T with delta_phi ~ M / r, so r^2 / M
        ExperimentSpec s2 = s;
        s2.r *= 2.0;
        s2.M *= 3.0;
        CHECK(gamma_highT(s2, coupling_g0(s2), N, T).lambda_coh == Approx(a.lambda_coh * 4.0 / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("decoherence factor range and zeros") {
    const ExperimentSpec s = lab();
    const DecoherenceResult r = gamma_highT(s, coupling_g0(s), 5.0, 1e20);
    testsupport::Gen gen(63);
    const double period = 2.0 * kPi / s.Omega;
    for (int i = 0; i < 1000; ++i) {
        const double dx = gen.uniform(-1e-3, 1e-3), t = gen.uniform(0.0, 10.0 * period);
        const double g = r.gamma_abs2(dx, t);
        CHECK(g > 0.0);
        CHECK(g <= 1.0);
        CHECK(r.gamma_abs2(0.0, t) == 1.0);
        const int n = gen.integer(0, 40);
        CHECK(r.gamma_abs2(dx, n * kPi / s.Omega) == Approx(1.0).epsilon(1e-12));
    }
    CHECK(r.gamma_abs2(r.lambda_coh, 0.5 * kPi / s.Omega) == Approx(std::exp(-10.0)).epsilon(1e-12));
}

TEST_CASE("single mode reduces to the high-T form") {
    const ExperimentSpec s = lab();
    const CouplingParams c = coupling_g0(s);
    const PhysicalConstants& k = codata2018();
    const double omega = 1e6;
    for (double bw : {1e-6, 1e-4, 1e-3, 5e-3}) {
        const double T = k.hbar * omega / (k.k_B * bw);
        const double single = gamma_single_thermal_mode(s, c, omega, T).lambda_coh;
        const double hot = gamma_highT(s, c, 1.0, T, 1).lambda_coh;
        const double rel = std::abs(single / hot - 1.0);
        CHECK(rel < 10.0 * bw);
        if (bw == 1e-6) CHECK(rel < 1e-5);
    }
    // the alternative form carries sqrt(nbar/(1+nbar)), monotone in T
    double last = 0.0;
    for (double bw = 5.0; bw > 1e-3; bw /= 2.0) {
        const double nbar = 1.0 / std::expm1(bw);
        const double f = std::sqrt(nbar / (1.0 + nbar));
        CHECK(f > last);
        last = f;
    }
}

TEST_CASE("coherent regime") {
    ExperimentSpec s = lab();
    s.environment = CoherentSingleMode{{1.0, 0.0}, 1e6};
    const CouplingParams c = coupling_g0(s);
    const double a = gamma_coherent(s, c, {1.0, 0.5}, 1e6).lambda_coh;
    CHECK(gamma_coherent(s, c, {2.0, 1.0}, 1e6).lambda_coh == Approx(a / 2.0).epsilon(1e-12));
    CHECK(decoherence_for(s, c).regime == "coherent");
    CHECK_THROWS_AS(gamma_coherent(s, c, 0.0, 1e6), RegimeError);
    // 4 |alpha|^2 omega^2 gamma1^2 >= 1 breaks the expansion
    const CouplingParams strong = with_g0(c, 0.5);
    const std::vector<double> ts{kPi / s.Omega};
    try {
        gamma_coherent(s, strong, {1.0, 0.0}, s.Omega, ts);
        FAIL("expected RegimeError");
    } catch (const RegimeError& e) {
        CHECK(std::string(e.what()).find("sigma(t)<=0") != std::string::npos);
    }
    CHECK_THROWS_AS(gamma_single_thermal_mode(s, c, 1e15, 1e-3), RegimeError);
    s.environment = FockProduct{{1}, {1e6}};
    CHECK_THROWS_AS(decoherence_for(s, c), RegimeError);
}

TEST_CASE("overridden coupling is flagged") {
    const ExperimentSpec s = lab();
    const CouplingParams c = with_g0(coupling_g0(s), 1e-30);
    const DecoherenceResult r = gamma_highT(s, c, 1.0, 1e20);
    CHECK(has_flag(r, "g0_override"));
    CHECK(r.lambda_coh_alt == Approx(r.lambda_coh).epsilon(1e-10));
    CHECK_THROWS_AS(gamma_highT(s, with_g0(c, 0.0), 1.0, 1e20), DomainError);
}

TEST_CASE("extraction on synthetic samples") {
    const double lam = 1e-4, kappa = 4e8, Omega = 3.0;
    const double t = kPi / (2.0 * Omega);
    std::vector<CoherenceSample> samples;
    for (int i = 1; i <= 60; ++i) {
        const double dxi = 0.05 * i;
        const double dx = dxi / std::sqrt(kappa);
        for (double xp : default_xi_plus_window()) {
            const double r0 = std::exp(-xp * xp - dxi * dxi);
            samples.push_back({dxi, xp, r0 * std::exp(-dx * dx / (lam * lam)), r0});
        }
    }
    const ExtractionResult e = extract_lambda_coh(samples, t, Omega, kappa);
    CHECK(e.lambda_coh == Approx(lam).epsilon(1e-3));
    CHECK(e.points_used >= 8);
    CHECK_FALSE(e.residual_warning);

    ExtractionOptions o2;
    o2.multiplicity = 4.0;
    CHECK(extract_lambda_coh(samples, t, Omega, kappa, o2).lambda_coh == Approx(2.0 * lam).epsilon(1e-3));

    // g0 = 0: R == 1 everywhere
    std::vector<CoherenceSample> flat = samples;
    for (auto& s : flat) s.rho_abs2 = s.rho0_abs2;
    try {
        extract_lambda_coh(flat, t, Omega, kappa);
        FAIL("expected ExtractionError");
    } catch (const ExtractionError& e) {
        CHECK(std::string(e.what()) == "no decay to fit");
    }
    std::vector<CoherenceSample> few(samples.begin(), samples.begin() + 5 * 5);
    for (auto& s : few) s.rho_abs2 = s.rho0_abs2 * 0.5;
    CHECK_THROWS_AS(extract_lambda_coh(few, t, Omega, kappa), ExtractionError);
    CHECK_THROWS_AS(extract_lambda_coh(samples, 0.1 * t, Omega, kappa), DomainError);
}

TEST_CASE("samples from grid tables") {
    const PositionGrid grid = PositionGrid::uniform(-4.0, 4.0, 81);
    const std::size_t n = grid.size();
    RMatrix a(n, n), b(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = grid.points[i] - grid.points[j], p = grid.points[i] + grid.points[j];
            b(i, j) = std::exp(-p * p - 0.1 * d * d);
            a(i, j) = b(i, j) * std::exp(-0.5 * d * d);
        }
    }
    const std::vector<CoherenceSample> s = samples_from_grid(a, b, grid);
    REQUIRE_FALSE(s.empty());
    for (const CoherenceSample& c : s) {
        CHECK(c.delta_xi > 0.0);
        CHECK(std::abs(c.xi_plus) <= 0.2 + 1e-12);
        CHECK(c.rho_abs2 / c.rho0_abs2 == Approx(std::exp(-0.5 * c.delta_xi * c.delta_xi)).epsilon(1e-12));
        const double steps = c.delta_xi / grid.spacing();
        CHECK(std::abs(steps - std::round(steps)) < 1e-9);
    }
    // -log R = (dx / lambda)^2 at sin = 1 with dx = delta_xi (kappa = 1)
    const ExtractionResult e = extract_lambda_coh(s, kPi / 2.0, 1.0, 1.0);
    CHECK(e.lambda_coh == Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK_THROWS_AS(samples_from_grid(a.topRows(3), b, grid), DimensionError);
}

TEST_CASE("end-to-end extraction on the toy scenarios") {
    for (const ExtractionCase& c : default_extraction_cases(1e-3)) {
        const ExtractionCheck r = run_extraction_case(c);
        INFO(c.name, " analytic ", r.lambda_analytic, " extracted ", r.lambda_extracted);
        CHECK(r.rel_error < 0.05);
        CHECK(r.points_used >= 8);
    }
}
