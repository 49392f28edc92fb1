#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gravidec/commands.hpp"
#include "gravidec/errors.hpp"

#include "support.hpp"

using namespace gravidec;
using testsupport::Approx;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) {
    const char* dir = std::getenv("GRAVIDEC_FIXTURES");
    return (fs::path(dir ? dir : "fixtures") / name).string();
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("gravidec_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("coupling and lcoh on the lab scenario") {
    const Run c = run({"coupling", "--config", fixture("lab_highT.json")});
    REQUIRE(c.code == kExitOk);
    const json j = json::parse(c.out);
    CHECK(j["delta_phi_rad"].get<double>() == Approx(1.188185643058986e-25).epsilon(1e-12));
    CHECK(j["x_zpf_m"].get<double>() == Approx(7.479757516589952e-20).epsilon(1e-12));
    CHECK(j["g0"].get<double>() == Approx(3.554936197909888e-44).epsilon(1e-12));
    CHECK(j["schema_version"] == kSchemaVersion);
    CHECK(j["params_hash"].get<std::string>().size() == 16);

    const fs::path dir = scratch("lcoh");
    const Run l = run({"lcoh", "--config", fixture("lab_highT.json"), "--out", dir.string()});
    REQUIRE(l.code == kExitOk);
    const json k = json::parse(slurp(dir / "lcoh.json"));
    CHECK(k["lambda_coh_m"].get<double>() == Approx(1.514675894228312e-4).epsilon(1e-12));
    CHECK(k["exponent_multiplicity"].get<double>() == 20.0);
    CHECK(k["regime"] == "thermal-highT");
    bool flagged = false;
    for (const auto& f : k["validity_flags"]) flagged = flagged || f == "sqrt2_convention_ambiguity";
    CHECK(flagged);
}

TEST_CASE("exit codes") {
    CHECK(run({"lcoh", "--config", fixture("missing_mass.json")}).code == kExitConfig);
    CHECK(run({"coupling", "--config", fixture("zero_mass.json")}).code == kExitConfig);
    CHECK(run({"coupling", "--config", fixture("nope.json")}).code == kExitConfig);
    CHECK(run({"lcoh"}).code == kExitConfig);
    CHECK(run({"frobnicate"}).code == kExitConfig);
    const Run z = run({"lcoh", "--config", fixture("coherent_zero.json")});
    CHECK(z.code == kExitRegime);
    CHECK(z.err.find("|alpha|=0") != std::string::npos);
    CHECK(run({"verify", "--config", fixture("verify_small.json")}).code == kExitOk);
    const Run bad = run({"verify", "--config", fixture("verify_corrupt.json")});
    CHECK(bad.code == kExitVerifyFailed);
    CHECK_FALSE(json::parse(bad.out)["all_pass"].get<bool>());
}

TEST_CASE("the executable reports the same exit codes") {
    const char* bin = std::getenv("GRAVIDEC_BIN");
    if (!bin) return;
    auto status = [&](const std::string& args) {
        const std::string cmd = std::string(bin) + " " + args + " > /dev/null 2>&1";
        const int s = std::system(cmd.c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(status("coupling --config " + fixture("lab_highT.json")) == 0);
    CHECK(status("lcoh --config " + fixture("missing_mass.json")) == 2);
    CHECK(status("lcoh --config " + fixture("coherent_zero.json")) == 3);
    CHECK(status("verify --config " + fixture("verify_corrupt.json")) == 1);
}

TEST_CASE("gamma CSV") {
    const fs::path dir = scratch("gamma");
    REQUIRE(run({"gamma", "--config", fixture("lab_highT.json"), "--out", dir.string()}).code == kExitOk);
    const auto rows = read_csv(dir / "gamma.csv");
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == std::vector<std::string>{"delta_x_m", "t_s", "gamma_abs2"});
    CHECK(std::stod(rows[1][2]) == 1.0);
    for (std::size_t i = 2; i < rows.size(); ++i) {
        CHECK(std::stod(rows[i][2]) < std::stod(rows[i - 1][2]));
    }
    const Run r = run({"gamma", "--config", fixture("lab_highT.json"), "--t", "0.0", "--t", "0.001"});
    REQUIRE(r.code == kExitOk);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 11);
}

TEST_CASE("evolve writes the dump and the purity series") {
    const fs::path a = scratch("evolve_a"), b = scratch("evolve_b");
    REQUIRE(run({"evolve", "--config", fixture("toy_thermal.json"), "--out", a.string()}).code == kExitOk);
    REQUIRE(run({"evolve", "--config", fixture("toy_thermal.json"), "--out", b.string()}).code == kExitOk);
    CHECK(slurp(a / "rho.csv") == slurp(b / "rho.csv"));
    CHECK(slurp(a / "purity.csv") == slurp(b / "purity.csv"));

    const auto rho = read_csv(a / "rho.csv");
    CHECK(rho.size() == 1 + 13 * 13 * 4);
    CHECK(rho[0] == std::vector<std::string>{"x", "x_prime", "re", "im", "abs2", "t", "model", "params_hash"});
    const auto pur = read_csv(a / "purity.csv");
    REQUIRE(pur.size() == 5);
    CHECK(pur[0] == std::vector<std::string>{"t_s", "purity", "tail_mass", "guard_violated", "model", "params_hash"});
    CHECK(std::stod(pur[1][1]) == Approx(1.0).epsilon(1e-9));
    CHECK(std::stod(pur[3][1]) < 1.0 - 1e-9);

    // without coupling the purity stays put
    const fs::path c = scratch("evolve_free");
    REQUIRE(run({"evolve", "--config", fixture("toy_free.json"), "--out", c.string()}).code == kExitOk);
    const auto free = read_csv(c / "purity.csv");
    for (std::size_t i = 1; i < free.size(); ++i) CHECK(std::stod(free[i][1]) == Approx(1.0).epsilon(1e-10));

    // quadrature route
    const fs::path q = scratch("evolve_quad");
    REQUIRE(run({"evolve", "--config", fixture("toy_coherent.json"), "--out", q.string()}).code == kExitOk);
    CHECK(read_csv(q / "rho.csv").size() == 1 + 13 * 13 * 2);

    CHECK(run({"evolve", "--config", fixture("toy_thermal.json")}).code == kExitConfig);
}

TEST_CASE("sweeps") {
    const fs::path d = scratch("sweep");
    REQUIRE(run({"sweep", "--config", fixture("lab_highT.json"), "--sweep", fixture("sweep_T.json"), "--out",
                 d.string()})
                .code == kExitOk);
    auto rows = read_csv(d / "sweep.csv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"environment.T_K", "lambda_coh_m", "gamma_abs2", "params_hash"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        // lambda * T is constant
        CHECK(std::stod(rows[i][1]) * std::stod(rows[i][0]) ==
              Approx(std::stod(rows[1][1]) * std::stod(rows[1][0])).epsilon(1e-12));
        if (i > 1) CHECK(std::stod(rows[i][0]) > std::stod(rows[i - 1][0]));
    }
    CHECK(rows[1][3] != rows[2][3]);

    const Run n = run({"sweep", "--config", fixture("lab_highT.json"), "--sweep", fixture("sweep_N.json")});
    REQUIRE(n.code == kExitOk);
    std::stringstream ns(n.out);
    std::string line;
    std::getline(ns, line);
    std::vector<double> lam, gam;
    while (std::getline(ns, line)) {
        std::stringstream ls(line);
        std::string c0, c1, c2;
        std::getline(ls, c0, ',');
        std::getline(ls, c1, ',');
        std::getline(ls, c2, ',');
        lam.push_back(std::stod(c1));
        gam.push_back(std::stod(c2));
    }
    REQUIRE(lam.size() == 3);
    CHECK(lam[1] == Approx(lam[0]).epsilon(1e-14));
    CHECK(lam[2] == Approx(lam[0]).epsilon(1e-14));
    // exponent proportional to N: N = 1, 2, 8
    CHECK(std::log(gam[1]) == Approx(2.0 * std::log(gam[0])).epsilon(1e-10));
    CHECK(std::log(gam[2]) == Approx(8.0 * std::log(gam[0])).epsilon(1e-10));

    const Run t = run({"sweep", "--config", fixture("lab_highT.json"), "--sweep", fixture("sweep_t.json")});
    REQUIRE(t.code == kExitOk);
    std::stringstream ts(t.out);
    std::getline(ts, line);
    std::vector<double> g;
    while (std::getline(ts, line)) g.push_back(std::stod(line.substr(line.find(',') + 1)));
    REQUIRE(g.size() == 3);
    CHECK(g[0] < 1.0);
    CHECK(g[1] == Approx(g[0]).epsilon(1e-9));
    CHECK(g[2] == Approx(g[0]).epsilon(1e-9));

    CHECK(run({"sweep", "--config", fixture("lab_highT.json")}).code == kExitConfig);
}
