#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "etp/analytic.hpp"
#include "etp/constants.hpp"
#include "etp/errors.hpp"
#include "etp/format.hpp"
#include "etp/observables.hpp"
#include "etp/ponderomotive.hpp"
#include "etp/scenario.hpp"
#include "test_common.hpp"

using namespace etp;
namespace sc = etp::scenario;
namespace fs = std::filesystem;

namespace {

using Rows = std::vector<std::vector<double>>;

Rows parse_csv(const std::string& text, std::vector<std::string>* header = nullptr) {
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    if (header) {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header->push_back(cell);
    }
    Rows rows;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

sc::ScenarioOutput run(const std::string& json, std::optional<sc::Engine> engine = {}) {
    return sc::run_scenario(sc::parse_config(json), engine);
}

bool config_error(const std::string& json) {
    try {
        (void)sc::parse_config(json);
    } catch (const sc::ConfigError&) {
        return true;
    }
    return false;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("etp_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ETP_SIM_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream os(p);
    os << body;
}

}  // namespace

TEST_CASE("config parsing rejects malformed documents") {
    CHECK(config_error("{"));
    CHECK(config_error(R"({"coupling": {}})"));
    CHECK(config_error(R"({"kind": "teleport"})"));
    CHECK(config_error(R"({"kind": "evolve-vacuum", "coupling": {"g_qu": 1}, "extra": 1})"));
    CHECK(config_error(R"({"kind": "evolve-vacuum", "coupling": {"g_qu": 6}})"));
    CHECK(config_error(R"({"kind": "evolve-vacuum", "coupling": {"g_qu": [3, 4.5]}})"));
    CHECK(config_error(R"({"kind": "evolve-vacuum", "coupling": {"gq": 1}})"));
    CHECK(config_error(R"({"kind": "evolve-vacuum", "coupling": {}, "truncation": {"n_max": 600, "k_min": -600, "k_max": 600}})"));
    CHECK(config_error(R"({"kind": "evolve-vacuum", "coupling": {}, "truncation": {"n_max": 10}})"));
    CHECK(config_error(R"({"kind": "evolve-vacuum", "coupling": {}, "engine": "magic"})"));
    CHECK(config_error(R"({"kind": "evolve-coherent", "coupling": {}})"));
    CHECK(config_error(R"({"kind": "phase-sweep", "coupling": {}, "sweep": {"start": 0, "stop": 1}})"));
    CHECK(config_error(R"({"kind": "kd", "kd": {"eta": -1}})"));
    CHECK(config_error(R"({"kind": "kd", "kd": {"electron_energy_ev": 2e5}})"));
    CHECK(config_error(R"({"kind": "compton", "compton": {"alpha1": 1, "alpha2": 1}})"));
    CHECK(config_error(R"({"kind": "coupling", "electron_energy_ev": 2e5, "modes": [{"csv": "/nonexistent/field.csv", "omega_rad_s": 1e15}]})"));
    CHECK(config_error(R"({"kind": "kd", "kd": {"eta": 1}, "coupling": {}})"));
    CHECK_FALSE(config_error(R"({"kind": "evolve-vacuum", "coupling": {"g_qu": {"abs": 0.5, "arg": 1}, "g_qu2": [0.1, 0.2]}})"));
}

TEST_CASE("evolve-vacuum without squeezing writes a Poisson spectrum") {
    for (const char* engine : {"analytic", "oracle", "both"}) {
        const auto out = run(R"({"kind": "evolve-vacuum", "coupling": {"g_qu": 2, "g_qu2": 0}})", sc::parse_engine(engine));
        std::vector<std::string> header;
        const Rows rows = parse_csv(out.files.at("spectrum.csv"), &header);
        CHECK(header == std::vector<std::string>{"k", "P"});
        double sum = 0.0;
        for (const auto& r : rows) {
            const int k = static_cast<int>(r[0]);
            const double expected = k <= 0 ? testing::poisson(4.0, -k) : 0.0;
            CHECK(std::abs(r[1] - expected) < 1e-9);
            sum += r[1];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("scenario output traces back to library calls") {
    const std::string json =
        R"({"kind": "evolve-vacuum", "engine": "analytic", "coupling": {"g_qu": 0.8, "g_qu2": 0.8, "delta_phi": 0, "g2_prime": "disentangled"}, "truncation": {"k_min": -48, "k_max": 48, "n_max": 40, "leak_tol": 1e-3}})";
    const sc::ScenarioConfig cfg = sc::parse_config(json);
    const auto out = sc::run_scenario(cfg);
    const CouplingSet c = sc::resolve_coupling(cfg.coupling);
    const SplitPrimes p = sc::resolve_primes(cfg.coupling, c);
    CHECK(relative_phase(c.g_qu, p.g_qu2_prime) == doctest::Approx(0.0).epsilon(1e-12));
    const JointState s = analytic_vacuum_state(c, p, *cfg.truncation.fixed);
    const Rows pnk = parse_csv(out.files.at("pnk.csv"));
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < s.size(); ++i) nonzero += std::norm(s.amplitudes()[i]) > 0.0;
    CHECK(pnk.size() == nonzero);
    for (const auto& r : pnk) CHECK(r[2] == std::norm(s.at(static_cast<int>(r[1]), static_cast<int>(r[0]))));
    const Rows ent = parse_csv(out.files.at("entropy.csv"));
    REQUIRE(ent.size() == 1);
    CHECK(ent[0][1] == von_neumann_entropy(reduced_density(s, Subsystem::Electron)));
    CHECK(out.meta_json.find("\"purity\"") != std::string::npos);
    CHECK(out.meta_json.find("\"version\"") != std::string::npos);
}

TEST_CASE("scenario output is deterministic") {
    const std::string json = R"({"kind": "phase-sweep", "coupling": {"g_qu": 1, "g_qu2": 0.3}, "sweep": {"start": 0, "stop": 3.14, "steps": 7}})";
    const auto a = run(json);
    const auto b = run(json);
    CHECK(a.files == b.files);
    CHECK(a.meta_json == b.meta_json);
}

TEST_CASE("phase sweep broadens the spectrum at a relative phase of pi") {
    const auto out = run(R"({"kind": "phase-sweep", "engine": "analytic", "coupling": {"g_qu": 2, "g_qu2": 0.2}, "sweep": {"start": -6.283185307179586, "stop": 6.283185307179586, "steps": 81}})");
    const Rows ent = parse_csv(out.files.at("entropy.csv"));
    CHECK(ent.size() == 81);
    const Rows spec = parse_csv(out.files.at("spectrum.csv"));
    auto variance_at = [&](double phi) {
        std::vector<double> p;
        int first = 0;
        for (const auto& r : spec) {
            if (std::abs(r[0] - phi) > 1e-9) continue;
            if (p.empty()) first = static_cast<int>(r[1]);
            p.push_back(r[2]);
        }
        return spectrum_moments(p, first).variance;
    };
    CHECK(variance_at(constants::pi) > variance_at(0.0));
    double lo = 1e9, hi = -1e9;
    for (const auto& r : ent) {
        lo = std::min(lo, r[1]);
        hi = std::max(hi, r[1]);
    }
    CHECK(hi - lo > 0.1);
}

TEST_CASE("kd scenario without a field has a single order") {
    const auto out = run(R"({"kind": "kd", "kd": {"electron_energy_ev": 2e5, "e0_v_per_m": 0, "length_m": 1e-4, "omega0_rad_s": 2.35e15}})");
    const Rows rows = parse_csv(out.files.at("kd.csv"));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == std::vector<double>{0.0, 0.0, 1.0});
}

TEST_CASE("kd scenario matches the library distribution") {
    const auto out = run(R"({"kind": "kd", "kd": {"eta": 2.5}})");
    const Rows rows = parse_csv(out.files.at("kd.csv"));
    const auto d = kd_momentum_distribution(2.5, kd_default_half_width(2.5));
    REQUIRE(rows.size() == d.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(rows[i][0] == d[i].order);
        CHECK(rows[i][1] == d[i].momentum_over_kp);
        CHECK(rows[i][2] == d[i].probability);
        sum += rows[i][2];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("compton scenario joint distribution is symmetric and normalised") {
    const auto out = run(R"({"kind": "compton", "compton": {"alpha1": 3, "alpha2": 3, "g_p12": 0.5}})");
    const Rows rows = parse_csv(out.files.at("joint_photon.csv"));
    std::map<std::pair<int, int>, double> p;
    double sum = 0.0;
    for (const auto& r : rows) {
        p[{static_cast<int>(r[0]), static_cast<int>(r[1])}] = r[2];
        sum += r[2];
    }
    for (const auto& [key, v] : p) CHECK(std::abs(v - p.at({key.second, key.first})) < 1e-9);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(out.meta_json.find("max_abs_diff_oracle_vs_analytic") != std::string::npos);
}

TEST_CASE("coupling scenario reads field profiles") {
    const fs::path dir = scratch_dir("coupling");
    const ElectronParams el = electron_kinematics(2e5);
    const double omega = 2.36e15, len = 5e-6, a = 3e7;
    FieldProfile p;
    p.omega = omega;
    for (int i = 0; i < 1001; ++i) {
        const double z = len * i / 1000.0;
        p.z.push_back(z);
        p.field.push_back({0.0, 0.0, a * std::polar(1.0, omega * z / el.velocity)});
    }
    {
        std::ofstream os(dir / "mode.csv");
        write_field_profile_csv(os, p);
    }
    write_file(dir / "scenario.json",
               R"({"kind": "coupling", "electron_energy_ev": 200000, "modes": [{"csv": "mode.csv", "omega_rad_s": 2.36e15}]})");
    const sc::ScenarioConfig cfg = sc::load_config(dir / "scenario.json");
    const auto out = sc::run_scenario(cfg);
    std::istringstream is(out.files.at("couplings.csv"));
    std::string line;
    std::getline(is, line);
    CHECK(line == "name,re,im,abs,arg");
    std::getline(is, line);
    const cplx g = first_order_coupling(p, el);
    CHECK(line == "g_qu_1," + format_double(g.real()) + "," + format_double(g.imag()) + "," +
                      format_double(std::abs(g)) + "," + format_double(std::arg(g)));
    CHECK(std::abs(g) == doctest::Approx(constants::elementary_charge * a * len / (constants::hbar * omega)).epsilon(1e-8));
}

TEST_CASE("automatic windows grow until the leakage fits") {
    const auto out = run(R"({"kind": "evolve-vacuum", "engine": "oracle", "coupling": {"g_qu": 0.8, "g_qu2": 0.8, "g2_prime": "disentangled"}})");
    CHECK(out.meta_json.find("\"window_growth_steps\": 0") == std::string::npos);
}

TEST_CASE("fixed windows that leak raise a physics error") {
    const sc::ScenarioConfig cfg = sc::parse_config(
        R"({"kind": "evolve-vacuum", "coupling": {"g_qu": 2}, "truncation": {"k_min": -12, "k_max": 12, "n_max": 6}})");
    try {
        (void)sc::run_scenario(cfg);
        FAIL("expected LeakageExceeded");
    } catch (const PhysicsError& e) {
        CHECK(e.kind() == ErrorKind::LeakageExceeded);
    }
}

TEST_CASE("command line exit codes") {
    const fs::path dir = scratch_dir("cli");
    write_file(dir / "ok.json", R"({"kind": "kd", "kd": {"eta": 1}, "output_dir": "out"})");
    write_file(dir / "bad.json", R"({"kind": "kd", "kd": {"eta": "one"}})");
    write_file(dir / "leak.json",
               R"({"kind": "evolve-vacuum", "coupling": {"g_qu": 2}, "truncation": {"k_min": -12, "k_max": 12, "n_max": 6}})");
    write_file(dir / "blocker", "not a directory");

    CHECK(run_cli("version") == 0);
    CHECK(run_cli("validate --config " + (dir / "ok.json").string()) == 0);
    CHECK(run_cli("validate --config " + (dir / "bad.json").string()) == 2);
    CHECK(run_cli("validate --config " + (dir / "missing.json").string()) == 2);
    CHECK(run_cli("run") == 2);
    CHECK(run_cli("run --config " + (dir / "ok.json").string() + " --engine magic") == 2);
    CHECK(run_cli("run --config " + (dir / "leak.json").string()) == 3);
    CHECK(run_cli("run --config " + (dir / "ok.json").string() + " --out " + (dir / "blocker" / "x").string()) == 4);
    CHECK(run_cli("run --config " + (dir / "ok.json").string() + " --svg") == 0);
    CHECK(fs::exists(dir / "out" / "kd.csv"));
    CHECK(fs::exists(dir / "out" / "kd.svg"));
    CHECK(fs::exists(dir / "out" / "run_meta.json"));
}
