#pragma once

// Batch scenario runner behind the etp-sim command line tool. A scenario is
// one JSON document; run_scenario turns it into a set of in-memory output
// files which write_outputs then stores.

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "etp/analytic.hpp"
#include "etp/core_state.hpp"
#include "etp/coupling.hpp"

namespace etp::scenario {

// Malformed or out-of-range configuration (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Kind { Coupling, EvolveVacuum, EvolveCoherent, PhaseSweep, Kd, Compton };
enum class Engine { Analytic, Oracle, Both };
enum class OracleOperator { Split, Combined };
enum class PrimeMode { Identity, Disentangled, Explicit };

struct CouplingSpec {
    double g1_abs = 0.0;
    double phi_g1 = 0.0;
    double g2_abs = 0.0;
    double phi_g2 = 0.0;                  // phase of the raw g_qu2
    std::optional<double> delta_phi;      // 2 phi_g1 + arg g_qu2', overrides phi_g2
    std::optional<cplx> g_p;              // default i |g_qu2|
    PrimeMode prime_mode = PrimeMode::Identity;
    cplx g2_prime{};                      // PrimeMode::Explicit
    std::optional<cplx> g_p_prime;        // PrimeMode::Explicit
};

struct TruncationSpec {
    std::optional<TruncationConfig> fixed;  // explicit window, never grown
    double leak_tol = 1e-10;
};

struct ModeSpec {
    std::filesystem::path csv;
    double omega = 0.0;
};

struct SweepSpec {
    double start = 0.0;
    double stop = 0.0;
    int steps = 1;
};

struct KdSpec {
    std::optional<double> eta;
    double electron_energy_ev = 0.0;
    double e0 = 0.0;
    double length = 0.0;
    double omega0 = 0.0;
    std::optional<int> half_width;
};

struct ScenarioConfig {
    Kind kind = Kind::EvolveVacuum;
    Engine engine = Engine::Both;
    OracleOperator oracle_operator = OracleOperator::Split;
    std::filesystem::path output_dir = "out";
    std::string echo;  // normalised copy of the input document

    CouplingSpec coupling;
    TruncationSpec truncation;
    SeriesControl series;
    cplx alpha{};  // evolve-coherent, optional for phase-sweep
    bool coherent_input = false;
    SweepSpec sweep;

    double electron_energy_ev = 0.0;  // coupling
    std::vector<ModeSpec> modes;      // coupling

    KdSpec kd;

    cplx alpha1{}, alpha2{}, g_p12{};  // compton
};

// Throws ConfigError. Relative CSV paths resolve against base_dir.
ScenarioConfig parse_config(const std::string& json_text,
                            const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

// Couplings and split-operator constants at a given relative phase (the
// spec's delta_phi when unset).
CouplingSet resolve_coupling(const CouplingSpec& spec, std::optional<double> delta_phi = {});
SplitPrimes resolve_primes(const CouplingSpec& spec, const CouplingSet& coupling);

struct ScenarioOutput {
    std::map<std::string, std::string> files;  // file name -> contents
    std::string meta_json;                     // run_meta.json contents
};

// Throws PhysicsError for physics-layer failures.
ScenarioOutput run_scenario(const ScenarioConfig& config, std::optional<Engine> engine = {});

// Writes every file plus run_meta.json, and SVG renderings when requested.
void write_outputs(const ScenarioOutput& out, const std::filesystem::path& dir, bool svg);

std::string engine_name(Engine e);
std::optional<Engine> parse_engine(const std::string& s);

}  // namespace etp::scenario
