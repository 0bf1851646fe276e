#include "etp/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "etp/constants.hpp"
#include "etp/errors.hpp"
#include "etp/format.hpp"
#include "etp/observables.hpp"
#include "etp/oracle.hpp"
#include "etp/ponderomotive.hpp"
#include "etp/svg.hpp"

#ifndef ETP_VERSION
#define ETP_VERSION "dev"
#endif

namespace etp::scenario {

using json = nlohmann::ordered_json;

namespace {

constexpr double kMaxCoupling = 5.0;
constexpr int kMaxPhotons = 512;
// About 320 MB of complex amplitudes; two-mode windows hit this long before n_max = 512.
constexpr std::size_t kMaxAmplitudes = 20'000'000;

// ---- parsing helpers ------------------------------------------------------

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(where, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!ok.count(key)) fail(where, "unknown key '" + key + "'");
    }
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(where, "must be finite");
    return d;
}

int integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<int>();
}

// A real number, [re, im], {"re", "im"} or {"abs", "arg"}.
cplx complex_value(const json& v, const std::string& where) {
    if (v.is_number()) return number(v, where);
    if (v.is_array()) {
        if (v.size() != 2) fail(where, "expected [re, im]");
        return {number(v[0], where + "[0]"), number(v[1], where + "[1]")};
    }
    if (v.is_object()) {
        if (v.contains("abs")) {
            check_keys(v, where, {"abs", "arg"});
            const double a = number(v.at("abs"), where + ".abs");
            if (a < 0.0) fail(where, "abs must be >= 0");
            return std::polar(a, v.contains("arg") ? number(v.at("arg"), where + ".arg") : 0.0);
        }
        check_keys(v, where, {"re", "im"});
        return {v.contains("re") ? number(v.at("re"), where + ".re") : 0.0,
                v.contains("im") ? number(v.at("im"), where + ".im") : 0.0};
    }
    fail(where, "expected a number, [re, im] or an object");
}

std::string text(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
}

void limit_coupling(cplx g, const std::string& where) {
    if (std::abs(g) > kMaxCoupling) fail(where, "|g| must be <= 5");
}

Kind parse_kind(const std::string& s) {
    if (s == "coupling") return Kind::Coupling;
    if (s == "evolve-vacuum") return Kind::EvolveVacuum;
    if (s == "evolve-coherent") return Kind::EvolveCoherent;
    if (s == "phase-sweep") return Kind::PhaseSweep;
    if (s == "kd") return Kind::Kd;
    if (s == "compton") return Kind::Compton;
    fail("kind", "unknown scenario kind '" + s + "'");
}

std::string kind_name(Kind k) {
    switch (k) {
        case Kind::Coupling: return "coupling";
        case Kind::EvolveVacuum: return "evolve-vacuum";
        case Kind::EvolveCoherent: return "evolve-coherent";
        case Kind::PhaseSweep: return "phase-sweep";
        case Kind::Kd: return "kd";
        case Kind::Compton: return "compton";
    }
    return "?";
}

CouplingSpec parse_coupling(const json& j) {
    const std::string w = "coupling";
    check_keys(j, w, {"g_qu", "g_qu2", "delta_phi", "g_p", "g2_prime", "g_p_prime"});
    CouplingSpec s;
    const cplx g1 = j.contains("g_qu") ? complex_value(j.at("g_qu"), w + ".g_qu") : cplx{};
    const cplx g2 = j.contains("g_qu2") ? complex_value(j.at("g_qu2"), w + ".g_qu2") : cplx{};
    limit_coupling(g1, w + ".g_qu");
    limit_coupling(g2, w + ".g_qu2");
    s.g1_abs = std::abs(g1);
    s.phi_g1 = g1 == cplx{} ? 0.0 : std::arg(g1);
    s.g2_abs = std::abs(g2);
    s.phi_g2 = g2 == cplx{} ? 0.0 : std::arg(g2);
    if (j.contains("delta_phi")) s.delta_phi = number(j.at("delta_phi"), w + ".delta_phi");
    if (j.contains("g_p")) {
        s.g_p = complex_value(j.at("g_p"), w + ".g_p");
        limit_coupling(*s.g_p, w + ".g_p");
    }
    if (j.contains("g2_prime")) {
        const json& p = j.at("g2_prime");
        if (p.is_string()) {
            const std::string m = p.get<std::string>();
            if (m == "identity") {
                s.prime_mode = PrimeMode::Identity;
            } else if (m == "disentangled") {
                s.prime_mode = PrimeMode::Disentangled;
            } else {
                fail(w + ".g2_prime", "expected 'identity', 'disentangled' or a value");
            }
        } else {
            s.prime_mode = PrimeMode::Explicit;
            s.g2_prime = complex_value(p, w + ".g2_prime");
            limit_coupling(s.g2_prime, w + ".g2_prime");
        }
    }
    if (j.contains("g_p_prime")) {
        if (s.prime_mode != PrimeMode::Explicit) {
            fail(w + ".g_p_prime", "only allowed with an explicit g2_prime value");
        }
        s.g_p_prime = complex_value(j.at("g_p_prime"), w + ".g_p_prime");
    }
    return s;
}

TruncationSpec parse_truncation(const json& j) {
    const std::string w = "truncation";
    check_keys(j, w, {"k_min", "k_max", "n_max", "leak_tol"});
    TruncationSpec s;
    if (j.contains("leak_tol")) s.leak_tol = number(j.at("leak_tol"), w + ".leak_tol");
    if (!(s.leak_tol > 0.0 && s.leak_tol < 1.0)) fail(w + ".leak_tol", "must lie in (0, 1)");
    const int given = static_cast<int>(j.contains("k_min")) + static_cast<int>(j.contains("k_max")) +
                      static_cast<int>(j.contains("n_max"));
    if (given == 0) return s;
    if (given != 3) fail(w, "k_min, k_max and n_max must be given together");
    TruncationConfig t;
    t.k_min = integer(j.at("k_min"), w + ".k_min");
    t.k_max = integer(j.at("k_max"), w + ".k_max");
    t.n_max = integer(j.at("n_max"), w + ".n_max");
    t.leak_tol = s.leak_tol;
    if (t.n_max < 0 || t.n_max > kMaxPhotons) fail(w + ".n_max", "must lie in [0, 512]");
    if (t.k_min > 0 || t.k_max < 0) fail(w, "k window must contain 0");
    if (t.k_max - t.k_min > 8 * kMaxPhotons) fail(w, "k window too large");
    s.fixed = t;
    return s;
}

SeriesControl parse_series(const json& j) {
    check_keys(j, "series", {"term_tol", "max_index"});
    SeriesControl c;
    if (j.contains("term_tol")) c.term_tol = number(j.at("term_tol"), "series.term_tol");
    if (j.contains("max_index")) c.max_index = integer(j.at("max_index"), "series.max_index");
    if (!(c.term_tol > 0.0)) fail("series.term_tol", "must be > 0");
    if (c.max_index < 10 || c.max_index > 2000) fail("series.max_index", "must lie in [10, 2000]");
    return c;
}

void check_alpha(cplx a, const std::string& where) {
    // auto window n_max = |a|^2 + 6|a| + 10 must stay within the photon cap
    const double r = std::abs(a);
    if (r * r + 6.0 * r + 10.0 > kMaxPhotons) fail(where, "|alpha| too large for n_max <= 512");
}

// ---- physics plumbing ------------------------------------------------------

struct RunResult {
    JointState state;
    TruncationConfig trunc;
    double leakage = 0.0;
    SeriesStats stats;
    std::optional<double> max_abs_diff;
    int growth_steps = 0;
};

double max_probability_gap(const JointState& a, const JointState& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(std::norm(a.amplitudes()[i]) - std::norm(b.amplitudes()[i])));
    }
    return worst;
}

TruncationConfig grown(const TruncationConfig& t) {
    TruncationConfig g = t;
    g.n_max = std::min(kMaxPhotons, static_cast<int>(std::ceil(t.n_max * 1.5)));
    const int extra = g.n_max - t.n_max;
    g.k_min = t.k_min - extra;
    g.k_max = t.k_max + extra;
    return g;
}

// Runs attempt(trunc) and widens an automatic window until the leakage fits.
template <class Attempt>
RunResult with_window_growth(const TruncationSpec& spec, TruncationConfig start, int modes,
                             Attempt&& attempt) {
    TruncationConfig t = spec.fixed ? *spec.fixed : start;
    if (t.dimension(modes) > kMaxAmplitudes) {
        throw ConfigError("truncation: window holds " + std::to_string(t.dimension(modes)) +
                          " amplitudes, above the limit of " + std::to_string(kMaxAmplitudes));
    }
    int steps = 0;
    for (;;) {
        try {
            RunResult r = attempt(t);
            r.growth_steps = steps;
            return r;
        } catch (const PhysicsError& e) {
            const bool retry = e.kind() == ErrorKind::LeakageExceeded && !spec.fixed &&
                               t.n_max < kMaxPhotons && grown(t).dimension(modes) <= kMaxAmplitudes;
            if (!retry) throw;
        }
        t = grown(t);
        ++steps;
    }
}

void require_leakage(double leak, const TruncationConfig& t) {
    if (leak > t.leak_tol) {
        throw PhysicsError(ErrorKind::LeakageExceeded,
                           "boundary probability " + format_double(leak) + " exceeds leak_tol " +
                               format_double(t.leak_tol));
    }
}

RunResult run_single_mode(const ScenarioConfig& cfg, Engine engine, const CouplingSet& c,
                          const SplitPrimes& primes) {
    const double alpha_abs = cfg.coherent_input ? std::abs(cfg.alpha) : 0.0;
    return with_window_growth(
        cfg.truncation, auto_truncation(alpha_abs, cfg.truncation.leak_tol), 1,
        [&](const TruncationConfig& t) {
            const JointState in =
                cfg.coherent_input ? coherent_joint_state(t, cfg.alpha) : vacuum_joint_state(t);
            std::optional<JointState> oracle;
            double leak = 0.0;
            if (engine != Engine::Analytic) {
                Evolution ev = cfg.oracle_operator == OracleOperator::Split
                                   ? evolve_split(c.g_qu, primes, in)
                                   : evolve(build_single_mode_generator(c, t), in);
                leak = ev.leakage;
                oracle = std::move(ev.state);
            }
            RunResult r{oracle ? *oracle : in, t, leak, {}, {}, 0};
            if (engine != Engine::Oracle) {
                JointState a = cfg.coherent_input
                                   ? analytic_coherent_state(c, primes, cfg.alpha, t, cfg.series, &r.stats)
                                   : analytic_vacuum_state(c, primes, t, cfg.series, &r.stats);
                const double leak_a = boundary_leakage(a);
                require_leakage(leak_a, t);
                if (oracle) {
                    r.max_abs_diff = max_probability_gap(*oracle, a);
                } else {
                    r.state = std::move(a);
                    r.leakage = leak_a;
                }
            }
            return r;
        });
}

RunResult run_compton(const ScenarioConfig& cfg, Engine engine) {
    TruncationConfig start = auto_truncation(std::max(std::abs(cfg.alpha1), std::abs(cfg.alpha2)),
                                             cfg.truncation.leak_tol);
    start.k_min = -start.n_max;
    start.k_max = start.n_max;
    return with_window_growth(cfg.truncation, start, 2, [&](const TruncationConfig& t) {
        RunResult r{JointState(t, 2), t, 0.0, {}, {}, 0};
        std::optional<JointState> oracle;
        if (engine != Engine::Analytic) {
            Evolution ev = evolve(build_two_mode_generator(cfg.g_p12, t),
                                  coherent_joint_state(t, cfg.alpha1, cfg.alpha2));
            r.leakage = ev.leakage;
            oracle = std::move(ev.state);
        }
        if (engine != Engine::Oracle) {
            JointState a = compton_coefficients(cfg.alpha1, cfg.alpha2, cfg.g_p12, t, cfg.series);
            const double leak_a = boundary_leakage(a);
            require_leakage(leak_a, t);
            if (oracle) {
                r.max_abs_diff = max_probability_gap(*oracle, a);
            } else {
                r.state = std::move(a);
                r.leakage = leak_a;
            }
        }
        if (oracle) r.state = std::move(*oracle);
        return r;
    });
}

// ---- output helpers ----------------------------------------------------------

std::string f(double v) { return format_double(v); }

json truncation_json(const TruncationConfig& t) {
    return {{"k_min", t.k_min}, {"k_max", t.k_max}, {"n_max", t.n_max}, {"leak_tol", t.leak_tol}};
}

void coupling_row(std::ostringstream& os, const std::string& name, cplx v) {
    os << name << ',' << f(v.real()) << ',' << f(v.imag()) << ',' << f(std::abs(v)) << ','
       << f(v == cplx{} ? 0.0 : std::arg(v)) << '\n';
}

std::string couplings_csv(const CouplingSet& c, const SplitPrimes& p) {
    std::ostringstream os;
    os << "name,re,im,abs,arg\n";
    coupling_row(os, "g_qu", c.g_qu);
    coupling_row(os, "g_qu2", c.g_qu2);
    coupling_row(os, "g_p", c.g_p);
    coupling_row(os, "g_qu2_prime", p.g_qu2_prime);
    coupling_row(os, "g_p_prime", p.g_p_prime);
    return os.str();
}

std::string pnk_csv(const JointState& s) {
    std::ostringstream os;
    os << "n,k,P\n";
    const auto& t = s.truncation();
    for (int n = 0; n <= t.n_max; ++n) {
        for (int k = t.k_min; k <= t.k_max; ++k) {
            const double p = std::norm(s.at(k, n));
            if (p > 0.0) os << n << ',' << k << ',' << f(p) << '\n';
        }
    }
    return os.str();
}

std::string spectrum_csv(const std::vector<double>& pk, int k_min) {
    std::ostringstream os;
    os << "k,P\n";
    for (std::size_t i = 0; i < pk.size(); ++i) os << k_min + static_cast<int>(i) << ',' << f(pk[i]) << '\n';
    return os.str();
}

json run_json(const RunResult& r) {
    json j;
    j["truncation"] = truncation_json(r.trunc);
    j["window_growth_steps"] = r.growth_steps;
    j["leakage"] = r.leakage;
    j["norm_squared"] = r.state.norm_squared();
    j["input_deficit"] = r.state.deficit();
    j["series"] = {{"max_shell", r.stats.max_shell}, {"terms", r.stats.terms}};
    if (r.max_abs_diff) j["max_abs_diff_oracle_vs_analytic"] = *r.max_abs_diff;
    return j;
}

json base_meta(const ScenarioConfig& cfg, Engine engine) {
    json m;
    m["version"] = ETP_VERSION;
    m["kind"] = kind_name(cfg.kind);
    m["engine"] = engine_name(engine);
    m["oracle_operator"] = cfg.oracle_operator == OracleOperator::Split ? "split" : "combined";
    m["config"] = json::parse(cfg.echo);
    return m;
}

// Evaluates fn(i) for i in [0, count) on worker threads; results keep index order.
template <class T>
std::vector<T> parallel_map(std::size_t count, const std::function<T(std::size_t)>& fn) {
    std::vector<std::optional<T>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads =
        std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    std::vector<T> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

ScenarioOutput run_evolve(const ScenarioConfig& cfg, Engine engine) {
    const CouplingSet c = resolve_coupling(cfg.coupling);
    const SplitPrimes p = resolve_primes(cfg.coupling, c);
    const RunResult r = run_single_mode(cfg, engine, c, p);
    const DensityMatrix rho = reduced_density(r.state, Subsystem::Electron);
    const double s = von_neumann_entropy(rho);
    const double dphi = relative_phase(c.g_qu, p.g_qu2_prime);

    ScenarioOutput out;
    out.files["pnk.csv"] = pnk_csv(r.state);
    out.files["spectrum.csv"] = spectrum_csv(electron_spectrum(r.state), r.trunc.k_min);
    out.files["entropy.csv"] = "delta_phi,S\n" + f(dphi) + ',' + f(s) + '\n';
    out.files["couplings.csv"] = couplings_csv(c, p);

    json m = base_meta(cfg, engine);
    m["run"] = run_json(r);
    m["delta_phi"] = dphi;
    m["purity"] = purity(rho);
    m["entropy"] = s;
    out.meta_json = m.dump(2) + "\n";
    return out;
}

ScenarioOutput run_sweep(const ScenarioConfig& cfg, Engine engine) {
    const int steps = cfg.sweep.steps;
    std::vector<double> phases(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        phases[i] = steps == 1 ? cfg.sweep.start
                               : cfg.sweep.start + (cfg.sweep.stop - cfg.sweep.start) * i / (steps - 1);
    }
    struct Point {
        RunResult run;
        double entropy;
        double purity;
    };
    const auto points = parallel_map<Point>(phases.size(), [&](std::size_t i) {
        const CouplingSet c = resolve_coupling(cfg.coupling, phases[i]);
        const SplitPrimes p = resolve_primes(cfg.coupling, c);
        RunResult r = run_single_mode(cfg, engine, c, p);
        const DensityMatrix rho = reduced_density(r.state, Subsystem::Electron);
        return Point{std::move(r), von_neumann_entropy(rho), purity(rho)};
    });

    std::ostringstream ent, spec;
    ent << "delta_phi,S\n";
    spec << "delta_phi,k,P\n";
    json runs = json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& pt = points[i];
        ent << f(phases[i]) << ',' << f(pt.entropy) << '\n';
        const auto pk = electron_spectrum(pt.run.state);
        for (std::size_t j = 0; j < pk.size(); ++j) {
            spec << f(phases[i]) << ',' << pt.run.trunc.k_min + static_cast<int>(j) << ',' << f(pk[j])
                 << '\n';
        }
        json rj = run_json(pt.run);
        rj["delta_phi"] = phases[i];
        rj["purity"] = pt.purity;
        rj["entropy"] = pt.entropy;
        const auto mom = spectrum_moments(pk, pt.run.trunc.k_min);
        rj["spectrum_mean"] = mom.mean;
        rj["spectrum_variance"] = mom.variance;
        runs.push_back(std::move(rj));
    }
    ScenarioOutput out;
    out.files["entropy.csv"] = ent.str();
    out.files["spectrum.csv"] = spec.str();
    const CouplingSet c0 = resolve_coupling(cfg.coupling, phases.front());
    out.files["couplings.csv"] = couplings_csv(c0, resolve_primes(cfg.coupling, c0));
    json m = base_meta(cfg, engine);
    m["points"] = std::move(runs);
    out.meta_json = m.dump(2) + "\n";
    return out;
}

ScenarioOutput run_kd(const ScenarioConfig& cfg, Engine engine) {
    const KdSpec& k = cfg.kd;
    json m = base_meta(cfg, engine);
    double eta = 0.0;
    if (k.eta) {
        eta = *k.eta;
    } else {
        StandingWaveParams p{k.e0, k.length, k.omega0, electron_kinematics(k.electron_energy_ev)};
        eta = kd_eta(p);
        m["k_p_per_m"] = kd_photon_wavenumber(k.omega0);
        m["electron"] = {{"gamma", p.electron.gamma}, {"velocity_m_per_s", p.electron.velocity}};
    }
    const int half = k.half_width ? *k.half_width : kd_default_half_width(eta);
    const auto dist = kd_momentum_distribution(eta, half);
    std::ostringstream os;
    os << "n,momentum_over_kp,P\n";
    long double total = 0.0L;
    for (const auto& d : dist) {
        os << d.order << ',' << d.momentum_over_kp << ',' << f(d.probability) << '\n';
        total += d.probability;
    }
    ScenarioOutput out;
    out.files["kd.csv"] = os.str();
    m["eta"] = eta;
    m["half_width"] = half;
    m["total_probability"] = static_cast<double>(total);
    out.meta_json = m.dump(2) + "\n";
    return out;
}

ScenarioOutput run_compton_scenario(const ScenarioConfig& cfg, Engine engine) {
    const RunResult r = run_compton(cfg, engine);
    const JointPhotonTable table = photon_joint_distribution(r.state);
    std::ostringstream os;
    os << "n1,n2,P\n";
    for (int a = 0; a <= table.n_max(); ++a) {
        for (int b = 0; b <= table.n_max(); ++b) os << a << ',' << b << ',' << f(table.at(a, b)) << '\n';
    }
    ScenarioOutput out;
    out.files["joint_photon.csv"] = os.str();
    out.files["spectrum.csv"] = spectrum_csv(electron_spectrum(r.state), r.trunc.k_min);
    std::ostringstream cs;
    cs << "name,re,im,abs,arg\n";
    coupling_row(cs, "g_p12", cfg.g_p12);
    out.files["couplings.csv"] = cs.str();
    json m = base_meta(cfg, engine);
    m["run"] = run_json(r);
    m["photon_correlation"] = table.correlation();
    m["entropy"] = entanglement_entropy(r.state);
    out.meta_json = m.dump(2) + "\n";
    return out;
}

ScenarioOutput run_coupling(const ScenarioConfig& cfg, Engine engine) {
    const ElectronParams el = electron_kinematics(cfg.electron_energy_ev);
    std::vector<FieldProfile> profiles;
    for (const auto& mode : cfg.modes) profiles.push_back(read_field_profile_csv(mode.csv, mode.omega));
    std::ostringstream os;
    os << "name,re,im,abs,arg\n";
    json errors;
    auto record = [&](const std::string& name, const QuadratureResult& q) {
        coupling_row(os, name, q.value);
        errors[name] = q.error_estimate;
    };
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        record("g_qu_" + std::to_string(i + 1), first_order_coupling_detailed(profiles[i], el));
    }
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        for (std::size_t j = i; j < profiles.size(); ++j) {
            const std::string ij = std::to_string(i + 1) + std::to_string(j + 1);
            record("g_qu2_" + ij, second_order_coupling_detailed(profiles[i], profiles[j], el));
            record("g_p_" + ij, ponderomotive_coupling_detailed(profiles[i], profiles[j], el));
        }
    }
    ScenarioOutput out;
    out.files["couplings.csv"] = os.str();
    json m = base_meta(cfg, engine);
    m["electron"] = {{"kinetic_energy_ev", el.kinetic_energy_ev},
                     {"gamma", el.gamma},
                     {"velocity_m_per_s", el.velocity}};
    m["quadrature_error_estimates"] = std::move(errors);
    out.meta_json = m.dump(2) + "\n";
    return out;
}

}  // namespace

std::string engine_name(Engine e) {
    switch (e) {
        case Engine::Analytic: return "analytic";
        case Engine::Oracle: return "oracle";
        case Engine::Both: return "both";
    }
    return "?";
}

std::optional<Engine> parse_engine(const std::string& s) {
    if (s == "analytic") return Engine::Analytic;
    if (s == "oracle") return Engine::Oracle;
    if (s == "both") return Engine::Both;
    return std::nullopt;
}

ScenarioConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    check_keys(j, "config",
               {"kind", "engine", "oracle_operator", "output_dir", "coupling", "truncation", "series",
                "alpha", "sweep", "electron_energy_ev", "modes", "kd", "compton"});
    ScenarioConfig cfg;
    cfg.echo = j.dump();
    if (!j.contains("kind")) fail("config", "missing 'kind'");
    cfg.kind = parse_kind(text(j.at("kind"), "kind"));
    if (j.contains("engine")) {
        const auto e = parse_engine(text(j.at("engine"), "engine"));
        if (!e) fail("engine", "expected analytic, oracle or both");
        cfg.engine = *e;
    }
    if (j.contains("oracle_operator")) {
        const std::string op = text(j.at("oracle_operator"), "oracle_operator");
        if (op == "split") {
            cfg.oracle_operator = OracleOperator::Split;
        } else if (op == "combined") {
            cfg.oracle_operator = OracleOperator::Combined;
        } else {
            fail("oracle_operator", "expected split or combined");
        }
    }
    if (j.contains("output_dir")) cfg.output_dir = text(j.at("output_dir"), "output_dir");
    if (j.contains("truncation")) cfg.truncation = parse_truncation(j.at("truncation"));
    if (j.contains("series")) cfg.series = parse_series(j.at("series"));

    auto require = [&](const char* key) {
        if (!j.contains(key)) fail("config", std::string("kind '") + kind_name(cfg.kind) + "' needs '" + key + "'");
    };
    auto forbid_except = [&](std::initializer_list<const char*> allowed) {
        const std::set<std::string> common{"kind", "engine", "oracle_operator", "output_dir", "truncation", "series"};
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [key, value] : j.items()) {
            if (!common.count(key) && !ok.count(key)) {
                fail(key, "not used by kind '" + kind_name(cfg.kind) + "'");
            }
        }
    };

    switch (cfg.kind) {
        case Kind::EvolveVacuum:
            forbid_except({"coupling"});
            require("coupling");
            cfg.coupling = parse_coupling(j.at("coupling"));
            break;
        case Kind::EvolveCoherent:
            forbid_except({"coupling", "alpha"});
            require("coupling");
            require("alpha");
            cfg.coupling = parse_coupling(j.at("coupling"));
            cfg.alpha = complex_value(j.at("alpha"), "alpha");
            check_alpha(cfg.alpha, "alpha");
            cfg.coherent_input = true;
            break;
        case Kind::PhaseSweep: {
            forbid_except({"coupling", "alpha", "sweep"});
            require("coupling");
            require("sweep");
            cfg.coupling = parse_coupling(j.at("coupling"));
            if (j.contains("alpha")) {
                cfg.alpha = complex_value(j.at("alpha"), "alpha");
                check_alpha(cfg.alpha, "alpha");
                cfg.coherent_input = true;
            }
            const json& s = j.at("sweep");
            check_keys(s, "sweep", {"start", "stop", "steps"});
            if (!s.contains("start") || !s.contains("stop") || !s.contains("steps")) {
                fail("sweep", "needs start, stop and steps");
            }
            cfg.sweep.start = number(s.at("start"), "sweep.start");
            cfg.sweep.stop = number(s.at("stop"), "sweep.stop");
            cfg.sweep.steps = integer(s.at("steps"), "sweep.steps");
            if (cfg.sweep.steps < 1 || cfg.sweep.steps > 10000) fail("sweep.steps", "must lie in [1, 10000]");
            break;
        }
        case Kind::Kd: {
            forbid_except({"kd"});
            require("kd");
            const json& k = j.at("kd");
            check_keys(k, "kd", {"eta", "electron_energy_ev", "e0_v_per_m", "length_m", "omega0_rad_s", "half_width"});
            if (k.contains("eta")) {
                cfg.kd.eta = number(k.at("eta"), "kd.eta");
                if (*cfg.kd.eta < 0.0 || *cfg.kd.eta > 1000.0) fail("kd.eta", "must lie in [0, 1000]");
                for (const char* key : {"electron_energy_ev", "e0_v_per_m", "length_m", "omega0_rad_s"}) {
                    if (k.contains(key)) fail("kd", "give either eta or the beam parameters");
                }
            } else {
                for (const char* key : {"electron_energy_ev", "e0_v_per_m", "length_m", "omega0_rad_s"}) {
                    if (!k.contains(key)) fail("kd", std::string("missing '") + key + "'");
                }
                cfg.kd.electron_energy_ev = number(k.at("electron_energy_ev"), "kd.electron_energy_ev");
                cfg.kd.e0 = number(k.at("e0_v_per_m"), "kd.e0_v_per_m");
                cfg.kd.length = number(k.at("length_m"), "kd.length_m");
                cfg.kd.omega0 = number(k.at("omega0_rad_s"), "kd.omega0_rad_s");
                if (cfg.kd.electron_energy_ev <= 0.0) fail("kd.electron_energy_ev", "must be > 0");
                if (cfg.kd.e0 < 0.0) fail("kd.e0_v_per_m", "must be >= 0");
                if (cfg.kd.length <= 0.0) fail("kd.length_m", "must be > 0");
                if (cfg.kd.omega0 <= 0.0) fail("kd.omega0_rad_s", "must be > 0");
            }
            if (k.contains("half_width")) {
                cfg.kd.half_width = integer(k.at("half_width"), "kd.half_width");
                if (*cfg.kd.half_width < 0 || *cfg.kd.half_width > 4096) fail("kd.half_width", "must lie in [0, 4096]");
            }
            break;
        }
        case Kind::Compton: {
            forbid_except({"compton"});
            require("compton");
            const json& c = j.at("compton");
            check_keys(c, "compton", {"alpha1", "alpha2", "g_p12"});
            if (!c.contains("alpha1") || !c.contains("alpha2") || !c.contains("g_p12")) {
                fail("compton", "needs alpha1, alpha2 and g_p12");
            }
            cfg.alpha1 = complex_value(c.at("alpha1"), "compton.alpha1");
            cfg.alpha2 = complex_value(c.at("alpha2"), "compton.alpha2");
            cfg.g_p12 = complex_value(c.at("g_p12"), "compton.g_p12");
            check_alpha(cfg.alpha1, "compton.alpha1");
            check_alpha(cfg.alpha2, "compton.alpha2");
            limit_coupling(cfg.g_p12, "compton.g_p12");
            break;
        }
        case Kind::Coupling: {
            forbid_except({"electron_energy_ev", "modes"});
            require("electron_energy_ev");
            require("modes");
            cfg.electron_energy_ev = number(j.at("electron_energy_ev"), "electron_energy_ev");
            if (cfg.electron_energy_ev <= 0.0) fail("electron_energy_ev", "must be > 0");
            const json& modes = j.at("modes");
            if (!modes.is_array() || modes.empty() || modes.size() > 2) fail("modes", "expected 1 or 2 modes");
            for (std::size_t i = 0; i < modes.size(); ++i) {
                const std::string w = "modes[" + std::to_string(i) + "]";
                check_keys(modes[i], w, {"csv", "omega_rad_s"});
                if (!modes[i].contains("csv") || !modes[i].contains("omega_rad_s")) {
                    fail(w, "needs csv and omega_rad_s");
                }
                ModeSpec m;
                m.csv = text(modes[i].at("csv"), w + ".csv");
                if (m.csv.is_relative()) m.csv = base_dir / m.csv;
                m.omega = number(modes[i].at("omega_rad_s"), w + ".omega_rad_s");
                if (m.omega <= 0.0) fail(w + ".omega_rad_s", "must be > 0");
                if (!std::filesystem::is_regular_file(m.csv)) fail(w + ".csv", "file not found: " + m.csv.string());
                cfg.modes.push_back(std::move(m));
            }
            break;
        }
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

CouplingSet resolve_coupling(const CouplingSpec& spec, std::optional<double> delta_phi) {
    const std::optional<double> dphi = delta_phi ? delta_phi : spec.delta_phi;
    double phi2 = spec.phi_g2;
    if (dphi) {
        // delta_phi refers to g_qu2'; translate it back to the raw constant.
        double shift = 0.0;
        if (spec.prime_mode == PrimeMode::Disentangled) shift = std::atan(2.0 * spec.g2_abs);
        phi2 = *dphi - 2.0 * spec.phi_g1 - shift;
    }
    const cplx g1 = std::polar(spec.g1_abs, spec.phi_g1);
    const cplx g2 = std::polar(spec.g2_abs, phi2);
    CouplingSet c = assemble_coupling_set(g1, g2, spec.g_p ? *spec.g_p : cplx{0.0, spec.g2_abs});
    c.phi_g1 = spec.phi_g1;
    return c;
}

SplitPrimes resolve_primes(const CouplingSpec& spec, const CouplingSet& c) {
    switch (spec.prime_mode) {
        case PrimeMode::Identity: return identity_primes(c);
        case PrimeMode::Disentangled: return phase_matched_primes(c.g_qu2);
        case PrimeMode::Explicit: return {spec.g2_prime, spec.g_p_prime ? *spec.g_p_prime : c.g_p};
    }
    return identity_primes(c);
}

ScenarioOutput run_scenario(const ScenarioConfig& config, std::optional<Engine> engine) {
    const Engine e = engine ? *engine : config.engine;
    switch (config.kind) {
        case Kind::EvolveVacuum:
        case Kind::EvolveCoherent: return run_evolve(config, e);
        case Kind::PhaseSweep: return run_sweep(config, e);
        case Kind::Kd: return run_kd(config, e);
        case Kind::Compton: return run_compton_scenario(config, e);
        case Kind::Coupling: return run_coupling(config, e);
    }
    throw ConfigError("unknown scenario kind");
}

void write_outputs(const ScenarioOutput& out, const std::filesystem::path& dir, bool svg) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream os(dir / name, std::ios::binary);
        if (!os) throw std::ios_base::failure("cannot write " + (dir / name).string());
        os << body;
        if (!os) throw std::ios_base::failure("write failed for " + (dir / name).string());
    };
    for (const auto& [name, body] : out.files) write(name, body);
    write("run_meta.json", out.meta_json);
    if (!svg) return;
    for (const auto& [name, body] : out.files) {
        const std::string rendered = svg::render_csv(name, body);
        if (rendered.empty()) continue;
        write(name.substr(0, name.size() - 4) + ".svg", rendered);
    }
}

}  // namespace etp::scenario
