#include "etp/coupling.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "etp/constants.hpp"
#include "etp/errors.hpp"
#include "etp/format.hpp"

namespace etp {

namespace {

constexpr std::string_view kCsvHeader = "z_m,Ex_re,Ex_im,Ey_re,Ey_im,Ez_re,Ez_im";

bool finite(cplx c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

void require_same_grid(const FieldProfile& a, const FieldProfile& b) {
    if (a.z.size() != b.z.size()) {
        throw PhysicsError(ErrorKind::GridMismatch, "profiles have different sample counts");
    }
    const double tol = 1e-9 * std::abs(a.spacing());
    for (std::size_t i = 0; i < a.z.size(); ++i) {
        if (std::abs(a.z[i] - b.z[i]) > tol) {
            throw PhysicsError(ErrorKind::GridMismatch,
                               "profiles differ at sample " + std::to_string(i));
        }
    }
}

// Eight samples per phase cycle of e^{-i w z / v}.
void require_resolved(const FieldProfile& p, double omega_eff, double velocity) {
    if (omega_eff <= 0.0) return;
    const double limit = constants::pi * velocity / (4.0 * omega_eff);
    if (!(p.spacing() < limit)) {
        throw PhysicsError(ErrorKind::Undersampled,
                           "grid spacing " + format_double(p.spacing()) +
                               " m must be below " + format_double(limit) + " m");
    }
}

cplx simpson(std::span<const cplx> f, double h) {
    const std::size_t n = f.size();
    if (n < 2) return {};
    if (n == 2) return 0.5 * h * (f[0] + f[1]);
    auto composite = [&](std::size_t last) {  // points [0, last], last even
        cplx odd{}, even{};
        for (std::size_t i = 1; i < last; i += 2) odd += f[i];
        for (std::size_t i = 2; i < last; i += 2) even += f[i];
        return h / 3.0 * (f[0] + 4.0 * odd + 2.0 * even + f[last]);
    };
    if (n % 2 == 1) return composite(n - 1);
    const std::size_t m = n - 4;  // Simpson on [0, m], 3/8 on [m, n-1]
    const cplx tail = 3.0 * h / 8.0 * (f[m] + 3.0 * f[m + 1] + 3.0 * f[m + 2] + f[m + 3]);
    return (m > 0 ? composite(m) : cplx{}) + tail;
}

QuadratureResult integrate_with_phase(const FieldProfile& grid, double wave_number,
                                      const std::vector<cplx>& integrand, double prefactor_abs,
                                      cplx prefactor_phase) {
    std::vector<cplx> f(integrand.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = integrand[i] * std::polar(1.0, -wave_number * grid.z[i]);
    }
    const double h = (grid.z.back() - grid.z.front()) / static_cast<double>(f.size() - 1);
    QuadratureResult r = integrate_uniform(f, h);
    const cplx scale = prefactor_abs * prefactor_phase;
    r.value *= scale;
    r.error_estimate *= std::abs(scale);
    return r;
}

std::array<cplx, 3> primed(const std::array<cplx, 3>& e, double gamma) {
    return {e[0], e[1], e[2] / gamma};
}

// e^2 / (hbar w_i w_j 2 m_e gamma v)
double second_order_scale(double wi, double wj, const ElectronParams& el) {
    using namespace constants;
    return elementary_charge * elementary_charge /
           (hbar * wi * wj * 2.0 * electron_mass * el.gamma * el.velocity);
}

void require_electron(const ElectronParams& el) {
    if (!(el.velocity > 0.0) || !(el.gamma >= 1.0)) {
        throw PhysicsError(ErrorKind::InvalidArgument, "electron velocity must be > 0");
    }
}

}  // namespace

void FieldProfile::validate() const {
    if (z.empty() && field.empty()) throw PhysicsError(ErrorKind::EmptyProfile, "no samples");
    if (z.size() != field.size()) {
        throw PhysicsError(ErrorKind::InvalidProfile, "z and field lengths differ");
    }
    if (z.size() < 3) {
        throw PhysicsError(ErrorKind::InvalidProfile, "at least 3 samples are required");
    }
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw PhysicsError(ErrorKind::InvalidProfile, "omega must be > 0");
    }
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (!std::isfinite(z[i]) || !finite(field[i][0]) || !finite(field[i][1]) ||
            !finite(field[i][2])) {
            throw PhysicsError(ErrorKind::InvalidProfile,
                               "non-finite value at sample " + std::to_string(i));
        }
    }
    const double h = (z.back() - z.front()) / static_cast<double>(z.size() - 1);
    if (!(h > 0.0)) throw PhysicsError(ErrorKind::InvalidProfile, "z must be increasing");
    for (std::size_t i = 1; i < z.size(); ++i) {
        const double step = z[i] - z[i - 1];
        if (!(step > 0.0)) throw PhysicsError(ErrorKind::InvalidProfile, "z must be increasing");
        if (std::abs(step - h) > 1e-9 * h) {
            throw PhysicsError(ErrorKind::InvalidProfile,
                               "non-uniform spacing at sample " + std::to_string(i));
        }
    }
}

FieldProfile parse_field_profile_csv(std::istream& in, double omega) {
    FieldProfile p;
    p.omega = omega;
    std::string line;
    auto trim = [](std::string& s) {
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
        std::size_t b = 0;
        while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
        s.erase(0, b);
    };
    if (!std::getline(in, line)) throw PhysicsError(ErrorKind::EmptyProfile, "empty CSV");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    trim(line);
    if (line != kCsvHeader) {
        throw PhysicsError(ErrorKind::InvalidProfile,
                           "expected header '" + std::string(kCsvHeader) + "'");
    }
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        trim(line);
        if (line.empty()) continue;
        double v[7];
        const char* pos = line.data();
        const char* end = line.data() + line.size();
        for (int c = 0; c < 7; ++c) {
            while (pos < end && *pos == ' ') ++pos;
            if (pos < end && *pos == '+') ++pos;
            auto [next, ec] = std::from_chars(pos, end, v[c]);
            if (ec != std::errc{} || !std::isfinite(v[c])) {
                throw PhysicsError(ErrorKind::InvalidProfile,
                                   "row " + std::to_string(row) + ", column " +
                                       std::to_string(c + 1) + ": not a finite number");
            }
            pos = next;
            while (pos < end && *pos == ' ') ++pos;
            if (c < 6) {
                if (pos == end || *pos != ',') {
                    throw PhysicsError(ErrorKind::InvalidProfile,
                                       "row " + std::to_string(row) + ": expected 7 columns");
                }
                ++pos;
            }
        }
        if (pos != end) {
            throw PhysicsError(ErrorKind::InvalidProfile,
                               "row " + std::to_string(row) + ": trailing characters");
        }
        if (!p.z.empty() && !(v[0] > p.z.back())) {
            throw PhysicsError(ErrorKind::InvalidProfile,
                               "row " + std::to_string(row) + ": z is not increasing");
        }
        p.z.push_back(v[0]);
        p.field.push_back({cplx{v[1], v[2]}, cplx{v[3], v[4]}, cplx{v[5], v[6]}});
    }
    p.validate();
    return p;
}

FieldProfile read_field_profile_csv(const std::filesystem::path& path, double omega) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open field profile " + path.string());
    return parse_field_profile_csv(in, omega);
}

void write_field_profile_csv(std::ostream& out, const FieldProfile& profile) {
    out << kCsvHeader << '\n';
    for (std::size_t i = 0; i < profile.z.size(); ++i) {
        out << format_double(profile.z[i]);
        for (const cplx& c : profile.field[i]) {
            out << ',' << format_double(c.real()) << ',' << format_double(c.imag());
        }
        out << '\n';
    }
}

QuadratureResult integrate_uniform(std::span<const cplx> samples, double h) {
    QuadratureResult r;
    r.value = simpson(samples, h);
    const std::size_t n = samples.size();
    if (n < 5) {
        // Too few points for a coarse grid; compare against the trapezoid rule.
        cplx trap{};
        for (std::size_t i = 0; i + 1 < n; ++i) trap += 0.5 * h * (samples[i] + samples[i + 1]);
        r.error_estimate = std::abs(r.value - trap);
        return r;
    }
    // Richardson on the largest prefix with an even interval count.
    const std::size_t used = (n % 2 == 1) ? n : n - 1;
    const auto fine = samples.first(used);
    std::vector<cplx> coarse;
    coarse.reserve(used / 2 + 1);
    for (std::size_t i = 0; i < used; i += 2) coarse.push_back(fine[i]);
    const cplx i_h = simpson(fine, h);
    const cplx i_2h = simpson(coarse, 2.0 * h);
    r.error_estimate = std::abs(i_h - i_2h) / 15.0;
    return r;
}

QuadratureResult first_order_coupling_detailed(const FieldProfile& profile,
                                               const ElectronParams& electron) {
    profile.validate();
    require_electron(electron);
    require_resolved(profile, profile.omega, electron.velocity);
    std::vector<cplx> ez(profile.z.size());
    for (std::size_t i = 0; i < ez.size(); ++i) ez[i] = profile.field[i][2];
    const double scale = constants::elementary_charge / (constants::hbar * profile.omega);
    return integrate_with_phase(profile, profile.omega / electron.velocity, ez, scale, 1.0);
}

QuadratureResult second_order_coupling_detailed(const FieldProfile& profile_i,
                                                const FieldProfile& profile_j,
                                                const ElectronParams& electron) {
    profile_i.validate();
    profile_j.validate();
    require_electron(electron);
    require_same_grid(profile_i, profile_j);
    const double w = profile_i.omega + profile_j.omega;
    require_resolved(profile_i, w, electron.velocity);
    std::vector<cplx> dot(profile_i.z.size());
    for (std::size_t s = 0; s < dot.size(); ++s) {
        const auto a = primed(profile_i.field[s], electron.gamma);
        const auto b = primed(profile_j.field[s], electron.gamma);
        dot[s] = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    }
    return integrate_with_phase(profile_i, w / electron.velocity, dot,
                                second_order_scale(profile_i.omega, profile_j.omega, electron),
                                cplx{0.0, 1.0});
}

QuadratureResult ponderomotive_coupling_detailed(const FieldProfile& profile_i,
                                                 const FieldProfile& profile_j,
                                                 const ElectronParams& electron) {
    profile_i.validate();
    profile_j.validate();
    require_electron(electron);
    require_same_grid(profile_i, profile_j);
    const double w = profile_i.omega - profile_j.omega;
    require_resolved(profile_i, std::abs(w), electron.velocity);
    std::vector<cplx> dot(profile_i.z.size());
    for (std::size_t s = 0; s < dot.size(); ++s) {
        const auto a = primed(profile_i.field[s], electron.gamma);
        const auto b = primed(profile_j.field[s], electron.gamma);
        dot[s] = a[0] * std::conj(b[0]) + a[1] * std::conj(b[1]) + a[2] * std::conj(b[2]);
    }
    return integrate_with_phase(profile_i, w / electron.velocity, dot,
                                second_order_scale(profile_i.omega, profile_j.omega, electron),
                                cplx{0.0, 1.0});
}

cplx first_order_coupling(const FieldProfile& profile, const ElectronParams& electron) {
    return first_order_coupling_detailed(profile, electron).value;
}

cplx second_order_coupling(const FieldProfile& profile_i, const FieldProfile& profile_j,
                           const ElectronParams& electron) {
    return second_order_coupling_detailed(profile_i, profile_j, electron).value;
}

cplx ponderomotive_coupling(const FieldProfile& profile_i, const FieldProfile& profile_j,
                            const ElectronParams& electron) {
    return ponderomotive_coupling_detailed(profile_i, profile_j, electron).value;
}

double wrap_phase(double phi) {
    constexpr double two_pi = 2.0 * constants::pi;
    double r = std::fmod(phi, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

namespace {

double safe_arg(cplx c) { return c == cplx{} ? 0.0 : std::arg(c); }

}  // namespace

double relative_phase(cplx g_qu, cplx g_qu2_prime) {
    return wrap_phase(2.0 * safe_arg(g_qu) + safe_arg(g_qu2_prime));
}

CouplingSet assemble_coupling_set(cplx g_qu, cplx g_qu2, cplx g_p) {
    CouplingSet c;
    c.g_qu = g_qu;
    c.g_qu2 = g_qu2;
    c.g_p = g_p;
    c.phi_g1 = safe_arg(g_qu);
    c.phi_g2 = safe_arg(g_qu2);
    c.delta_phi = relative_phase(g_qu, g_qu2);
    return c;
}

CouplingSet assemble_coupling_set(cplx g_qu, cplx g_qu2, bool phase_matched) {
    return assemble_coupling_set(g_qu, g_qu2, phase_matched ? cplx{0.0, std::abs(g_qu2)} : cplx{});
}

CouplingSet coupling_from_magnitudes(double g1_abs, double g2_abs, double delta_phi,
                                     double phi_g1) {
    if (g1_abs < 0.0 || g2_abs < 0.0) {
        throw PhysicsError(ErrorKind::InvalidArgument, "coupling magnitudes must be >= 0");
    }
    CouplingSet c = assemble_coupling_set(std::polar(g1_abs, phi_g1),
                                          std::polar(g2_abs, delta_phi - 2.0 * phi_g1), true);
    // Keep the caller's phases even when a magnitude vanishes.
    c.phi_g1 = phi_g1;
    c.phi_g2 = delta_phi - 2.0 * phi_g1;
    c.delta_phi = wrap_phase(delta_phi);
    return c;
}

SplitPrimes identity_primes(const CouplingSet& c) { return {c.g_qu2, c.g_p}; }

SplitPrimes phase_matched_primes(cplx g_qu2) {
    const double r = std::abs(g_qu2);
    const double t = std::atan(2.0 * r);
    SplitPrimes s;
    s.g_qu2_prime = std::polar(0.5 * std::asinh(2.0 * r), safe_arg(g_qu2) + t);
    s.g_p_prime = cplx{0.0, 0.5 * t};
    return s;
}

}  // namespace etp
