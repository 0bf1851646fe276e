#include "etp/core_state.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "etp/constants.hpp"
#include "etp/errors.hpp"
#include "etp/format.hpp"
#include "etp/special.hpp"

namespace etp {

void TruncationConfig::validate() const {
    if (k_min > 0 || k_max < 0) {
        throw PhysicsError(ErrorKind::InvalidArgument,
                           "electron window must contain k=0 (k_min <= 0 <= k_max)");
    }
    if (n_max < 0) {
        throw PhysicsError(ErrorKind::InvalidArgument, "n_max must be >= 0");
    }
    if (!(leak_tol > 0.0 && leak_tol < 1.0)) {
        throw PhysicsError(ErrorKind::InvalidArgument, "leak_tol must lie in (0, 1)");
    }
}

std::size_t TruncationConfig::dimension(int mode_count) const noexcept {
    std::size_t d = static_cast<std::size_t>(k_count());
    for (int m = 0; m < mode_count; ++m) d *= static_cast<std::size_t>(n_count());
    return d;
}

TruncationConfig auto_truncation(double alpha_abs, double leak_tol) {
    TruncationConfig t;
    t.n_max = static_cast<int>(std::ceil(alpha_abs * alpha_abs + 6.0 * alpha_abs + 10.0));
    t.k_min = -(t.n_max + 4);
    t.k_max = t.n_max + 4;
    t.leak_tol = leak_tol;
    return t;
}

JointState::JointState(const TruncationConfig& trunc, int mode_count)
    : trunc_(trunc), mode_count_(mode_count) {
    trunc_.validate();
    if (mode_count != 1 && mode_count != 2) {
        throw PhysicsError(ErrorKind::WrongModeCount, "mode_count must be 1 or 2");
    }
    amps_.assign(trunc_.dimension(mode_count), cplx{});
}

bool JointState::in_window(int k, int n) const noexcept {
    return mode_count_ == 1 && k >= trunc_.k_min && k <= trunc_.k_max && n >= 0 &&
           n <= trunc_.n_max;
}

bool JointState::in_window(int k, int n1, int n2) const noexcept {
    return mode_count_ == 2 && k >= trunc_.k_min && k <= trunc_.k_max && n1 >= 0 &&
           n1 <= trunc_.n_max && n2 >= 0 && n2 <= trunc_.n_max;
}

std::size_t JointState::index(int k, int n) const {
    if (mode_count_ != 1) {
        throw PhysicsError(ErrorKind::WrongModeCount, "(k, n) index on a two-mode state");
    }
    if (!in_window(k, n)) {
        throw PhysicsError(ErrorKind::OutOfWindow,
                           "(k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    }
    return static_cast<std::size_t>(k - trunc_.k_min) * trunc_.n_count() +
           static_cast<std::size_t>(n);
}

std::size_t JointState::index(int k, int n1, int n2) const {
    if (mode_count_ != 2) {
        throw PhysicsError(ErrorKind::WrongModeCount, "(k, n1, n2) index on a single-mode state");
    }
    if (!in_window(k, n1, n2)) {
        throw PhysicsError(ErrorKind::OutOfWindow, "(k=" + std::to_string(k) +
                                                       ", n1=" + std::to_string(n1) +
                                                       ", n2=" + std::to_string(n2) + ")");
    }
    const std::size_t nc = static_cast<std::size_t>(trunc_.n_count());
    return (static_cast<std::size_t>(k - trunc_.k_min) * nc + static_cast<std::size_t>(n1)) * nc +
           static_cast<std::size_t>(n2);
}

BasisIndex JointState::decode(std::size_t flat) const noexcept {
    const std::size_t nc = static_cast<std::size_t>(trunc_.n_count());
    BasisIndex b;
    if (mode_count_ == 1) {
        b.n1 = static_cast<int>(flat % nc);
        b.k = static_cast<int>(flat / nc) + trunc_.k_min;
    } else {
        b.n2 = static_cast<int>(flat % nc);
        flat /= nc;
        b.n1 = static_cast<int>(flat % nc);
        b.k = static_cast<int>(flat / nc) + trunc_.k_min;
    }
    return b;
}

double JointState::norm_squared() const noexcept {
    long double s = 0.0L;
    for (const auto& a : amps_) s += std::norm(a);
    return static_cast<double>(s);
}

double ElectronParams::beta() const noexcept { return velocity / constants::speed_of_light; }

ElectronParams electron_kinematics(double kinetic_energy_ev) {
    if (!(kinetic_energy_ev > 0.0) || !std::isfinite(kinetic_energy_ev)) {
        throw PhysicsError(ErrorKind::NonPositiveEnergy, "kinetic energy must be > 0 eV");
    }
    ElectronParams p;
    p.kinetic_energy_ev = kinetic_energy_ev;
    const double ratio = kinetic_energy_ev / constants::electron_rest_energy_ev;
    p.gamma = 1.0 + ratio;
    // 1 - 1/gamma^2 = ratio (2 + ratio) / gamma^2, which stays accurate as ratio -> 0.
    p.velocity = constants::speed_of_light * std::sqrt(ratio * (2.0 + ratio)) / p.gamma;
    return p;
}

JointState vacuum_joint_state(const TruncationConfig& trunc, int mode_count) {
    JointState s(trunc, mode_count);
    if (mode_count == 1) {
        s.at(0, 0) = 1.0;
    } else {
        s.at(0, 0, 0) = 1.0;
    }
    return s;
}

JointState fock_joint_state(const TruncationConfig& trunc, int n) {
    JointState s(trunc, 1);
    s.at(0, n) = 1.0;
    return s;
}

std::vector<cplx> coherent_amplitudes(cplx alpha, int n_max) {
    std::vector<cplx> out(static_cast<std::size_t>(n_max) + 1);
    const double r = std::abs(alpha);
    if (r == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const double phase = std::arg(alpha);
    const double log_r = std::log(r);
    for (int n = 0; n <= n_max; ++n) {
        const double log_mag = -0.5 * r * r + n * log_r - 0.5 * special::log_factorial(n);
        out[n] = std::polar(std::exp(log_mag), n * phase);
    }
    return out;
}

double coherent_tail_weight(cplx alpha, int n_max) {
    const double mean = std::norm(alpha);
    if (mean == 0.0) return 0.0;
    const double log_mean = std::log(mean);
    long double tail = 0.0L;
    // Summed directly (not as 1 - head) so tiny tails keep full relative accuracy.
    for (int n = n_max + 1;; ++n) {
        const double term = std::exp(-mean + n * log_mean - special::log_factorial(n));
        tail += term;
        if (n > mean && term < 1e-18 * static_cast<double>(tail)) break;
        if (n > mean && term == 0.0) break;
    }
    return static_cast<double>(tail);
}

namespace {

void normalise(JointState& s) {
    const double norm = std::sqrt(s.norm_squared());
    for (auto& a : s.amplitudes()) a /= norm;
}

}  // namespace

JointState coherent_joint_state(const TruncationConfig& trunc, cplx alpha) {
    trunc.validate();
    const double tail = coherent_tail_weight(alpha, trunc.n_max);
    if (tail > trunc.leak_tol) {
        throw PhysicsError(ErrorKind::TailTooHeavy,
                           "coherent tail beyond n_max is " + format_double(tail));
    }
    JointState s(trunc, 1);
    const auto amps = coherent_amplitudes(alpha, trunc.n_max);
    for (int n = 0; n <= trunc.n_max; ++n) s.at(0, n) = amps[n];
    normalise(s);
    s.set_deficit(tail);
    return s;
}

JointState coherent_joint_state(const TruncationConfig& trunc, cplx alpha1, cplx alpha2) {
    trunc.validate();
    const double t1 = coherent_tail_weight(alpha1, trunc.n_max);
    const double t2 = coherent_tail_weight(alpha2, trunc.n_max);
    const double tail = t1 + t2 - t1 * t2;
    if (tail > trunc.leak_tol) {
        throw PhysicsError(ErrorKind::TailTooHeavy,
                           "two-mode coherent tail beyond n_max is " + format_double(tail));
    }
    JointState s(trunc, 2);
    const auto a1 = coherent_amplitudes(alpha1, trunc.n_max);
    const auto a2 = coherent_amplitudes(alpha2, trunc.n_max);
    for (int n1 = 0; n1 <= trunc.n_max; ++n1) {
        for (int n2 = 0; n2 <= trunc.n_max; ++n2) s.at(0, n1, n2) = a1[n1] * a2[n2];
    }
    normalise(s);
    s.set_deficit(tail);
    return s;
}

}  // namespace etp
