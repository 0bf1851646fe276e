#pragma once

// Truncated joint electron-photon Hilbert space.
//
// The electron lives on an energy ladder E0 + k*hbar*omega (k integer, any
// sign); each photon mode on a Fock ladder n >= 0. A TruncationConfig picks a
// finite window of both; a JointState stores one complex amplitude per basis
// vector |k, n> (one mode) or |k, n1, n2> (two modes).

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace etp {

using cplx = std::complex<double>;

struct TruncationConfig {
    int k_min = -8;
    int k_max = 8;
    int n_max = 4;          // photon cutoff, per mode
    double leak_tol = 1e-10;

    // Throws PhysicsError(InvalidArgument) when the window is empty or
    // leak_tol is outside (0, 1).
    void validate() const;

    int k_count() const noexcept { return k_max - k_min + 1; }
    int n_count() const noexcept { return n_max + 1; }
    std::size_t dimension(int mode_count) const noexcept;

    friend bool operator==(const TruncationConfig&, const TruncationConfig&) = default;
};

// Window sizing for vacuum- or coherent-seeded single-mode runs:
// n_max >= |alpha|^2 + 6|alpha| + 10 and k in [-(n_max+4), n_max+4].
TruncationConfig auto_truncation(double alpha_abs, double leak_tol = 1e-10);

struct BasisIndex {
    int k = 0;
    int n1 = 0;
    int n2 = 0;  // always 0 for single-mode states
};

class JointState {
public:
    JointState(const TruncationConfig& trunc, int mode_count);

    int mode_count() const noexcept { return mode_count_; }
    const TruncationConfig& truncation() const noexcept { return trunc_; }
    std::size_t size() const noexcept { return amps_.size(); }

    bool in_window(int k, int n) const noexcept;
    bool in_window(int k, int n1, int n2) const noexcept;

    // Flat index of a basis vector; throws OutOfWindow (or WrongModeCount)
    // instead of aliasing.
    std::size_t index(int k, int n) const;
    std::size_t index(int k, int n1, int n2) const;
    BasisIndex decode(std::size_t flat) const noexcept;

    cplx at(int k, int n) const { return amps_[index(k, n)]; }
    cplx& at(int k, int n) { return amps_[index(k, n)]; }
    cplx at(int k, int n1, int n2) const { return amps_[index(k, n1, n2)]; }
    cplx& at(int k, int n1, int n2) { return amps_[index(k, n1, n2)]; }

    std::span<const cplx> amplitudes() const noexcept { return amps_; }
    std::span<cplx> amplitudes() noexcept { return amps_; }

    double norm_squared() const noexcept;

    // Probability that was outside the window before renormalisation (for
    // truncated coherent inputs); zero otherwise.
    double deficit() const noexcept { return deficit_; }
    void set_deficit(double d) noexcept { deficit_ = d; }

private:
    TruncationConfig trunc_;
    int mode_count_;
    std::vector<cplx> amps_;
    double deficit_ = 0.0;
};

struct ElectronParams {
    double kinetic_energy_ev = 0.0;
    double gamma = 1.0;
    double velocity = 0.0;  // m/s

    double beta() const noexcept;
};

ElectronParams electron_kinematics(double kinetic_energy_ev);

JointState vacuum_joint_state(const TruncationConfig& trunc, int mode_count = 1);

// Electron at k=0, photons in |n>.
JointState fock_joint_state(const TruncationConfig& trunc, int n);

// Electron at k=0, photons in the coherent state |alpha>, truncated at n_max
// and renormalised. Throws TailTooHeavy when the weight beyond n_max exceeds
// trunc.leak_tol; the weight is kept in deficit().
JointState coherent_joint_state(const TruncationConfig& trunc, cplx alpha);
JointState coherent_joint_state(const TruncationConfig& trunc, cplx alpha1, cplx alpha2);

// Unnormalised Poisson amplitudes e^{-|a|^2/2} a^n / sqrt(n!) for n <= n_max.
std::vector<cplx> coherent_amplitudes(cplx alpha, int n_max);

// Sum over n > n_max of the Poisson(|alpha|^2) probabilities.
double coherent_tail_weight(cplx alpha, int n_max);

}  // namespace etp
