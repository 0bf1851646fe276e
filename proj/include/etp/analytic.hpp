#pragma once

// Closed-form final-state coefficients of the split scattering operator
//   D(g) S(g2') R(g_p'),  D = exp(g b a^+ - g* b^+ a),
//   S = exp(g2' b^+2 a^2 - g2'* b^2 a^+2),  R = exp(-g_p' (a a^+ + a^+ a)),
// and of the two-mode Compton operator.
//
// C_p^n is the amplitude of |E0 - p hbar w, n + p> for input |E0, n>.

#include <span>
#include <vector>

#include "etp/core_state.hpp"
#include "etp/coupling.hpp"

namespace etp {

struct SeriesControl {
    double term_tol = 1e-16;  // stop once a shell is below term_tol * |partial sum|
    int max_index = 200;      // largest shell (sum of summation indices) allowed

    void validate() const;
};

// Largest shell reached and terms evaluated, accumulated over calls.
struct SeriesStats {
    int max_shell = 0;
    long long terms = 0;
};

// C_p^0 for p in [0, p_max], without the global e^{-g_p'} phase.
// Double sum over m >= 0 and l >= max(0, p - 2m).
std::vector<cplx> vacuum_coefficients(const CouplingSet& coupling, cplx g_qu2_prime, int p_max,
                                      const SeriesControl& ctl = {}, SeriesStats* stats = nullptr);

// C_p^n for p in [p_lo, p_hi], including e^{-g_p'(2n+1)}. Triple sum over
// q in [0, n/2], m >= -q, l >= max(0, p - 2m). Throws IndexDomain if p_lo < -n.
std::vector<cplx> coherent_coefficients(const CouplingSet& coupling, cplx g_qu2_prime,
                                        cplx g_p_prime, int n, int p_lo, int p_hi,
                                        const SeriesControl& ctl = {},
                                        SeriesStats* stats = nullptr);

// Large-photon-number limit with g1 = g_qu sqrt(nbar), g2 = g_qu2' nbar:
//   e^{-g_p'(2n+1)} e^{i p arg g1} sum_m J_{p-2m}(2|g1|) J_{-m}(2|g2|) e^{-i m delta_phi}.
std::vector<cplx> strong_field_coefficients(cplx g1, cplx g2, double delta_phi, cplx g_p_prime,
                                            int n, int p_lo, int p_hi,
                                            const SeriesControl& ctl = {});

// <n1, n2| U |n1 - k, n2 + k> for U = exp(-2 g b1^+ b2 a1 a2^+ + 2 g* b1 b2^+ a1^+ a2),
// the electron ending at ladder index k. Zero when either input number is negative.
cplx compton_kernel(cplx g_p12, int n1, int n2, int k);

// Amplitudes c_{n1 n2 k} for coherent inputs alpha1, alpha2 (exact Poisson
// weights, no renormalisation) over the two-mode window. Throws TailTooHeavy
// when either input tail beyond n_max exceeds leak_tol.
JointState compton_coefficients(cplx alpha1, cplx alpha2, cplx g_p12,
                                const TruncationConfig& trunc2, const SeriesControl& ctl = {});

// Full split-operator output states built from the series. Amplitudes whose
// (k, n) falls outside the window are dropped.
JointState analytic_vacuum_state(const CouplingSet& coupling, const SplitPrimes& primes,
                                 const TruncationConfig& trunc, const SeriesControl& ctl = {},
                                 SeriesStats* stats = nullptr);
JointState analytic_fock_state(const CouplingSet& coupling, const SplitPrimes& primes, int n,
                               const TruncationConfig& trunc, const SeriesControl& ctl = {},
                               SeriesStats* stats = nullptr);
// Input is coherent_joint_state(trunc, alpha).
JointState analytic_coherent_state(const CouplingSet& coupling, const SplitPrimes& primes,
                                   cplx alpha, const TruncationConfig& trunc,
                                   const SeriesControl& ctl = {}, SeriesStats* stats = nullptr);

}  // namespace etp
