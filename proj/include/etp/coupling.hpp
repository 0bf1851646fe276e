#pragma once

// Quantum coupling constants from a sampled near-field profile.
//
// All constants are dimensionless. Fields are the complex per-photon mode
// fields (V/m) sampled along the electron trajectory z; the mode time
// dependence is e^{-i omega t}.

#include <array>
#include <complex>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "etp/core_state.hpp"

namespace etp {

struct FieldProfile {
    std::vector<double> z;                  // m, strictly increasing, uniform
    std::vector<std::array<cplx, 3>> field; // (Ex, Ey, Ez) at each z
    double omega = 0.0;                     // rad/s

    // EmptyProfile for no samples; InvalidProfile for fewer than 3 samples,
    // non-finite values, non-increasing or non-uniform z, or omega <= 0.
    void validate() const;
    double spacing() const noexcept { return z.size() > 1 ? z[1] - z[0] : 0.0; }
};

// Field CSV: header `z_m,Ex_re,Ex_im,Ey_re,Ey_im,Ez_re,Ez_im`.
FieldProfile parse_field_profile_csv(std::istream& in, double omega);
FieldProfile read_field_profile_csv(const std::filesystem::path& path, double omega);
void write_field_profile_csv(std::ostream& out, const FieldProfile& profile);

struct QuadratureResult {
    cplx value;
    double error_estimate = 0.0;  // Richardson: |I_h - I_2h| / 15
};

// Composite Simpson on a uniform grid; an even sample count closes the last
// three intervals with Simpson's 3/8 rule.
QuadratureResult integrate_uniform(std::span<const cplx> samples, double h);

QuadratureResult first_order_coupling_detailed(const FieldProfile& profile,
                                               const ElectronParams& electron);
QuadratureResult second_order_coupling_detailed(const FieldProfile& profile_i,
                                                const FieldProfile& profile_j,
                                                const ElectronParams& electron);
QuadratureResult ponderomotive_coupling_detailed(const FieldProfile& profile_i,
                                                 const FieldProfile& profile_j,
                                                 const ElectronParams& electron);

/// g_qu = (e / hbar w) \int E_z(z) e^{-i w z / v} dz.
cplx first_order_coupling(const FieldProfile& profile, const ElectronParams& electron);

/// g_qu^(2)_ij = (i e^2 / (hbar w_i w_j 2 m_e gamma v)) \int E'_i.E'_j e^{-i(w_i+w_j)z/v} dz,
/// with E' = (Ex, Ey, Ez/gamma).
cplx second_order_coupling(const FieldProfile& profile_i, const FieldProfile& profile_j,
                           const ElectronParams& electron);

/// g_p,ij, as above with E'_j conjugated and the frequency difference in the phase.
cplx ponderomotive_coupling(const FieldProfile& profile_i, const FieldProfile& profile_j,
                            const ElectronParams& electron);

struct CouplingSet {
    cplx g_qu;
    cplx g_qu2;
    cplx g_p;
    double phi_g1 = 0.0;     // arg g_qu (0 for g_qu = 0)
    double phi_g2 = 0.0;     // arg g_qu2 (0 for g_qu2 = 0)
    double delta_phi = 0.0;  // 2 phi_g1 + phi_g2, wrapped to [0, 2 pi)
};

// Phase matching fixes g_p = i |g_qu2|; otherwise g_p is left at zero.
CouplingSet assemble_coupling_set(cplx g_qu, cplx g_qu2, bool phase_matched);
CouplingSet assemble_coupling_set(cplx g_qu, cplx g_qu2, cplx g_p);

// g_qu = |g1| e^{i phi_g1}, g_qu2 = |g2| e^{i(delta_phi - 2 phi_g1)}, phase matched.
CouplingSet coupling_from_magnitudes(double g1_abs, double g2_abs, double delta_phi,
                                     double phi_g1 = 0.0);

// Constants of the split operator
//   exp(g b a^+ - g* b^+ a) exp(g2' b^+2 a^2 - g2'* b^2 a^+2) exp(-g_p' (a a^+ + a^+ a)).
struct SplitPrimes {
    cplx g_qu2_prime;
    cplx g_p_prime;
};

// g2' = g2, g_p' = g_p.
SplitPrimes identity_primes(const CouplingSet& c);

// Exact disentangling of exp(g2 a^2 - g2* a^+2 - i|g2| (a a^+ + a^+ a)) into
// a squeeze followed by a photon-number phase:
//   |g2'| = asinh(2|g2|)/2, arg g2' = arg g2 + atan(2|g2|), g_p' = (i/2) atan(2|g2|).
SplitPrimes phase_matched_primes(cplx g_qu2);

// 2 arg(g_qu) + arg(g_qu2'), wrapped to [0, 2 pi).
double relative_phase(cplx g_qu, cplx g_qu2_prime);

double wrap_phase(double phi);

}  // namespace etp
