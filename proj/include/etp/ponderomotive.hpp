#pragma once

// Kapitza-Dirac diffraction of an electron by a standing light wave
// E(x, t) = 2 |E0| cos(k_p x) cos(w0 t).

#include <vector>

#include "etp/core_state.hpp"

namespace etp {

struct StandingWaveParams {
    double e0 = 0.0;      // field amplitude per beam, V/m
    double length = 0.0;  // interaction length, m
    double omega0 = 0.0;  // rad/s
    ElectronParams electron;

    // InvalidArgument unless e0 >= 0 and length, omega0, velocity > 0.
    void validate() const;
};

// eta = e^2 |E0|^2 L / (2 gamma m_e hbar w0^2 v).
double kd_eta(const StandingWaveParams& params);

// |E0| giving the requested eta with the other parameters fixed.
double kd_field_for_eta(double eta, double length, double omega0, const ElectronParams& electron);

// k_p = w0 / c.
double kd_photon_wavenumber(double omega0);

struct KdOrder {
    int order = 0;
    int momentum_over_kp = 0;  // 2 * order
    double probability = 0.0;  // J_order(eta)^2
};

// Orders -N..N. Throws WindowTooNarrow when the window holds less than 1 - 1e-9.
std::vector<KdOrder> kd_momentum_distribution(double eta, int half_width);

// Smallest half-width whose neglected orders are below ~1e-17 (0 for eta = 0).
int kd_default_half_width(double eta);

}  // namespace etp
