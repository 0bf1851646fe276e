#include "etp/ponderomotive.hpp"

#include <cmath>
#include <string>

#include "etp/constants.hpp"
#include "etp/errors.hpp"
#include "etp/format.hpp"
#include "etp/special.hpp"

namespace etp {

void StandingWaveParams::validate() const {
    if (!(e0 >= 0.0) || !std::isfinite(e0)) {
        throw PhysicsError(ErrorKind::InvalidArgument, "E0 must be >= 0");
    }
    if (!(length > 0.0) || !(omega0 > 0.0)) {
        throw PhysicsError(ErrorKind::InvalidArgument, "length and omega0 must be > 0");
    }
    if (!(electron.velocity > 0.0)) {
        throw PhysicsError(ErrorKind::InvalidArgument, "electron velocity must be > 0");
    }
}

namespace {

// eta / |E0|^2
double eta_per_field_squared(double length, double omega0, const ElectronParams& el) {
    using namespace constants;
    return elementary_charge * elementary_charge * length /
           (2.0 * el.gamma * electron_mass * hbar * omega0 * omega0 * el.velocity);
}

}  // namespace

double kd_eta(const StandingWaveParams& p) {
    p.validate();
    return eta_per_field_squared(p.length, p.omega0, p.electron) * p.e0 * p.e0;
}

double kd_field_for_eta(double eta, double length, double omega0, const ElectronParams& electron) {
    if (!(eta >= 0.0)) throw PhysicsError(ErrorKind::InvalidArgument, "eta must be >= 0");
    StandingWaveParams probe{0.0, length, omega0, electron};
    probe.validate();
    return std::sqrt(eta / eta_per_field_squared(length, omega0, electron));
}

double kd_photon_wavenumber(double omega0) { return omega0 / constants::speed_of_light; }

std::vector<KdOrder> kd_momentum_distribution(double eta, int half_width) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
        throw PhysicsError(ErrorKind::InvalidArgument, "eta must be finite and >= 0");
    }
    if (half_width < 0) throw PhysicsError(ErrorKind::InvalidArgument, "half-width must be >= 0");
    const auto j = special::bessel_j_sequence(half_width, eta);
    std::vector<KdOrder> out;
    out.reserve(2 * static_cast<std::size_t>(half_width) + 1);
    long double total = 0.0L;
    for (int n = -half_width; n <= half_width; ++n) {
        const double v = j[static_cast<std::size_t>(std::abs(n))];
        const double p = v * v;
        out.push_back({n, 2 * n, p});
        total += p;
    }
    if (total < 1.0L - 1e-9L) {
        throw PhysicsError(ErrorKind::WindowTooNarrow,
                           "orders within +-" + std::to_string(half_width) + " hold only " +
                               format_double(static_cast<double>(total)));
    }
    return out;
}

int kd_default_half_width(double eta) {
    return eta == 0.0 ? 0 : special::bessel_cutoff_order(eta);
}

}  // namespace etp
