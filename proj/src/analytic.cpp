#include "etp/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "etp/errors.hpp"
#include "etp/format.hpp"
#include "etp/special.hpp"

namespace etp {

namespace {

using lcplx = std::complex<long double>;

// ln n! in extended precision. The alternating series cancel heavily once
// |g_qu| approaches 1.5, so term magnitudes need more than double accuracy.
long double lfact(int n) {
    static const std::vector<long double> table = [] {
        std::vector<long double> t(8192, 0.0L);
        for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + std::log(static_cast<long double>(i));
        return t;
    }();
    if (n < 0) throw PhysicsError(ErrorKind::IndexDomain, "log_factorial of negative integer");
    if (static_cast<std::size_t>(n) < table.size()) return table[static_cast<std::size_t>(n)];
    return std::lgamma(static_cast<long double>(n) + 1.0L);
}

// Unit-modulus sign/phase times exp(log_mag).
lcplx make_term(long double log_mag, bool negative, double phase) {
    const long double mag = std::exp(log_mag);
    const long double re = mag * std::cos(static_cast<long double>(phase));
    const long double im = mag * std::sin(static_cast<long double>(phase));
    return negative ? lcplx{-re, -im} : lcplx{re, im};
}

bool odd(int v) { return (v % 2) != 0; }

// Jacobi polynomial P_n^(a,b)(x) by the standard upward three-term recurrence.
long double jacobi(int n, int a, int b, long double x) {
    long double p0 = 1.0L;
    if (n == 0) return p0;
    long double p1 = 0.5L * (2.0L * (a + 1) + (a + b + 2) * (x - 1.0L));
    for (int i = 2; i <= n; ++i) {
        const long double c = 2.0L * i + a + b;
        const long double a1 = 2.0L * i * (i + a + b) * (c - 2.0L);
        const long double a2 = (c - 1.0L) * (static_cast<long double>(a) * a - static_cast<long double>(b) * b);
        const long double a3 = (c - 2.0L) * (c - 1.0L) * c;
        const long double a4 = 2.0L * (i + a - 1) * (i + b - 1) * c;
        const long double p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

// Sums term(a, b) over a, b >= 0, one shell s = a + b at a time. Stops after
// two consecutive non-increasing shells whose largest term is below
// term_tol * |sum|.
template <class Term>
lcplx shell_sum(Term&& term, const SeriesControl& ctl, SeriesStats* stats, const char* what,
                long double& peak) {
    lcplx sum{};
    long double prev = std::numeric_limits<long double>::infinity();
    int quiet = 0;
    for (int s = 0; s <= ctl.max_index; ++s) {
        long double shell_max = 0.0L;
        for (int a = 0; a <= s; ++a) {
            const lcplx t = term(a, s - a);
            sum += t;
            shell_max = std::max(shell_max, std::abs(t));
        }
        peak = std::max(peak, shell_max);
        if (stats) {
            stats->max_shell = std::max(stats->max_shell, s);
            stats->terms += s + 1;
        }
        if (shell_max <= ctl.term_tol * std::abs(sum) && shell_max <= prev) {
            if (++quiet >= 2) return sum;
        } else {
            quiet = 0;
        }
        prev = shell_max;
    }
    throw PhysicsError(ErrorKind::SeriesNotConverged,
                       std::string(what) + " did not converge within " +
                           std::to_string(ctl.max_index) + " shells");
}

struct SplitParams {
    double g_abs;
    long double log_g;      // ln|g|, unused when g = 0
    double phi1;
    double delta_phi;
    double t_half;          // tanh(2|g2'|)/2
    long double log_t_half; // unused when t_half = 0
    long double log_cosh;   // ln cosh(2|g2'|)
};

// Rounding of a term of size `peak` survives the cancellation roughly at this
// relative level; beyond kAmplitudeAccuracy the sum is reported as unconverged.
constexpr long double kTermRounding = 1e-16L;
constexpr long double kAmplitudeAccuracy = 1e-7L;

void require_accurate(long double peak, const char* what) {
    if (peak * kTermRounding > kAmplitudeAccuracy) {
        throw PhysicsError(ErrorKind::SeriesNotConverged,
                           std::string(what) + " loses precision to cancellation (largest term " +
                               format_double(static_cast<double>(peak)) +
                               "); use the oracle engine at this coupling");
    }
}

SplitParams split_params(const CouplingSet& c, cplx g2p) {
    SplitParams s;
    s.g_abs = std::abs(c.g_qu);
    s.log_g = s.g_abs > 0.0 ? std::log(static_cast<long double>(s.g_abs)) : 0.0L;
    s.phi1 = s.g_abs > 0.0 ? std::arg(c.g_qu) : c.phi_g1;
    const double r = std::abs(g2p);
    s.delta_phi = 2.0 * s.phi1 + (r > 0.0 ? std::arg(g2p) : 0.0);
    s.t_half = 0.5 * std::tanh(2.0 * r);
    const long double two_r = 2.0L * static_cast<long double>(r);
    s.log_t_half = s.t_half > 0.0 ? std::log(std::tanh(two_r) / 2.0L) : 0.0L;
    s.log_cosh = std::log(std::cosh(two_r));
    return s;
}

cplx vacuum_coefficient(const SplitParams& sp, int p, const SeriesControl& ctl,
                        SeriesStats* stats) {
    const long double half_lf_p = 0.5L * lfact(p);
    if (sp.g_abs == 0.0) {
        // Squeezed vacuum: only l = 0, m = p/2 survives.
        if (odd(p)) return {};
        const int m = p / 2;
        if (m > 0 && sp.t_half == 0.0) return {};
        const long double lm = half_lf_p - lfact(m) + m * sp.log_t_half - 0.5L * sp.log_cosh;
        const lcplx t = make_term(lm, odd(m), -m * sp.delta_phi);
        return {static_cast<double>(t.real()), static_cast<double>(t.imag())};
    }
    const long double g_sq = static_cast<long double>(sp.g_abs) * sp.g_abs;
    const long double base = 0.5L * g_sq - 0.5L * sp.log_cosh - half_lf_p;
    auto term = [&](int u, int m) -> lcplx {
        if (m > 0 && sp.t_half == 0.0) return {};
        const int l = u + std::max(0, p - 2 * m);
        const int j = l + 2 * m - p;
        const long double lm = base + (2 * l + 2 * m - p) * sp.log_g - lfact(j) - lfact(l) -
                               lfact(m) + m * sp.log_t_half + lfact(2 * m + l);
        return make_term(lm, odd(l + m + p), p * sp.phi1 - m * sp.delta_phi);
    };
    long double peak = 0.0L;
    const lcplx s = shell_sum(term, ctl, stats, "vacuum series", peak);
    require_accurate(peak, "vacuum series");
    return {static_cast<double>(s.real()), static_cast<double>(s.imag())};
}

cplx fock_coefficient(const SplitParams& sp, int n, int p, const SeriesControl& ctl,
                      SeriesStats* stats) {
    const long double half_ratio = 0.5L * (lfact(n) - lfact(n + p));
    const long double g_sq = static_cast<long double>(sp.g_abs) * sp.g_abs;
    long double peak = 0.0L;
    lcplx total{};
    for (int q = 0; 2 * q <= n; ++q) {
        if (q > 0 && sp.t_half == 0.0) break;
        const long double q_part = -lfact(q) - (n - 2 * q + 0.5L) * sp.log_cosh -
                                   lfact(n - 2 * q) + half_ratio;
        if (sp.g_abs == 0.0) {
            if (odd(p)) return {};
            const int m = p / 2;
            if (q + m < 0) continue;
            if (2 * q + m > 0 && sp.t_half == 0.0) continue;
            const long double lm =
                q_part + (2 * q + m) * sp.log_t_half - lfact(q + m) + lfact(n + p);
            const lcplx t = make_term(lm, odd(p + q + m), -m * sp.delta_phi);
            peak = std::max(peak, std::abs(t));
            total += t;
            continue;
        }
        auto term = [&](int u, int mq) -> lcplx {
            const int m = mq - q;
            if (2 * q + m > 0 && sp.t_half == 0.0) return {};
            const int l = u + std::max(0, p - 2 * m);
            const int j = l - p + 2 * m;
            const long double lm = q_part + 0.5L * g_sq + (2 * l - p + 2 * m) * sp.log_g -
                                   lfact(j) - lfact(l) + (2 * q + m) * sp.log_t_half -
                                   lfact(q + m) + lfact(n + 2 * m + l);
            return make_term(lm, odd(l + p + q + m), p * sp.phi1 - m * sp.delta_phi);
        };
        total += shell_sum(term, ctl, stats, "Fock-input series", peak);
    }
    require_accurate(peak, "Fock-input series");
    return {static_cast<double>(total.real()), static_cast<double>(total.imag())};
}

}  // namespace

void SeriesControl::validate() const {
    if (!(term_tol > 0.0)) throw PhysicsError(ErrorKind::InvalidArgument, "term_tol must be > 0");
    if (max_index < 10) throw PhysicsError(ErrorKind::InvalidArgument, "max_index must be >= 10");
}

std::vector<cplx> vacuum_coefficients(const CouplingSet& coupling, cplx g_qu2_prime, int p_max,
                                      const SeriesControl& ctl, SeriesStats* stats) {
    ctl.validate();
    if (p_max < 0) throw PhysicsError(ErrorKind::IndexDomain, "p_max must be >= 0");
    const SplitParams sp = split_params(coupling, g_qu2_prime);
    std::vector<cplx> out(static_cast<std::size_t>(p_max) + 1);
    for (int p = 0; p <= p_max; ++p) out[p] = vacuum_coefficient(sp, p, ctl, stats);
    return out;
}

std::vector<cplx> coherent_coefficients(const CouplingSet& coupling, cplx g_qu2_prime,
                                        cplx g_p_prime, int n, int p_lo, int p_hi,
                                        const SeriesControl& ctl, SeriesStats* stats) {
    ctl.validate();
    if (n < 0) throw PhysicsError(ErrorKind::IndexDomain, "photon number must be >= 0");
    if (p_lo < -n) {
        throw PhysicsError(ErrorKind::IndexDomain,
                           "p=" + std::to_string(p_lo) + " below -n=" + std::to_string(-n));
    }
    if (p_hi < p_lo) return {};
    const SplitParams sp = split_params(coupling, g_qu2_prime);
    const cplx phase = std::exp(-g_p_prime * static_cast<double>(2 * n + 1));
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(p_hi - p_lo + 1));
    for (int p = p_lo; p <= p_hi; ++p) out.push_back(phase * fock_coefficient(sp, n, p, ctl, stats));
    return out;
}

std::vector<cplx> strong_field_coefficients(cplx g1, cplx g2, double delta_phi, cplx g_p_prime,
                                            int n, int p_lo, int p_hi,
                                            const SeriesControl& ctl) {
    ctl.validate();
    if (p_hi < p_lo) return {};
    const double x1 = 2.0 * std::abs(g1);
    const double x2 = 2.0 * std::abs(g2);
    const int m_cut = x2 > 0.0 ? special::bessel_cutoff_order(x2) : 0;
    if (m_cut > ctl.max_index) {
        throw PhysicsError(ErrorKind::SeriesNotConverged,
                           "Bessel sum needs |m| up to " + std::to_string(m_cut));
    }
    const int p_abs = std::max(std::abs(p_lo), std::abs(p_hi));
    const special::BesselTable j1(x1, p_abs + 2 * m_cut + special::bessel_cutoff_order(x1));
    const special::BesselTable j2(x2, m_cut);
    const double phi1 = std::abs(g1) > 0.0 ? std::arg(g1) : 0.0;
    const cplx global = std::exp(-g_p_prime * static_cast<double>(2 * n + 1));
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(p_hi - p_lo + 1));
    for (int p = p_lo; p <= p_hi; ++p) {
        lcplx s{};
        for (int m = -m_cut; m <= m_cut; ++m) {
            const double w = j1(p - 2 * m) * j2(-m);
            if (w == 0.0) continue;
            s += make_term(std::log(std::abs(w)), w < 0.0, -m * delta_phi);
        }
        const cplx sd{static_cast<double>(s.real()), static_cast<double>(s.imag())};
        out.push_back(global * std::polar(1.0, p * phi1) * sd);
    }
    return out;
}

cplx compton_kernel(cplx g_p12, int n1, int n2, int k) {
    const int j1 = n1 - k;
    const int j2 = n2 + k;
    if (n1 < 0 || n2 < 0 || j1 < 0 || j2 < 0) return {};
    const double r = std::abs(g_p12);
    if (r == 0.0) return k == 0 ? cplx{1.0} : cplx{};
    // The alternating sum over m is a terminating hypergeometric series. It is
    // evaluated as the equivalent rotation matrix element
    // sin^a(2r) cos^b(2r) P_d^(a,b)(cos 4r) with a, b >= 0, whose upward
    // recurrence stays accurate where the direct sum cancels.
    const int total = n1 + n2;
    const int a = std::abs(k);
    const int b = std::abs(n1 - n2 - k);
    const int d = (total - std::max(std::abs(j1 - j2), std::abs(n1 - n2))) / 2;
    const long double half = 2.0L * static_cast<long double>(r);
    const long double sh = std::sin(half);
    const long double ch = std::cos(half);
    const long double p = jacobi(d, a, b, std::cos(2.0L * half));
    if (p == 0.0L || (a > 0 && sh == 0.0L) || (b > 0 && ch == 0.0L)) return {};
    const long double log_mag =
        0.5L * (lfact(total - d) - lfact(d + a) - lfact(total - 2 * d - a) - lfact(d + b) + lfact(d) +
                lfact(b)) +
        (a > 0 ? a * std::log(std::abs(sh)) : 0.0L) + (b > 0 ? b * std::log(std::abs(ch)) : 0.0L) +
        std::log(std::abs(p));
    const bool negative = (p < 0.0L) ^ (sh < 0.0L && odd(a)) ^ (ch < 0.0L && odd(b)) ^ (k < 0 && odd(k));
    const lcplx v = make_term(log_mag, negative, 0.0);
    return std::polar(1.0, -k * std::arg(g_p12)) * cplx{static_cast<double>(v.real()), static_cast<double>(v.imag())};
}

JointState compton_coefficients(cplx alpha1, cplx alpha2, cplx g_p12,
                                const TruncationConfig& trunc2, const SeriesControl& ctl) {
    ctl.validate();
    trunc2.validate();
    for (const cplx a : {alpha1, alpha2}) {
        const double tail = coherent_tail_weight(a, trunc2.n_max);
        if (tail > trunc2.leak_tol) {
            throw PhysicsError(ErrorKind::TailTooHeavy,
                               "coherent tail beyond n_max is " + format_double(tail));
        }
    }
    const int k_abs = std::max(-trunc2.k_min, trunc2.k_max);
    const int j_max = trunc2.n_max + k_abs;
    const auto a1 = coherent_amplitudes(alpha1, j_max);
    const auto a2 = coherent_amplitudes(alpha2, j_max);
    JointState out(trunc2, 2);
    for (int k = trunc2.k_min; k <= trunc2.k_max; ++k) {
        for (int n1 = 0; n1 <= trunc2.n_max; ++n1) {
            const int j1 = n1 - k;
            if (j1 < 0) continue;
            for (int n2 = 0; n2 <= trunc2.n_max; ++n2) {
                const int j2 = n2 + k;
                if (j2 < 0) continue;
                const cplx w = a1[j1] * a2[j2];
                if (w == cplx{}) continue;
                out.at(k, n1, n2) = w * compton_kernel(g_p12, n1, n2, k);
            }
        }
    }
    return out;
}

JointState analytic_vacuum_state(const CouplingSet& coupling, const SplitPrimes& primes,
                                 const TruncationConfig& trunc, const SeriesControl& ctl,
                                 SeriesStats* stats) {
    trunc.validate();
    JointState out(trunc, 1);
    const int p_max = std::min(trunc.n_max, -trunc.k_min);
    const auto c = vacuum_coefficients(coupling, primes.g_qu2_prime, p_max, ctl, stats);
    const cplx phase = std::exp(-primes.g_p_prime);
    for (int p = 0; p <= p_max; ++p) out.at(-p, p) = phase * c[p];
    return out;
}

JointState analytic_fock_state(const CouplingSet& coupling, const SplitPrimes& primes, int n,
                               const TruncationConfig& trunc, const SeriesControl& ctl,
                               SeriesStats* stats) {
    trunc.validate();
    if (n < 0 || n > trunc.n_max) {
        throw PhysicsError(ErrorKind::OutOfWindow, "input photon number outside the window");
    }
    JointState out(trunc, 1);
    const int p_lo = std::max(-n, -trunc.k_max);
    const int p_hi = std::min(trunc.n_max - n, -trunc.k_min);
    const auto c = coherent_coefficients(coupling, primes.g_qu2_prime, primes.g_p_prime, n, p_lo,
                                         p_hi, ctl, stats);
    for (int p = p_lo; p <= p_hi; ++p) out.at(-p, n + p) = c[p - p_lo];
    return out;
}

JointState analytic_coherent_state(const CouplingSet& coupling, const SplitPrimes& primes,
                                   cplx alpha, const TruncationConfig& trunc,
                                   const SeriesControl& ctl, SeriesStats* stats) {
    const JointState in = coherent_joint_state(trunc, alpha);
    JointState out(trunc, 1);
    out.set_deficit(in.deficit());
    for (int n = 0; n <= trunc.n_max; ++n) {
        const cplx w = in.at(0, n);
        if (std::abs(w) < 1e-300) continue;
        const int p_lo = std::max(-n, -trunc.k_max);
        const int p_hi = std::min(trunc.n_max - n, -trunc.k_min);
        const auto c = coherent_coefficients(coupling, primes.g_qu2_prime, primes.g_p_prime, n,
                                             p_lo, p_hi, ctl, stats);
        for (int p = p_lo; p <= p_hi; ++p) out.at(-p, n + p) += w * c[p - p_lo];
    }
    return out;
}

}  // namespace etp
