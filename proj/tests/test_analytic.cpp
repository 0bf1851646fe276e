#include <doctest.h>

#include <cmath>

#include "etp/analytic.hpp"
#include "etp/constants.hpp"
#include "etp/errors.hpp"
#include "etp/oracle.hpp"
#include "etp/special.hpp"
#include "test_common.hpp"

using namespace etp;
using constants::pi;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const PhysicsError& e) {
        return e.kind();
    }
    FAIL("expected a PhysicsError");
    return ErrorKind::InvalidArgument;
}

// Squeezed-vacuum photon statistics for the squeeze exp(z a^+2 - z* a^2), |z| = r.
double squeezed_probability(double r, int p) {
    if (p % 2) return 0.0;
    const int m = p / 2;
    const double t = std::tanh(2.0 * r);
    return std::exp(std::lgamma(p + 1.0) - 2.0 * std::lgamma(m + 1.0) - p * std::log(2.0)) *
           std::pow(t, p) / std::cosh(2.0 * r);
}

double total(const std::vector<cplx>& c) {
    long double s = 0.0L;
    for (const cplx& a : c) s += std::norm(a);
    return static_cast<double>(s);
}

}  // namespace

TEST_CASE("no coupling scatters nothing") {
    const CouplingSet c = assemble_coupling_set(0.0, 0.0, false);
    const auto v = vacuum_coefficients(c, 0.0, 6);
    CHECK(v[0] == cplx{1.0, 0.0});
    for (int p = 1; p <= 6; ++p) CHECK(v[p] == cplx{});
    for (int n : {0, 1, 4}) {
        const auto co = coherent_coefficients(c, 0.0, 0.0, n, -n, 5);
        for (int p = -n; p <= 5; ++p) CHECK(co[p + n] == (p == 0 ? cplx{1.0, 0.0} : cplx{}));
    }
}

TEST_CASE("pure squeezing reproduces squeezed-vacuum statistics") {
    const CouplingSet c = assemble_coupling_set(0.0, 0.0, false);
    for (double r : {0.099, 0.3, 0.6}) {
        for (double phase : {0.0, 1.1}) {
            const auto v = vacuum_coefficients(c, std::polar(r, phase), 40);
            for (int p = 0; p <= 40; ++p) {
                CHECK(std::abs(std::norm(v[p]) - squeezed_probability(r, p)) < 1e-13);
            }
        }
    }
    const auto v = vacuum_coefficients(c, 0.099, 4);
    CHECK(std::norm(v[2]) == doctest::Approx(0.0187).epsilon(0.01));
}

TEST_CASE("displacement alone gives the Poisson limit") {
    for (double g : {0.3, 1.0, 2.0}) {
        const CouplingSet c = assemble_coupling_set(std::polar(g, 0.7), 0.0, false);
        const auto v = vacuum_coefficients(c, 0.0, 30);
        for (int p = 0; p <= 30; ++p) {
            const double expected = testing::poisson(g * g, p);
            CHECK(std::abs(std::norm(v[p]) - expected) <= 1e-12 * expected + 1e-300);
        }
    }
}

TEST_CASE("vacuum coefficients are normalised") {
    auto g = testing::rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const CouplingSet c = coupling_from_magnitudes(testing::uniform(g, 0, 1.2), 0.0, 0.0,
                                                       testing::uniform(g, 0, 2 * pi));
        const cplx g2p = std::polar(testing::uniform(g, 0, 0.5), testing::uniform(g, 0, 2 * pi));
        CHECK(std::abs(total(vacuum_coefficients(c, g2p, 160)) - 1.0) < 1e-9);
    }
}

TEST_CASE("only even photon numbers without the linear coupling") {
    const CouplingSet c = assemble_coupling_set(0.0, std::polar(0.7, 0.4), true);
    const auto v = vacuum_coefficients(c, c.g_qu2, 41);
    for (int p = 1; p <= 41; p += 2) CHECK(std::abs(v[p]) < 1e-15);
}

TEST_CASE("photon statistics ignore the relative phase in the degenerate limits") {
    std::vector<double> ref_g2, ref_g1;
    for (int i = 0; i < 9; ++i) {
        const double phase = 2 * pi * i / 9.0;
        const CouplingSet a = assemble_coupling_set(0.0, std::polar(0.5, phase), true);
        const CouplingSet b = assemble_coupling_set(std::polar(0.9, phase / 2), 0.0, true);
        const auto va = vacuum_coefficients(a, a.g_qu2, 30);
        const auto vb = vacuum_coefficients(b, 0.0, 30);
        for (int p = 0; p <= 30; ++p) {
            if (i == 0) {
                ref_g2.push_back(std::norm(va[p]));
                ref_g1.push_back(std::norm(vb[p]));
            } else {
                CHECK(std::abs(std::norm(va[p]) - ref_g2[p]) < 1e-14);
                CHECK(std::abs(std::norm(vb[p]) - ref_g1[p]) < 1e-14);
            }
        }
    }
}

TEST_CASE("coherent coefficients reduce to vacuum coefficients at n = 0") {
    const CouplingSet c = coupling_from_magnitudes(0.6, 0.4, 1.3, 0.2);
    const SplitPrimes pm = phase_matched_primes(c.g_qu2);
    const auto v = vacuum_coefficients(c, pm.g_qu2_prime, 30);
    const auto co = coherent_coefficients(c, pm.g_qu2_prime, pm.g_p_prime, 0, 0, 30);
    const cplx phase = std::exp(-pm.g_p_prime);
    for (int p = 0; p <= 30; ++p) CHECK(std::abs(co[p] - phase * v[p]) < 1e-14);
}

TEST_CASE("coherent coefficients reject photon losses beyond the input") {
    const CouplingSet c = coupling_from_magnitudes(0.3, 0.1, 0.0);
    CHECK(kind_of([&] { (void)coherent_coefficients(c, c.g_qu2, c.g_p, 2, -3, 3); }) ==
          ErrorKind::IndexDomain);
}

TEST_CASE("a purely imaginary photon-number phase cancels from probabilities") {
    const CouplingSet c = coupling_from_magnitudes(0.5, 0.3, 0.8);
    const auto a = coherent_coefficients(c, c.g_qu2, {0.0, 0.0}, 3, -3, 20);
    const auto b = coherent_coefficients(c, c.g_qu2, {0.0, 0.77}, 3, -3, 20);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(std::norm(a[i]) - std::norm(b[i])) < 1e-15);
}

TEST_CASE("Fock-input series match the oracle at small couplings") {
    auto g = testing::rng(41);
    const TruncationConfig t{-68, 68, 60, 1e-10};
    for (int trial = 0; trial < 20; ++trial) {
        const CouplingSet c = coupling_from_magnitudes(testing::uniform(g, 0, 0.3), testing::uniform(g, 0, 0.15),
                                                       testing::uniform(g, 0, 2 * pi), testing::uniform(g, 0, 2 * pi));
        const SplitPrimes primes = identity_primes(c);
        const int n = trial % 7;
        const JointState oracle = evolve_split(c.g_qu, primes, fock_joint_state(t, n)).state;
        const auto co = coherent_coefficients(c, primes.g_qu2_prime, primes.g_p_prime, n, -n, 24);
        for (int p = -n; p <= 24; ++p) {
            const cplx o = oracle.at(-p, n + p);
            const cplx a = co[p + n];
            if (std::abs(o) > 1e-6) {
                CHECK(std::abs(a - o) <= 1e-6 * std::abs(o));
            } else {
                CHECK(std::abs(a - o) < 1e-12);
            }
        }
    }
}

TEST_CASE("series match the oracle across the full coupling range") {
    auto g = testing::rng(8);
    const TruncationConfig t{-168, 168, 160, 1e-6};
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const CouplingSet c = coupling_from_magnitudes(testing::uniform(g, 0, 0.8), testing::uniform(g, 0, 0.8),
                                                       testing::uniform(g, 0, 2 * pi));
        const SplitPrimes pm = phase_matched_primes(c.g_qu2);
        const JointState in = trial % 2 ? fock_joint_state(t, 3) : vacuum_joint_state(t);
        const JointState oracle = evolve_split(c.g_qu, pm, in).state;
        const JointState series = trial % 2 ? analytic_fock_state(c, pm, 3, t) : analytic_vacuum_state(c, pm, t);
        worst = std::max(worst, testing::max_probability_gap(oracle, series));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("strong-field limit degenerates to single Bessel functions") {
    const cplx g1 = std::polar(1.3, 0.4);
    const auto a = strong_field_coefficients(g1, 0.0, 0.0, 0.0, 10, -10, 10);
    for (int p = -10; p <= 10; ++p) {
        const cplx expected = std::polar(1.0, p * 0.4) * special::bessel_j(std::abs(p), 2.6) *
                              ((p < 0 && (-p) % 2) ? -1.0 : 1.0);
        CHECK(std::abs(a[p + 10] - expected) < 1e-14);
    }
    const cplx g2 = std::polar(0.9, 1.1);
    const cplx gpp{0.0, 0.3};
    const int n = 10;
    const auto b = strong_field_coefficients(0.0, g2, std::arg(g2), gpp, n, -10, 10);
    for (int p = -10; p <= 10; ++p) {
        if (p % 2) {
            CHECK(std::abs(b[p + 10]) < 1e-15);
            continue;
        }
        const int order = -p / 2;
        const double j = special::bessel_j(std::abs(order), 1.8) * ((order < 0 && (-order) % 2) ? -1.0 : 1.0);
        const cplx expected = std::exp(-gpp * (2.0 * n + 1.0)) * std::polar(1.0, -p * 1.1 / 2.0) * j;
        CHECK(std::abs(b[p + 10] - expected) < 1e-14);
    }
}

TEST_CASE("strong-field coefficients are unitary") {
    auto g = testing::rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const cplx g1 = std::polar(testing::uniform(g, 0, 3), testing::uniform(g, 0, 2 * pi));
        const cplx g2 = std::polar(testing::uniform(g, 0, 2), testing::uniform(g, 0, 2 * pi));
        const auto c = strong_field_coefficients(g1, g2, testing::uniform(g, 0, 2 * pi), {0.0, 0.2}, 50, -60, 60);
        CHECK(std::abs(total(c) - 1.0) < 1e-12);
    }
}

TEST_CASE("strong-field limit approaches the coherent series as the photon number grows") {
    const double a1 = 0.8, a2 = 0.4;
    double prev = 1e300;
    for (int nbar : {25, 100}) {
        const double s = std::sqrt(static_cast<double>(nbar));
        const CouplingSet c = assemble_coupling_set(a1 / s, a2 / nbar, false);
        const auto exact = coherent_coefficients(c, c.g_qu2, 0.0, nbar, -20, 20);
        const auto limit = strong_field_coefficients(a1, a2, relative_phase(c.g_qu, c.g_qu2), 0.0, nbar, -20, 20);
        double worst = 0.0;
        for (std::size_t i = 0; i < exact.size(); ++i) {
            worst = std::max(worst, std::abs(std::norm(exact[i]) - std::norm(limit[i])));
        }
        CHECK(worst < prev);
        prev = worst;
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("Compton kernel without coupling is the identity") {
    CHECK(compton_kernel(0.0, 3, 4, 0) == cplx{1.0, 0.0});
    CHECK(compton_kernel(0.0, 3, 4, 1) == cplx{});
    CHECK(compton_kernel(0.3, -1, 2, 0) == cplx{});
}

TEST_CASE("Compton kernel matches the two-mode oracle") {
    const TruncationConfig t{-12, 12, 12, 1e-6};
    for (cplx gp : {cplx{0.2, 0.0}, std::polar(0.45, 0.9)}) {
        for (auto [n1, n2] : {std::pair{3, 0}, std::pair{4, 5}, std::pair{6, 2}}) {
            JointState in(t, 2);
            in.at(0, n1, n2) = 1.0;
            const Generator gen = build_two_mode_generator(gp, t);
            const JointState out = evolve(gen, in).state;
            for (int k = -n1; k <= n2; ++k) {
                CHECK(std::abs(compton_kernel(gp, n1 + k, n2 - k, k) - out.at(k, n1 + k, n2 - k)) < 1e-12);
            }
        }
    }
}

TEST_CASE("Compton coefficients without coupling are a product of Poisson weights") {
    const TruncationConfig t{-30, 30, 30, 1e-10};
    const JointState c = compton_coefficients(2.0, cplx{0.0, 1.2}, 0.0, t);
    for (int a = 0; a <= 12; ++a) {
        for (int b = 0; b <= 12; ++b) {
            CHECK(std::abs(std::norm(c.at(0, a, b)) - testing::poisson(4.0, a) * testing::poisson(1.44, b)) < 1e-14);
            CHECK(c.at(1, a, b) == cplx{});
        }
    }
}

TEST_CASE("Compton coefficients reject heavy input tails") {
    const TruncationConfig t{-5, 5, 5, 1e-10};
    CHECK(kind_of([&] { (void)compton_coefficients(3.0, 1.0, 0.1, t); }) == ErrorKind::TailTooHeavy);
}

TEST_CASE("series control is validated and convergence failures are reported") {
    SeriesControl bad;
    bad.term_tol = 0.0;
    CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::InvalidArgument);
    bad = {};
    bad.max_index = 5;
    CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::InvalidArgument);
    SeriesControl tight;
    tight.max_index = 10;
    const CouplingSet c = coupling_from_magnitudes(2.0, 0.0, 0.0);
    CHECK(kind_of([&] { (void)vacuum_coefficients(c, 0.0, 5, tight); }) == ErrorKind::SeriesNotConverged);
}

TEST_CASE("series report cancellation instead of returning inaccurate amplitudes") {
    const CouplingSet c = coupling_from_magnitudes(2.0, 0.8, -std::atan(1.6));
    const SplitPrimes pm = phase_matched_primes(c.g_qu2);
    CHECK(kind_of([&] { (void)vacuum_coefficients(c, pm.g_qu2_prime, 120); }) == ErrorKind::SeriesNotConverged);
    CHECK(kind_of([&] { (void)coherent_coefficients(c, pm.g_qu2_prime, pm.g_p_prime, 2, -2, 120); }) ==
          ErrorKind::SeriesNotConverged);

    const CouplingSet moderate = coupling_from_magnitudes(1.4, 0.8, -std::atan(1.6));
    const TruncationConfig t{-208, 208, 200, 1e-6};
    const SplitPrimes mp = phase_matched_primes(moderate.g_qu2);
    const JointState series = analytic_vacuum_state(moderate, mp, t);
    const JointState oracle = evolve_split(moderate.g_qu, mp, vacuum_joint_state(t)).state;
    CHECK(testing::max_probability_gap(series, oracle) < 1e-9);
}

TEST_CASE("Compton kernel stays accurate at large photon numbers") {
    for (double g : {0.5, 0.9}) {
        const TruncationConfig t{-60, 60, 60, 1e-6};
        const JointState oracle =
            evolve(build_two_mode_generator(g, t), coherent_joint_state(t, 3.0, cplx{0.0, 3.0})).state;
        const JointState series = compton_coefficients(3.0, cplx{0.0, 3.0}, g, t);
        CHECK(testing::max_probability_gap(series, oracle) < 1e-12);
        CHECK(std::abs(series.norm_squared() - 1.0) < 1e-10);
    }
    for (int n = 30; n <= 120; n += 30) {
        double sum = 0.0;
        for (int k = -n; k <= n; ++k) sum += std::norm(compton_kernel(0.9, n, n, k));
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}
