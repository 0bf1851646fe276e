#include <doctest.h>

#include <cmath>

#include "etp/analytic.hpp"
#include "etp/constants.hpp"
#include "etp/errors.hpp"
#include "etp/observables.hpp"
#include "etp/oracle.hpp"
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

const TruncationConfig kWide{-128, 128, 120, 1e-8};

JointState split_state(double g1, double g2, double dphi) {
    const CouplingSet c = coupling_from_magnitudes(g1, g2, dphi - std::atan(2 * g2));
    return evolve_split(c.g_qu, phase_matched_primes(c.g_qu2), vacuum_joint_state(kWide)).state;
}

}  // namespace

TEST_CASE("product state has a rank-one reduced density") {
    const TruncationConfig t{-4, 4, 3, 1e-10};
    const JointState v = vacuum_joint_state(t);
    for (Subsystem s : {Subsystem::Electron, Subsystem::Photon}) {
        const DensityMatrix d = reduced_density(v, s);
        CHECK(trace(d) == 1.0);
        CHECK(purity(d) == 1.0);
        CHECK(von_neumann_entropy(d) == 0.0);
    }
    const CoincidenceTable table = coincidence_table(v);
    CHECK(table.at(0, 0) == 1.0);
    CHECK(table.total() == 1.0);
    CHECK(kind_of([&] { (void)table.at(4, 0); }) == ErrorKind::OutOfWindow);
}

TEST_CASE("maximally mixed density matrix") {
    DensityMatrix d;
    d.rho = Eigen::MatrixXcd::Identity(4, 4) / 4.0;
    CHECK(purity(d) == doctest::Approx(0.25));
    CHECK(von_neumann_entropy(d) == doctest::Approx(std::log(4.0)));
}

TEST_CASE("entropy of a non-diagonal density matrix uses its eigenvalues") {
    // Bell-like state (|0,1> + |1,0>)/sqrt 2 has ln 2 of entanglement.
    const TruncationConfig t{-2, 2, 1, 1e-10};
    JointState s(t, 1);
    s.at(0, 1) = 1.0 / std::sqrt(2.0);
    s.at(1, 0) = 1.0 / std::sqrt(2.0);
    CHECK(entanglement_entropy(s) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    DensityMatrix d;
    d.rho = Eigen::MatrixXcd(2, 2);
    d.rho << 0.5, 0.5, 0.5, 0.5;
    CHECK(von_neumann_entropy(d) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("negative eigenvalues are clipped or rejected") {
    DensityMatrix d;
    d.rho = Eigen::MatrixXcd::Zero(2, 2);
    d.rho(0, 0) = 1.0;
    d.rho(1, 1) = -5e-11;
    CHECK(von_neumann_entropy(d) == 0.0);
    d.rho(1, 1) = -1e-6;
    CHECK(kind_of([&] { (void)von_neumann_entropy(d); }) == ErrorKind::NonPhysicalState);
}

TEST_CASE("Poisson(1) spectrum carries 1.304 nats") {
    long double direct = 0.0L;
    for (int k = 0; k < 60; ++k) {
        const double p = testing::poisson(1.0, k);
        direct -= p * std::log(static_cast<long double>(p));
    }
    CHECK(static_cast<double>(direct) == doctest::Approx(1.304).epsilon(1e-3));
    const TruncationConfig t{-40, 40, 32, 1e-10};
    const JointState s = evolve(build_single_mode_generator(1.0, 0.0, 0.0, t), vacuum_joint_state(t)).state;
    const double via_state = von_neumann_entropy(reduced_density(s, Subsystem::Electron));
    CHECK(via_state == doctest::Approx(static_cast<double>(direct)).epsilon(1e-10));
}

TEST_CASE("electron and photon entropies agree for pure states") {
    const TruncationConfig t{-10, 10, 6, 0.99};
    auto g = testing::rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        JointState s(t, 1);
        for (cplx& a : s.amplitudes()) a = {testing::uniform(g, -1, 1), testing::uniform(g, -1, 1)};
        const double n = std::sqrt(s.norm_squared());
        for (cplx& a : s.amplitudes()) a /= n;
        const double se = von_neumann_entropy(reduced_density(s, Subsystem::Electron));
        const double sp = von_neumann_entropy(reduced_density(s, Subsystem::Photon));
        CHECK(std::abs(se - sp) < 1e-8);
        CHECK(trace(reduced_density(s, Subsystem::Photon)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    const JointState sq = split_state(0.8, 0.8, 0.0);
    CHECK(std::abs(von_neumann_entropy(reduced_density(sq, Subsystem::Electron)) -
                   von_neumann_entropy(reduced_density(sq, Subsystem::Photon))) < 1e-8);
}

TEST_CASE("purity of a vacuum-seeded run equals the sum of squared spectrum weights") {
    const JointState s = split_state(0.8, 0.8, 0.0);
    const auto pk = electron_spectrum(s);
    double sum = 0.0;
    for (double p : pk) sum += p * p;
    const DensityMatrix d = reduced_density(s, Subsystem::Electron);
    CHECK(purity(d) == doctest::Approx(sum).epsilon(1e-12));
    CHECK(purity(d) == doctest::Approx(0.193).epsilon(0.01 / 0.193));
    for (Eigen::Index i = 0; i < d.rho.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.rho.cols(); ++j) {
            if (i != j) CHECK(d.rho(i, j) == cplx{});
        }
    }
}

TEST_CASE("spectrum marginals agree with the coincidence table") {
    const JointState s = split_state(0.5, 0.2, 1.0);
    const CoincidenceTable table = coincidence_table(s);
    const auto pk = electron_spectrum(s);
    const auto pn = photon_number_distribution(s);
    for (std::size_t i = 0; i < pk.size(); ++i) CHECK(pk[i] == doctest::Approx(table.electron_marginal()[i]));
    for (std::size_t i = 0; i < pn.size(); ++i) CHECK(pn[i] == doctest::Approx(table.photon_marginal()[i]));
    CHECK(table.total() == doctest::Approx(1.0).epsilon(1e-9));
    for (int n = 0; n <= 20; ++n) {
        for (int k = -20; k <= 20; ++k) {
            if (n != -k) CHECK(table.at(n, k) == 0.0);
        }
    }
}

TEST_CASE("only even photon numbers are emitted without the linear coupling") {
    const JointState s = split_state(0.0, 0.1, 0.0);
    const CoincidenceTable table = coincidence_table(s);
    CHECK(table.at(0, 0) > 0.9);
    for (int n = 1; n <= 40; n += 2) CHECK(table.at(n, -n) < 1e-30);
    CHECK(table.at(2, -2) > 0.0);
}

TEST_CASE("entropy is symmetric about a relative phase of pi") {
    for (int i = 1; i <= 9; ++i) {
        const double phi = i * pi / 10.0;
        const double a = von_neumann_entropy(reduced_density(split_state(0.6, 0.5, phi), Subsystem::Electron));
        const double b = von_neumann_entropy(reduced_density(split_state(0.6, 0.5, 2 * pi - phi), Subsystem::Electron));
        CHECK(std::abs(a - b) < 1e-9);
    }
}

TEST_CASE("entropy grows with the linear coupling at strong squeezing") {
    double prev = -1.0;
    for (double g1 : {0.2, 0.4, 0.8, 1.2, 1.6}) {
        const double s = von_neumann_entropy(reduced_density(split_state(g1, 0.8, 0.0), Subsystem::Electron));
        CHECK(s > prev);
        prev = s;
    }
}

TEST_CASE("spectrum moments") {
    const SpectrumMoments m = spectrum_moments({0.25, 0.5, 0.25}, -1);
    CHECK(m.mean == doctest::Approx(0.0));
    CHECK(m.variance == doctest::Approx(0.5));
}

TEST_CASE("unnormalised states and wrong mode counts are rejected") {
    const TruncationConfig t{-4, 4, 3, 1e-10};
    JointState s = vacuum_joint_state(t);
    s.at(0, 0) = 0.9;
    CHECK(kind_of([&] { (void)coincidence_table(s); }) == ErrorKind::NotNormalized);
    CHECK(kind_of([&] { (void)reduced_density(s, Subsystem::Electron); }) == ErrorKind::NotNormalized);
    const JointState two = vacuum_joint_state(t, 2);
    CHECK(kind_of([&] { (void)coincidence_table(two); }) == ErrorKind::WrongModeCount);
    CHECK(kind_of([&] { (void)photon_number_distribution(two); }) == ErrorKind::WrongModeCount);
    CHECK(kind_of([&] { (void)photon_joint_distribution(vacuum_joint_state(t)); }) == ErrorKind::WrongModeCount);
}

TEST_CASE("joint photon distribution of independent coherent modes") {
    const TruncationConfig t{-40, 40, 40, 1e-10};
    const JointState s = coherent_joint_state(t, 3.0, 3.0);
    const JointPhotonTable table = photon_joint_distribution(s);
    for (int a = 0; a <= 25; ++a) {
        for (int b = 0; b <= 25; ++b) {
            CHECK(std::abs(table.at(a, b) - testing::poisson(9.0, a) * testing::poisson(9.0, b)) < 1e-12);
        }
    }
    CHECK(std::abs(table.correlation()) < 1e-9);
}

TEST_CASE("Compton scattering makes the joint photon distribution anti-correlated") {
    const TruncationConfig wide{-60, 60, 60, 1e-8};
    const JointState sym =
        evolve(build_two_mode_generator(0.5, wide), coherent_joint_state(wide, 3.0, 3.0)).state;
    const JointPhotonTable ts = photon_joint_distribution(sym);
    for (int a = 0; a <= 60; ++a) {
        for (int b = 0; b <= 60; ++b) CHECK(std::abs(ts.at(a, b) - ts.at(b, a)) < 1e-9);
    }
    CHECK(ts.correlation() < -0.1);

    const JointState asym =
        evolve(build_two_mode_generator(0.5, wide), coherent_joint_state(wide, 4.5, 2.0)).state;
    const JointPhotonTable ta = photon_joint_distribution(asym);
    double worst = 0.0;
    for (int a = 0; a <= 60; ++a) {
        for (int b = 0; b <= 60; ++b) worst = std::max(worst, std::abs(ta.at(a, b) - ta.at(b, a)));
    }
    CHECK(worst > 1e-3);
}
