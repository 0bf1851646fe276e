#include "etp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <tuple>

#include "etp/errors.hpp"
#include "etp/format.hpp"
#include "etp/expm.hpp"

namespace etp {

Generator::Generator(const TruncationConfig& trunc, int mode_count, std::vector<Sector> sectors,
                     std::vector<Eigen::MatrixXcd> blocks)
    : trunc_(trunc), mode_count_(mode_count), sectors_(std::move(sectors)),
      blocks_(std::move(blocks)) {}

std::vector<cplx> Generator::apply(std::span<const cplx> x) const {
    if (x.size() != dimension()) {
        throw PhysicsError(ErrorKind::InvalidArgument, "vector size does not match generator");
    }
    std::vector<cplx> out(x.size());
    for (const Sector& s : sectors_) {
        const Eigen::MatrixXcd& b = blocks_[s.block];
        const auto d = static_cast<Eigen::Index>(s.flat.size());
        for (Eigen::Index i = 0; i < d; ++i) {
            cplx acc{};
            for (Eigen::Index j = 0; j < d; ++j) acc += b(i, j) * x[s.flat[j]];
            out[s.flat[i]] = acc;
        }
    }
    return out;
}

Eigen::MatrixXcd Generator::dense(std::size_t max_dimension) const {
    const std::size_t n = dimension();
    if (n > max_dimension) {
        throw PhysicsError(ErrorKind::InvalidArgument,
                           "dense generator of dimension " + std::to_string(n) + " refused");
    }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n),
                                                static_cast<Eigen::Index>(n));
    for (const Sector& s : sectors_) {
        const Eigen::MatrixXcd& b = blocks_[s.block];
        for (std::size_t i = 0; i < s.flat.size(); ++i) {
            for (std::size_t j = 0; j < s.flat.size(); ++j) {
                m(static_cast<Eigen::Index>(s.flat[i]), static_cast<Eigen::Index>(s.flat[j])) =
                    b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
        }
    }
    return m;
}

double Generator::antihermitian_defect() const {
    double worst = 0.0;
    for (const auto& b : blocks_) {
        worst = std::max(worst, (b + b.adjoint()).cwiseAbs().maxCoeff());
    }
    return worst;
}

namespace {

// Block of the single-mode generator over photon numbers [lo, hi].
Eigen::MatrixXcd single_mode_block(int lo, int hi, cplx g, cplx g2, cplx gp) {
    const int d = hi - lo + 1;
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(d, d);
    for (int n = lo; n <= hi; ++n) {
        const int j = n - lo;
        const double dn = n;
        b(j, j) = -gp * (2.0 * dn + 1.0);
        if (n + 1 <= hi) b(j + 1, j) += g * std::sqrt(dn + 1.0);
        if (n - 1 >= lo) b(j - 1, j) += -std::conj(g) * std::sqrt(dn);
        if (n - 2 >= lo) b(j - 2, j) += g2 * std::sqrt(dn * (dn - 1.0));
        if (n + 2 <= hi) b(j + 2, j) += -std::conj(g2) * std::sqrt((dn + 1.0) * (dn + 2.0));
    }
    return b;
}

// Block of the two-mode generator at total photon number N over n2 in [lo, hi].
Eigen::MatrixXcd two_mode_block(int N, int lo, int hi, cplx g) {
    const int d = hi - lo + 1;
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(d, d);
    for (int n2 = lo; n2 <= hi; ++n2) {
        const int j = n2 - lo;
        const double d1 = N - n2;
        const double d2 = n2;
        if (n2 + 1 <= hi) b(j + 1, j) += -2.0 * g * std::sqrt(d1 * (d2 + 1.0));
        if (n2 - 1 >= lo) b(j - 1, j) += 2.0 * std::conj(g) * std::sqrt((d1 + 1.0) * d2);
    }
    return b;
}

}  // namespace

Generator build_single_mode_generator(cplx g_qu, cplx g_qu2, cplx g_p,
                                      const TruncationConfig& trunc) {
    trunc.validate();
    if (trunc.k_max - trunc.k_min < 2 * (trunc.n_max + 2)) {
        throw PhysicsError(ErrorKind::WindowTooNarrow,
                           "k window must span at least 2(n_max + 2) = " +
                               std::to_string(2 * (trunc.n_max + 2)) + " steps");
    }
    const JointState layout(trunc, 1);
    std::vector<Generator::Sector> sectors;
    std::vector<Eigen::MatrixXcd> blocks;
    std::map<std::pair<int, int>, std::size_t> seen;
    for (int c = trunc.k_min; c <= trunc.k_max + trunc.n_max; ++c) {
        const int lo = std::max(0, c - trunc.k_max);
        const int hi = std::min(trunc.n_max, c - trunc.k_min);
        if (lo > hi) continue;
        Generator::Sector s;
        for (int n = lo; n <= hi; ++n) s.flat.push_back(layout.index(c - n, n));
        const auto key = std::make_pair(lo, hi);
        auto it = seen.find(key);
        if (it == seen.end()) {
            it = seen.emplace(key, blocks.size()).first;
            blocks.push_back(single_mode_block(lo, hi, g_qu, g_qu2, g_p));
        }
        s.block = it->second;
        sectors.push_back(std::move(s));
    }
    return Generator(trunc, 1, std::move(sectors), std::move(blocks));
}

Generator build_single_mode_generator(const CouplingSet& coupling, const TruncationConfig& trunc) {
    return build_single_mode_generator(coupling.g_qu, coupling.g_qu2, coupling.g_p, trunc);
}

Generator build_two_mode_generator(cplx g_p12, const TruncationConfig& trunc2) {
    trunc2.validate();
    if (trunc2.k_max - trunc2.k_min < 2 * trunc2.n_max) {
        throw PhysicsError(ErrorKind::WindowTooNarrow,
                           "k window must span at least 2 n_max = " +
                               std::to_string(2 * trunc2.n_max) + " steps");
    }
    const JointState layout(trunc2, 2);
    std::vector<Generator::Sector> sectors;
    std::vector<Eigen::MatrixXcd> blocks;
    std::map<std::tuple<int, int, int>, std::size_t> seen;
    for (int N = 0; N <= 2 * trunc2.n_max; ++N) {
        for (int c = trunc2.k_min; c <= trunc2.k_max + trunc2.n_max; ++c) {
            const int lo = std::max({0, N - trunc2.n_max, c - trunc2.k_max});
            const int hi = std::min({trunc2.n_max, N, c - trunc2.k_min});
            if (lo > hi) continue;
            Generator::Sector s;
            for (int n2 = lo; n2 <= hi; ++n2) s.flat.push_back(layout.index(c - n2, N - n2, n2));
            const auto key = std::make_tuple(N, lo, hi);
            auto it = seen.find(key);
            if (it == seen.end()) {
                it = seen.emplace(key, blocks.size()).first;
                blocks.push_back(two_mode_block(N, lo, hi, g_p12));
            }
            s.block = it->second;
            sectors.push_back(std::move(s));
        }
    }
    return Generator(trunc2, 2, std::move(sectors), std::move(blocks));
}

double boundary_leakage(const JointState& state) {
    const TruncationConfig& t = state.truncation();
    long double leak = 0.0L;
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const BasisIndex b = state.decode(i);
        const bool edge = b.k <= t.k_min + 1 || b.k >= t.k_max - 1 || b.n1 >= t.n_max - 1 ||
                          (state.mode_count() == 2 && b.n2 >= t.n_max - 1);
        if (edge) leak += std::norm(amps[i]);
    }
    return static_cast<double>(leak);
}

namespace {

JointState apply_exponential(const Generator& gen, const JointState& state) {
    if (state.mode_count() != gen.mode_count()) {
        throw PhysicsError(ErrorKind::WrongModeCount, "state and generator mode counts differ");
    }
    if (!(state.truncation() == gen.truncation())) {
        throw PhysicsError(ErrorKind::InvalidArgument, "state and generator windows differ");
    }
    std::vector<std::optional<Eigen::MatrixXcd>> exps(gen.blocks().size());
    JointState out(state.truncation(), state.mode_count());
    out.set_deficit(state.deficit());
    const auto in = state.amplitudes();
    auto dst = out.amplitudes();
    for (const auto& s : gen.sectors()) {
        const auto d = static_cast<Eigen::Index>(s.flat.size());
        Eigen::VectorXcd x(d);
        bool any = false;
        for (Eigen::Index j = 0; j < d; ++j) {
            x(j) = in[s.flat[j]];
            any = any || x(j) != cplx{};
        }
        if (!any) continue;
        auto& e = exps[s.block];
        if (!e) e = linalg::expm(gen.blocks()[s.block]);
        const Eigen::VectorXcd y = (*e) * x;
        for (Eigen::Index j = 0; j < d; ++j) dst[s.flat[j]] = y(j);
    }
    return out;
}

void check_leakage(double leak, const TruncationConfig& t) {
    if (leak > t.leak_tol) {
        throw PhysicsError(ErrorKind::LeakageExceeded,
                           "boundary probability " + format_double(leak) +
                               " exceeds leak_tol " + format_double(t.leak_tol) +
                               "; widen the window");
    }
}

}  // namespace

Evolution evolve(const Generator& gen, const JointState& state) {
    JointState out = apply_exponential(gen, state);
    const double leak = boundary_leakage(out);
    check_leakage(leak, out.truncation());
    return {std::move(out), leak};
}

Evolution evolve_split(cplx g_qu, const SplitPrimes& primes, const JointState& state) {
    if (state.mode_count() != 1) {
        throw PhysicsError(ErrorKind::WrongModeCount, "split operator acts on one mode");
    }
    const TruncationConfig& t = state.truncation();
    JointState phased = state;
    for (int k = t.k_min; k <= t.k_max; ++k) {
        for (int n = 0; n <= t.n_max; ++n) {
            phased.at(k, n) *= std::exp(-primes.g_p_prime * (2.0 * n + 1.0));
        }
    }
    const Generator squeeze = build_single_mode_generator(0.0, primes.g_qu2_prime, 0.0, t);
    JointState squeezed = apply_exponential(squeeze, phased);
    const double leak_s = boundary_leakage(squeezed);
    const Generator shift = build_single_mode_generator(g_qu, 0.0, 0.0, t);
    JointState out = apply_exponential(shift, squeezed);
    const double leak = std::max(leak_s, boundary_leakage(out));
    check_leakage(leak, t);
    return {std::move(out), leak};
}

}  // namespace etp
