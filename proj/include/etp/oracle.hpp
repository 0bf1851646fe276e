#pragma once

// Brute-force scattering operators on the truncated joint space.
//
// Every term of the single-mode generator conserves k + n, and every term of
// the two-mode generator conserves n1 + n2 and k + n2, so the generator is
// held as one dense block per conserved sector. The electron operator b is a
// pure shift; amplitudes pushed past the window are dropped.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "etp/core_state.hpp"
#include "etp/coupling.hpp"

namespace etp {

class Generator {
public:
    struct Sector {
        std::vector<std::size_t> flat;  // basis states of the sector, in block order
        std::size_t block = 0;          // index into blocks()
    };

    Generator(const TruncationConfig& trunc, int mode_count, std::vector<Sector> sectors,
              std::vector<Eigen::MatrixXcd> blocks);

    const TruncationConfig& truncation() const noexcept { return trunc_; }
    int mode_count() const noexcept { return mode_count_; }
    std::size_t dimension() const noexcept { return trunc_.dimension(mode_count_); }
    std::span<const Sector> sectors() const noexcept { return sectors_; }
    std::span<const Eigen::MatrixXcd> blocks() const noexcept { return blocks_; }

    // out = G x.
    std::vector<cplx> apply(std::span<const cplx> x) const;

    // Full matrix; InvalidArgument above max_dimension.
    Eigen::MatrixXcd dense(std::size_t max_dimension = 4096) const;

    // max |G + G^+| over all entries.
    double antihermitian_defect() const;

private:
    TruncationConfig trunc_;
    int mode_count_;
    std::vector<Sector> sectors_;
    std::vector<Eigen::MatrixXcd> blocks_;
};

// g_qu b a^+ - g_qu* b^+ a + g2 b^+2 a^2 - g2* b^2 a^+2 - g_p (a a^+ + a^+ a).
// WindowTooNarrow unless k_max - k_min >= 2 (n_max + 2).
Generator build_single_mode_generator(cplx g_qu, cplx g_qu2, cplx g_p,
                                      const TruncationConfig& trunc);
Generator build_single_mode_generator(const CouplingSet& coupling, const TruncationConfig& trunc);

// -2 g b1^+ b2 a1 a2^+ + 2 g* b1 b2^+ a1^+ a2, with k counting net hbar(w2 - w1)
// quanta lost by the photons. WindowTooNarrow unless k_max - k_min >= 2 n_max.
Generator build_two_mode_generator(cplx g_p12, const TruncationConfig& trunc2);

struct Evolution {
    JointState state;
    double leakage = 0.0;  // probability within two steps of a window edge
};

// Probability in the two outermost layers of the window: n >= n_max - 1 in
// any mode, or k within one step of k_min or k_max.
double boundary_leakage(const JointState& state);

// exp(G) applied to the state. Throws LeakageExceeded when the output
// leakage exceeds trunc.leak_tol.
Evolution evolve(const Generator& gen, const JointState& state);

// D(g_qu) S(g2') R(g_p') applied to the state (R first). Leakage is the larger
// of the values after S and after D.
Evolution evolve_split(cplx g_qu, const SplitPrimes& primes, const JointState& state);

}  // namespace etp
