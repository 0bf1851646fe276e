#pragma once

// Measurable quantities of joint electron-photon states.

#include <vector>

#include <Eigen/Dense>

#include "etp/core_state.hpp"

namespace etp {

// Single-mode coincidence probabilities P_nk = |c_nk|^2 with both marginals.
class CoincidenceTable {
public:
    CoincidenceTable(int k_min, int k_max, int n_max, std::vector<double> p);

    int k_min() const noexcept { return k_min_; }
    int k_max() const noexcept { return k_max_; }
    int n_max() const noexcept { return n_max_; }

    double at(int n, int k) const;  // OutOfWindow outside the table
    const std::vector<double>& electron_marginal() const noexcept { return p_k_; }  // k_min..k_max
    const std::vector<double>& photon_marginal() const noexcept { return p_n_; }    // 0..n_max
    double total() const noexcept { return total_; }

private:
    int k_min_, k_max_, n_max_;
    std::vector<double> p_;  // [(k - k_min) * (n_max + 1) + n]
    std::vector<double> p_k_, p_n_;
    double total_ = 0.0;
};

// NotNormalized unless |norm - 1| <= max(1e-9, leak_tol); WrongModeCount for
// two-mode states.
CoincidenceTable coincidence_table(const JointState& state);

// P_k for k in [k_min, k_max], summed over all photon indices (either mode count).
std::vector<double> electron_spectrum(const JointState& state);

// Single-mode photon-number distribution P_n, n in [0, n_max].
std::vector<double> photon_number_distribution(const JointState& state);

struct SpectrumMoments {
    double mean = 0.0;
    double variance = 0.0;
};
SpectrumMoments spectrum_moments(const std::vector<double>& p, int first_index);

enum class Subsystem { Electron, Photon };

struct DensityMatrix {
    Eigen::MatrixXcd rho;
    int first_index = 0;  // ladder index of row 0 (k_min for the electron, 0 for photons)
};

// Partial trace of |psi><psi|. For two-mode states the photon subsystem is the
// joint (n1, n2) space with row n1 * (n_max + 1) + n2.
DensityMatrix reduced_density(const JointState& state, Subsystem keep);

double trace(const DensityMatrix& d);
double purity(const DensityMatrix& d);  // Tr(rho^2) / (Tr rho)^2

// -sum lambda ln lambda in nats. Eigenvalues in [-1e-10, 0) count as zero;
// anything more negative throws NonPhysicalState.
double von_neumann_entropy(const DensityMatrix& d);

// Entropy of the smaller reduced density matrix of a pure joint state.
double entanglement_entropy(const JointState& state);

// P(n1, n2) = sum_k |c_{n1 n2 k}|^2; WrongModeCount for single-mode states.
class JointPhotonTable {
public:
    JointPhotonTable(int n_max, std::vector<double> p);

    int n_max() const noexcept { return n_max_; }
    double at(int n1, int n2) const;
    const std::vector<double>& values() const noexcept { return p_; }

    // Pearson correlation of n1 and n2 under P.
    double correlation() const;

private:
    int n_max_;
    std::vector<double> p_;  // [n1 * (n_max + 1) + n2]
};

JointPhotonTable photon_joint_distribution(const JointState& state);

}  // namespace etp
