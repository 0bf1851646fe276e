#include "etp/observables.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "etp/errors.hpp"
#include "etp/format.hpp"

namespace etp {

namespace {

using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> as_matrix(const JointState& s) {
    const auto amps = s.amplitudes();
    const auto rows = static_cast<Eigen::Index>(s.truncation().k_count());
    const auto cols = static_cast<Eigen::Index>(amps.size()) / rows;
    return {amps.data(), rows, cols};
}

void require_normalised(const JointState& s) {
    const double n = s.norm_squared();
    const double tol = std::max(1e-9, s.truncation().leak_tol);
    if (std::abs(n - 1.0) > tol) {
        throw PhysicsError(ErrorKind::NotNormalized,
                           "state norm^2 is " + format_double(n) + ", tolerance " +
                               format_double(tol));
    }
}

}  // namespace

CoincidenceTable::CoincidenceTable(int k_min, int k_max, int n_max, std::vector<double> p)
    : k_min_(k_min), k_max_(k_max), n_max_(n_max), p_(std::move(p)) {
    const int kc = k_max_ - k_min_ + 1;
    const int nc = n_max_ + 1;
    if (p_.size() != static_cast<std::size_t>(kc) * nc) {
        throw PhysicsError(ErrorKind::InvalidArgument, "coincidence table size mismatch");
    }
    p_k_.assign(kc, 0.0);
    p_n_.assign(nc, 0.0);
    long double total = 0.0L;
    for (int k = 0; k < kc; ++k) {
        for (int n = 0; n < nc; ++n) {
            const double v = p_[static_cast<std::size_t>(k) * nc + n];
            p_k_[k] += v;
            p_n_[n] += v;
            total += v;
        }
    }
    total_ = static_cast<double>(total);
}

double CoincidenceTable::at(int n, int k) const {
    if (k < k_min_ || k > k_max_ || n < 0 || n > n_max_) {
        throw PhysicsError(ErrorKind::OutOfWindow,
                           "(n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
    }
    return p_[static_cast<std::size_t>(k - k_min_) * (n_max_ + 1) + n];
}

CoincidenceTable coincidence_table(const JointState& state) {
    if (state.mode_count() != 1) {
        throw PhysicsError(ErrorKind::WrongModeCount, "coincidence table needs one mode");
    }
    require_normalised(state);
    std::vector<double> p;
    p.reserve(state.size());
    for (const cplx& a : state.amplitudes()) p.push_back(std::norm(a));
    const auto& t = state.truncation();
    return {t.k_min, t.k_max, t.n_max, std::move(p)};
}

std::vector<double> electron_spectrum(const JointState& state) {
    const auto m = as_matrix(state);
    std::vector<double> p(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index k = 0; k < m.rows(); ++k) p[k] = m.row(k).squaredNorm();
    return p;
}

std::vector<double> photon_number_distribution(const JointState& state) {
    if (state.mode_count() != 1) {
        throw PhysicsError(ErrorKind::WrongModeCount, "photon-number distribution needs one mode");
    }
    const auto m = as_matrix(state);
    std::vector<double> p(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index n = 0; n < m.cols(); ++n) p[n] = m.col(n).squaredNorm();
    return p;
}

SpectrumMoments spectrum_moments(const std::vector<double>& p, int first_index) {
    long double w = 0.0L, s1 = 0.0L, s2 = 0.0L;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const long double x = static_cast<long double>(first_index) + i;
        w += p[i];
        s1 += p[i] * x;
        s2 += p[i] * x * x;
    }
    SpectrumMoments m;
    if (w <= 0.0L) return m;
    const long double mean = s1 / w;
    m.mean = static_cast<double>(mean);
    m.variance = static_cast<double>(s2 / w - mean * mean);
    return m;
}

DensityMatrix reduced_density(const JointState& state, Subsystem keep) {
    require_normalised(state);
    const auto m = as_matrix(state);
    DensityMatrix d;
    if (keep == Subsystem::Electron) {
        d.rho = m * m.adjoint();
        d.first_index = state.truncation().k_min;
    } else {
        d.rho = m.transpose() * m.conjugate();
        d.first_index = 0;
    }
    return d;
}

double trace(const DensityMatrix& d) { return d.rho.trace().real(); }

double purity(const DensityMatrix& d) {
    const double tr = trace(d);
    return d.rho.squaredNorm() / (tr * tr);
}

namespace {

double entropy_of(const Eigen::VectorXd& eig) {
    long double s = 0.0L;
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
        double l = eig(i);
        if (l < 0.0) {
            if (l < -1e-10) {
                throw PhysicsError(ErrorKind::NonPhysicalState,
                                   "density matrix eigenvalue " + format_double(l));
            }
            l = 0.0;
        }
        if (l > 0.0) s -= static_cast<long double>(l) * std::log(static_cast<long double>(l));
    }
    return static_cast<double>(s);
}

bool is_diagonal(const Eigen::MatrixXcd& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (i != j && m(i, j) != cplx{}) return false;
        }
    }
    return true;
}

}  // namespace

double von_neumann_entropy(const DensityMatrix& d) {
    if (is_diagonal(d.rho)) return entropy_of(d.rho.diagonal().real());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(d.rho, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw PhysicsError(ErrorKind::NonPhysicalState, "eigen-decomposition failed");
    }
    return entropy_of(solver.eigenvalues());
}

double entanglement_entropy(const JointState& state) {
    const auto m = as_matrix(state);
    const Subsystem keep = m.rows() <= m.cols() ? Subsystem::Electron : Subsystem::Photon;
    return von_neumann_entropy(reduced_density(state, keep));
}

JointPhotonTable::JointPhotonTable(int n_max, std::vector<double> p)
    : n_max_(n_max), p_(std::move(p)) {
    if (p_.size() != static_cast<std::size_t>(n_max_ + 1) * (n_max_ + 1)) {
        throw PhysicsError(ErrorKind::InvalidArgument, "joint photon table size mismatch");
    }
}

double JointPhotonTable::at(int n1, int n2) const {
    if (n1 < 0 || n2 < 0 || n1 > n_max_ || n2 > n_max_) {
        throw PhysicsError(ErrorKind::OutOfWindow,
                           "(n1=" + std::to_string(n1) + ", n2=" + std::to_string(n2) + ")");
    }
    return p_[static_cast<std::size_t>(n1) * (n_max_ + 1) + n2];
}

double JointPhotonTable::correlation() const {
    long double w = 0, m1 = 0, m2 = 0, s11 = 0, s22 = 0, s12 = 0;
    for (int a = 0; a <= n_max_; ++a) {
        for (int b = 0; b <= n_max_; ++b) {
            const long double p = at(a, b);
            w += p;
            m1 += p * a;
            m2 += p * b;
            s11 += p * a * a;
            s22 += p * b * b;
            s12 += p * a * b;
        }
    }
    m1 /= w;
    m2 /= w;
    const long double v1 = s11 / w - m1 * m1;
    const long double v2 = s22 / w - m2 * m2;
    const long double c = s12 / w - m1 * m2;
    return static_cast<double>(c / std::sqrt(v1 * v2));
}

JointPhotonTable photon_joint_distribution(const JointState& state) {
    if (state.mode_count() != 2) {
        throw PhysicsError(ErrorKind::WrongModeCount, "joint photon distribution needs two modes");
    }
    const auto m = as_matrix(state);
    std::vector<double> p(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) p[j] = m.col(j).squaredNorm();
    return {state.truncation().n_max, std::move(p)};
}

}  // namespace etp
