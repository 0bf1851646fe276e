#include "etp/expm.hpp"

#include <cmath>

#include <Eigen/LU>

#include "etp/errors.hpp"

namespace etp::linalg {

namespace {

// [13/13] Pade coefficients for exp.
constexpr double kPade13[14] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

constexpr double kScaledNormTarget = 0.5;

}  // namespace

Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a, ExpmInfo* info) {
    if (a.rows() != a.cols()) {
        throw PhysicsError(ErrorKind::InvalidArgument, "expm of a non-square matrix");
    }
    const Eigen::Index n = a.rows();
    if (n == 0) return a;

    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    if (!std::isfinite(norm1)) {
        throw PhysicsError(ErrorKind::InvalidArgument, "expm of a non-finite matrix");
    }
    int s = 0;
    if (norm1 > kScaledNormTarget) {
        s = static_cast<int>(std::ceil(std::log2(norm1 / kScaledNormTarget)));
    }
    if (info) {
        info->norm1 = norm1;
        info->squarings = s;
    }

    const Eigen::MatrixXcd as = a / std::ldexp(1.0, s);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd a2 = as * as;
    const Eigen::MatrixXcd a4 = a2 * a2;
    const Eigen::MatrixXcd a6 = a4 * a2;
    const auto& b = kPade13;

    Eigen::MatrixXcd inner_u = b[13] * a6 + b[11] * a4 + b[9] * a2;
    Eigen::MatrixXcd u = a6 * inner_u;
    u += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
    u = as * u;

    Eigen::MatrixXcd inner_v = b[12] * a6 + b[10] * a4 + b[8] * a2;
    Eigen::MatrixXcd v = a6 * inner_v;
    v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;

    Eigen::MatrixXcd r = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < s; ++i) r = r * r;
    return r;
}

}  // namespace etp::linalg
