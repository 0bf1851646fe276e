#pragma once

#include <Eigen/Dense>

namespace etp::linalg {

struct ExpmInfo {
    double norm1 = 0.0;  // ||A||_1 before scaling
    int squarings = 0;
};

// exp(A) by scaling and squaring with a [13/13] Pade kernel. The scaling
// count s is the smallest with ||A||_1 / 2^s <= 0.5.
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a, ExpmInfo* info = nullptr);

}  // namespace etp::linalg
