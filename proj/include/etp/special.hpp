#pragma once

#include <vector>

namespace etp::special {

// ln(n!) from a table built once (exact summation in long double), falling
// back to lgamma beyond the table.
double log_factorial(int n);

// J_0(x) .. J_{n_max}(x) for x >= 0 by Miller's downward recurrence,
// normalised with J_0 + 2 sum J_{2k} = 1. Absolute accuracy ~1e-14 for
// x <= 50.
std::vector<double> bessel_j_sequence(int n_max, double x);

double bessel_j(int n, double x);

// J_n(x) for n in [-half_width, half_width], negative orders through
// J_{-n} = (-1)^n J_n. Orders outside the table evaluate to zero, which is
// accurate when half_width is well beyond |x|.
class BesselTable {
public:
    BesselTable(double x, int half_width);

    double operator()(int n) const noexcept;
    int half_width() const noexcept { return half_width_; }
    double argument() const noexcept { return x_; }

private:
    double x_;
    int half_width_;
    std::vector<double> values_;  // J_0 .. J_half_width at |x|
    bool negative_arg_;
};

// Order beyond which |J_n(x)| < ~1e-17 for this argument.
int bessel_cutoff_order(double x);

}  // namespace etp::special
