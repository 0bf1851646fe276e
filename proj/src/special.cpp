#include "etp/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "etp/errors.hpp"

namespace etp::special {

namespace {

constexpr int kFactorialTable = 4096;

const std::array<double, kFactorialTable>& factorial_table() {
    static const auto table = [] {
        std::array<double, kFactorialTable> t{};
        long double acc = 0.0L;
        t[0] = 0.0;
        for (int i = 1; i < kFactorialTable; ++i) {
            acc += std::log(static_cast<long double>(i));
            t[i] = static_cast<double>(acc);
        }
        return t;
    }();
    return table;
}

}  // namespace

double log_factorial(int n) {
    if (n < 0) {
        throw PhysicsError(ErrorKind::IndexDomain, "log_factorial of negative integer");
    }
    if (n < kFactorialTable) return factorial_table()[n];
    return std::lgamma(static_cast<double>(n) + 1.0);
}

int bessel_cutoff_order(double x) {
    const double ax = std::abs(x);
    return static_cast<int>(std::ceil(ax + 12.0 * std::cbrt(ax) + 20.0));
}

std::vector<double> bessel_j_sequence(int n_max, double x) {
    if (n_max < 0) {
        throw PhysicsError(ErrorKind::IndexDomain, "negative Bessel order count");
    }
    if (x < 0.0) {
        throw PhysicsError(ErrorKind::InvalidArgument, "bessel_j_sequence expects x >= 0");
    }
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }

    // Start well above both the requested order and the turning point.
    int start = std::max(n_max, bessel_cutoff_order(x)) + 16;
    start += start % 2;

    constexpr double kBig = 1e250;
    constexpr double kRescale = 1e-250;

    double j_next = 0.0;   // J_{m+1}
    double j_cur = 1e-300; // J_m (arbitrary seed)
    long double even_sum = 0.0L;
    for (int m = start; m > 0; --m) {
        const double j_prev = (2.0 * m / x) * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;  // now J_{m-1}
        if (std::abs(j_cur) > kBig) {
            j_cur *= kRescale;
            j_next *= kRescale;
            even_sum *= kRescale;
            for (auto& v : out) v *= kRescale;
        }
        const int order = m - 1;
        if (order <= n_max) out[order] = j_cur;
        if (order > 0 && order % 2 == 0) even_sum += j_cur;
    }
    const double norm = static_cast<double>(static_cast<long double>(j_cur) + 2.0L * even_sum);
    for (auto& v : out) v /= norm;
    return out;
}

double bessel_j(int n, double x) {
    const int an = std::abs(n);
    const double ax = std::abs(x);
    const double v = bessel_j_sequence(an, ax)[an];
    int sign = 1;
    if (n < 0 && (an % 2)) sign = -sign;
    if (x < 0.0 && (an % 2)) sign = -sign;
    return sign * v;
}

BesselTable::BesselTable(double x, int half_width)
    : x_(x), half_width_(half_width), negative_arg_(x < 0.0) {
    if (half_width < 0) {
        throw PhysicsError(ErrorKind::IndexDomain, "negative Bessel table width");
    }
    values_ = bessel_j_sequence(half_width, std::abs(x));
}

double BesselTable::operator()(int n) const noexcept {
    const int an = n < 0 ? -n : n;
    if (an > half_width_) return 0.0;
    double v = values_[static_cast<std::size_t>(an)];
    const bool odd = an % 2;
    if (odd && n < 0) v = -v;
    if (odd && negative_arg_) v = -v;
    return v;
}

}  // namespace etp::special
