#include "etp/format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace etp {

std::string format_double(double v) {
    if (v == 0.0) return "0";  // folds -0 so output does not depend on sign of zero
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

}  // namespace etp
