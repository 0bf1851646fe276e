#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace etp {

enum class ErrorKind {
    InvalidArgument,
    OutOfWindow,
    TailTooHeavy,
    NonPositiveEnergy,
    EmptyProfile,
    InvalidProfile,
    Undersampled,
    GridMismatch,
    SeriesNotConverged,
    IndexDomain,
    WindowTooNarrow,
    LeakageExceeded,
    NotNormalized,
    WrongModeCount,
    NonPhysicalState,
};

std::string_view error_name(ErrorKind kind) noexcept;

// Raised by every physics-layer operation. The kind names the failure the
// way the module contracts do, so callers (and the CLI) can report it.
class PhysicsError : public std::runtime_error {
public:
    PhysicsError(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept { return error_name(kind_); }

private:
    ErrorKind kind_;
};

}  // namespace etp
