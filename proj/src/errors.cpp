#include "etp/errors.hpp"

namespace etp {

std::string_view error_name(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::OutOfWindow: return "OutOfWindow";
        case ErrorKind::TailTooHeavy: return "TailTooHeavy";
        case ErrorKind::NonPositiveEnergy: return "NonPositiveEnergy";
        case ErrorKind::EmptyProfile: return "EmptyProfile";
        case ErrorKind::InvalidProfile: return "InvalidProfile";
        case ErrorKind::Undersampled: return "Undersampled";
        case ErrorKind::GridMismatch: return "GridMismatch";
        case ErrorKind::SeriesNotConverged: return "SeriesNotConverged";
        case ErrorKind::IndexDomain: return "IndexDomain";
        case ErrorKind::WindowTooNarrow: return "WindowTooNarrow";
        case ErrorKind::LeakageExceeded: return "LeakageExceeded";
        case ErrorKind::NotNormalized: return "NotNormalized";
        case ErrorKind::WrongModeCount: return "WrongModeCount";
        case ErrorKind::NonPhysicalState: return "NonPhysicalState";
    }
    return "Unknown";
}

}  // namespace etp
