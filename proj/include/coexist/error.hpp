#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coexist {

enum class ErrorCode {
    DimensionMismatch,
    NotHermitian,
    NotUnitary,
    ImaginaryResidue,
    NotNormalized,
    InvalidCycle,
    IndexOutOfRange,
    NoIntersection,
    EmptyGrid,
    Usage,
    Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NotHermitian: return "NotHermitian";
        case ErrorCode::NotUnitary: return "NotUnitary";
        case ErrorCode::ImaginaryResidue: return "ImaginaryResidue";
        case ErrorCode::NotNormalized: return "NotNormalized";
        case ErrorCode::InvalidCycle: return "InvalidCycle";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::NoIntersection: return "NoIntersection";
        case ErrorCode::EmptyGrid: return "EmptyGrid";
        case ErrorCode::Usage: return "UsageError";
        case ErrorCode::Io: return "IoError";
    }
    return "Unknown";
}

/// Every failure in the library surfaces as this exception type; `code()`
/// identifies the contract that was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace coexist
