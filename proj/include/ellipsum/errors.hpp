#pragma once

#include <stdexcept>
#include <string>

namespace ellipsum {

enum class ErrorCode {
    NotSymmetric,
    NotPositiveDefinite,
    DimensionZero,
    DimensionTooLarge,
    DimensionMismatch,
    BadToken,
    BadMatrix,
    SearchSpaceTooLarge,
    BudgetExceeded,
    RadiusOutOfRange,
    NonpositiveEps,
    CheckpointOutOfRange,
    TruncationExceedsSeries,
    SupportExceedsRadii,
    PhiUnsupportedForProfile,
    TruncationTooSmall,
    IndexOutOfRange,
    CorruptCache,
    InvalidArgument,
    Io,
};

const char* error_code_name(ErrorCode code) noexcept;

/// Single exception type for the library; the code drives CLI exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionZero: return "DimensionZero";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadToken: return "BadToken";
    case ErrorCode::BadMatrix: return "BadMatrix";
    case ErrorCode::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::RadiusOutOfRange: return "RadiusOutOfRange";
    case ErrorCode::NonpositiveEps: return "NonpositiveEps";
    case ErrorCode::CheckpointOutOfRange: return "CheckpointOutOfRange";
    case ErrorCode::TruncationExceedsSeries: return "TruncationExceedsSeries";
    case ErrorCode::SupportExceedsRadii: return "SupportExceedsRadii";
    case ErrorCode::PhiUnsupportedForProfile: return "PhiUnsupportedForProfile";
    case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::CorruptCache: return "CorruptCache";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

} // namespace ellipsum
