#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slopewatch {

enum class ErrorCode {
    IrregularSampling,
    NonFinite,
    TooShort,
    InvalidWindow,
    LagOutOfRange,
    LengthMismatch,
    IndexOutOfRange,
    SpecMismatch,
    EmptyInput,
    DegenerateInput,
    KTooLarge,
    NoCandidateQualifies,
    NoPostBaselineWindows,
    DomainError,
    InvalidConfig,
    TooLarge,
    SchemaError,
    MixedGrids,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::IrregularSampling: return "IrregularSampling";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::InvalidWindow: return "InvalidWindow";
        case ErrorCode::LagOutOfRange: return "LagOutOfRange";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::SpecMismatch: return "SpecMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::NoCandidateQualifies: return "NoCandidateQualifies";
        case ErrorCode::NoPostBaselineWindows: return "NoPostBaselineWindows";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::MixedGrids: return "MixedGrids";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) throw Error(code, message);
}

}  // namespace detail

}  // namespace slopewatch
