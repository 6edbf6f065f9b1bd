#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mlsm {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    NotPositiveDefinite,
    SingularSystem,
    KTooLarge,
    NotFitted,
    NonBinaryLabels,
    EstimatorFailure,
    EmptyDataset,
    LengthMismatch,
    NonBinaryInput,
    ShapeMismatch,
    InsufficientData,
    MissingColumn,
    TypeError,
    CrossedMarket,
    InvalidRecord,
    TooFewRows,
    FormatError,
    Diverged,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception. `code()` identifies the failure class so callers
/// (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace mlsm
