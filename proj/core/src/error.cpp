#include "mlsm/error.hpp"

namespace mlsm {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::NotFitted: return "NotFitted";
        case ErrorCode::NonBinaryLabels: return "NonBinaryLabels";
        case ErrorCode::EstimatorFailure: return "EstimatorFailure";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::NonBinaryInput: return "NonBinaryInput";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::TypeError: return "TypeError";
        case ErrorCode::CrossedMarket: return "CrossedMarket";
        case ErrorCode::InvalidRecord: return "InvalidRecord";
        case ErrorCode::TooFewRows: return "TooFewRows";
        case ErrorCode::FormatError: return "FormatError";
        case ErrorCode::Diverged: return "Diverged";
    }
    return "Unknown";
}

}  // namespace mlsm
