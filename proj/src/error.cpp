#include "editex/error.hpp"

namespace editex {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptyDataset: return "empty_dataset";
        case ErrorCode::SingleClassDataset: return "single_class_dataset";
        case ErrorCode::InsufficientRows: return "insufficient_rows";
        case ErrorCode::SchemaMismatch: return "schema_mismatch";
        case ErrorCode::TooFewMinoritySamples: return "too_few_minority_samples";
        case ErrorCode::LengthMismatch: return "length_mismatch";
        case ErrorCode::EmptyBackground: return "empty_background";
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::FileNotFound: return "file_not_found";
        case ErrorCode::AllRowsInvalid: return "all_rows_invalid";
        case ErrorCode::EmptyInput: return "empty_input";
        case ErrorCode::EmptyTestSet: return "empty_test_set";
        case ErrorCode::SchemaVersionMismatch: return "schema_version_mismatch";
        case ErrorCode::CorruptModel: return "corrupt_model";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

ErrorFamily family_of(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument:
            return ErrorFamily::Usage;
        case ErrorCode::SchemaMismatch:
        case ErrorCode::SchemaVersionMismatch:
        case ErrorCode::CorruptModel:
            return ErrorFamily::Model;
        case ErrorCode::FileNotFound:
        case ErrorCode::Io:
            return ErrorFamily::Io;
        default:
            return ErrorFamily::Data;
    }
}

}  // namespace editex
