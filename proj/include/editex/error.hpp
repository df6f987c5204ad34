#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace editex {

enum class ErrorCode {
    EmptyDataset,
    SingleClassDataset,
    InsufficientRows,
    SchemaMismatch,
    TooFewMinoritySamples,
    LengthMismatch,
    EmptyBackground,
    InvalidArgument,
    FileNotFound,
    AllRowsInvalid,
    EmptyInput,
    EmptyTestSet,
    SchemaVersionMismatch,
    CorruptModel,
    Io,
};

// Error families map onto CLI exit codes.
enum class ErrorFamily { Usage, Data, Model, Io };

std::string_view to_string(ErrorCode code) noexcept;
ErrorFamily family_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorFamily family() const noexcept { return family_of(code_); }

private:
    ErrorCode code_;
};

}  // namespace editex
