#pragma once

#include <stdexcept>
#include <string>

namespace orgminer {

enum class ErrorCode {
    ParseError,
    IoError,
    DuplicateAttribute,
    InvalidAttribute,
    HeaderMismatch,
    UnknownCategory,
    NumericParse,
    IncompleteData,
    AllMissingColumn,
    TooFewRows,
    UnknownAttribute,
    KExceedsN,
    SingleCluster,
    EmptyNode,
    NonPartition,
    DegenerateTable,
    TargetNotCategorical,
    TargetMissing,
    EmptyTestSet,
    SchemaMismatch,
    ConsequentNotCategorical,
    SearchSpaceTooLarge,
    UnknownCluster,
    LengthMismatch,
    InfeasibleSpec,
    BundleIncomplete,
    StageFailure,
};

const char* errorCodeName(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(errorCodeName(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace orgminer
