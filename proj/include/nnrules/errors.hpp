#pragma once

#include <stdexcept>
#include <string>

namespace nnrules {

enum class ErrorKind {
    UnsupportedFormat,
    TruncatedFile,
    IoFailure,
    ShapeMismatch,
    UnknownActivation,
    DuplicateLayerName,
    DimensionMismatch,
    NonFiniteInput,
    UnknownLayer,
    MissingLabels,
    SentinelCollision,
    EmptyDataset,
    NoRulesForLabel,
    SchemaViolation,
    UnknownOperator,
    EmptySupport,
    InconsistentBox,
    AnchorViolatesProperty,
    RuleUnsatisfiedAtInput,
    LayerMismatch,
    ConfigError,
};

const char* error_kind_name(ErrorKind kind);

// Single exception type carrying a machine-checkable kind; the what() string
// is "<kind>: <detail>".
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + detail), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& detail) {
    throw Error(kind, detail);
}

}  // namespace nnrules
