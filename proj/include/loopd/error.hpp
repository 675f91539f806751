#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "loopd/value.hpp"

namespace loopd {

enum class ErrorKind {
    // reader
    UnbalancedParen,
    BadToken,
    // term translation and definitions
    UnknownMacroOrFunction,
    ArityMismatch,
    UnboundVariable,
    Redefinition,
    MalformedDefun,
    WarrantForUndefined,
    // loop$ syntax
    DuplicateIterVar,
    WhenWithAlwaysOrThereis,
    UnknownLoopOperator,
    MalformedTarget,
    MalformedOfType,
    MissingBody,
    MalformedLoop,
    // evaluation
    GuardViolation,
    ForcedWarrant,
    UnwarrantedFunction,
    RecursionDepthExceeded,
    NonPositiveStep,
    NonIntegerBound,
    NonListTarget,
    // guards and bench
    DomainMissing,
    EvaluationError,
    ResultMismatch,
};

std::string_view error_kind_name(ErrorKind k);

struct SourcePos {
    std::size_t offset = 0;
    std::size_t line = 1;
    std::size_t column = 1;
};

/// The one error type shared by every layer. `details` carries the
/// structured payload: the symbol for ForcedWarrant/UnwarrantedFunction,
/// (variable value predicate) for GuardViolation, (reference fast) for
/// ResultMismatch.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::vector<Value> details = {},
          std::optional<SourcePos> pos = std::nullopt);

    ErrorKind kind() const { return kind_; }
    const std::vector<Value>& details() const { return details_; }
    const std::optional<SourcePos>& pos() const { return pos_; }

    Error with_pos(SourcePos p) const;

private:
    ErrorKind kind_;
    std::vector<Value> details_;
    std::optional<SourcePos> pos_;
};

}  // namespace loopd
