#include "loopd/error.hpp"

namespace loopd {

std::string_view error_kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::UnbalancedParen: return "UnbalancedParen";
    case ErrorKind::BadToken: return "BadToken";
    case ErrorKind::UnknownMacroOrFunction: return "UnknownMacroOrFunction";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::UnboundVariable: return "UnboundVariable";
    case ErrorKind::Redefinition: return "Redefinition";
    case ErrorKind::MalformedDefun: return "MalformedDefun";
    case ErrorKind::WarrantForUndefined: return "WarrantForUndefined";
    case ErrorKind::DuplicateIterVar: return "DuplicateIterVar";
    case ErrorKind::WhenWithAlwaysOrThereis: return "WhenWithAlwaysOrThereis";
    case ErrorKind::UnknownLoopOperator: return "UnknownLoopOperator";
    case ErrorKind::MalformedTarget: return "MalformedTarget";
    case ErrorKind::MalformedOfType: return "MalformedOfType";
    case ErrorKind::MissingBody: return "MissingBody";
    case ErrorKind::MalformedLoop: return "MalformedLoop";
    case ErrorKind::GuardViolation: return "GuardViolation";
    case ErrorKind::ForcedWarrant: return "ForcedWarrant";
    case ErrorKind::UnwarrantedFunction: return "UnwarrantedFunction";
    case ErrorKind::RecursionDepthExceeded: return "RecursionDepthExceeded";
    case ErrorKind::NonPositiveStep: return "NonPositiveStep";
    case ErrorKind::NonIntegerBound: return "NonIntegerBound";
    case ErrorKind::NonListTarget: return "NonListTarget";
    case ErrorKind::DomainMissing: return "DomainMissing";
    case ErrorKind::EvaluationError: return "EvaluationError";
    case ErrorKind::ResultMismatch: return "ResultMismatch";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::vector<Value> details,
             std::optional<SourcePos> pos)
    : std::runtime_error(message), kind_(kind), details_(std::move(details)), pos_(pos) {}

Error Error::with_pos(SourcePos p) const {
    Error e = *this;
    e.pos_ = p;
    return e;
}

}  // namespace loopd
