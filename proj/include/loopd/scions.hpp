#pragma once

// The reference semantics: target builders and the fourteen loop$ scions,
// each folding apply$ over a target list.

#include "loopd/kernel.hpp"
#include "loopd/translate.hpp"

namespace loopd {

/// (lo lo+by ... ) up to and including hi. Throws NonIntegerBound or
/// NonPositiveStep.
Value from_to_by(const Value& lo, const Value& hi, const Value& by);

/// The non-empty tails of lst.
Value tails(const Value& lst);

/// Zips a list of lists into tuples, stopping at the shortest.
Value loop_as(const Value& lists);

/// Calls fn on each element of lst: fn(e) for the plain scions.
Value plain_scion(ScionKind kind, const FnObject& fn, const Value& lst, const World& w, EvalContext& ctx);

/// fn(globals, e) for the "+" scions.
Value fancy_scion(ScionKind kind, const FnObject& fn, const Value& globals, const Value& lst, const World& w,
                  EvalContext& ctx);

/// The concrete target list. IN and ON targets over improper lists use the
/// longest proper prefix.
Value eval_target(const TargetExpr& t, Environment& env, const World& w, EvalContext& ctx);

/// UNTIL$ first, then WHEN$, then the operator scion.
Value eval_loop_reference(const ScionCall& sc, Environment& env, const World& w, EvalContext& ctx);

}  // namespace loopd
