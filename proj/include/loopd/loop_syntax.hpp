#pragma once

// Parsed loop$ forms:
//
//   (LOOP$ FOR v1 [OF-TYPE s1] tgt1
//          [AS v2 [OF-TYPE s2] tgt2] ...
//          [UNTIL [:GUARD gu] u]
//          [WHEN [:GUARD gw] w]
//          op [:GUARD gb] body)
//
// with tgt one of IN lst | ON lst | FROM lo TO hi [BY step] and op one of
// ALWAYS, THEREIS, APPEND, COLLECT, SUM.

#include <optional>
#include <vector>

#include "loopd/term.hpp"
#include "loopd/value.hpp"

namespace loopd {

class World;
struct SelfSignature;

struct TypeSpec {
    enum class Kind { Integer, Rational, Cons, T, IntegerRange };
    Kind kind = Kind::T;
    std::optional<Value> lo;  // IntegerRange bounds; absent means unbounded
    std::optional<Value> hi;

    /// Recognizer over runtime values. RATIONAL is satisfied by integers only.
    bool holds(const Value& v) const;
    Value to_sexpr() const;
    /// Name of the primitive recognizer used in guard-violation reports.
    const char* predicate_name() const;
};

bool operator==(const TypeSpec& a, const TypeSpec& b);

/// Parses INTEGER, RATIONAL, CONS, T, or (INTEGER lo hi) where either bound
/// may be *. Throws MalformedOfType otherwise.
TypeSpec parse_type_spec(const Value& e);

/// The recognizer as a term over x: (INTEGERP x), (CONSP x), 'T, or the
/// range conjunction.
TermPtr typespec_term(const TypeSpec& s, const TermPtr& x);

enum class TargetKind { In, On, FromToBy };

struct TargetClause {
    TargetKind kind = TargetKind::In;
    TermPtr lst;          // In, On
    TermPtr lo, hi, by;   // FromToBy; by is the constant 1 when not written
    bool by_given = false;
};

struct IterClause {
    const Symbol* var = nullptr;
    std::optional<TypeSpec> type;
    TargetClause target;
};

struct LoopTest {
    TermPtr guard;  // null when no :GUARD was written
    TermPtr test;
};

enum class LoopOp { Always, Thereis, Append, Collect, Sum };

const char* loop_op_name(LoopOp op);

struct LoopSpec {
    std::vector<IterClause> iters;
    std::optional<LoopTest> until;
    std::optional<LoopTest> when;
    LoopOp op = LoopOp::Collect;
    TermPtr body_guard;
    TermPtr body;
    Value original;

    std::vector<const Symbol*> iter_vars() const;
};

/// `outer` holds the variables bound around the loop (formals of the
/// enclosing definition, LET variables, outer iteration variables).
LoopSpec parse_loop(const Value& e, const SymbolSet& outer, const World& w,
                    const SelfSignature* self = nullptr);

struct Classification {
    bool plain = true;
    std::vector<const Symbol*> globals;  // first-occurrence order; empty when plain
};

Classification classify(const LoopSpec& spec);

/// Canonical loop$ text for a spec. With `sugar`, sub-terms are shown
/// untranslated and parse_loop of the result gives an equal spec; otherwise
/// sub-terms appear in translated form.
Value loop_to_sexpr(const LoopSpec& spec, bool sugar = true);

bool loop_spec_equal(const LoopSpec& a, const LoopSpec& b);

/// Free variables of the whole loop$ expression: target variables plus the
/// non-iteration variables of the tests, body, and guards.
std::vector<const Symbol*> loop_free_vars(const LoopSpec& spec);

}  // namespace loopd
