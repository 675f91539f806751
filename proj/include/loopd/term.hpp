#pragma once

// Translated terms. Every macro has been expanded, every constant is quoted,
// and every call names a built-in or a user definition.

#include <map>
#include <memory>
#include <set>
#include <vector>

#include "loopd/value.hpp"

namespace loopd {

struct Term;
struct Builtin;
struct LoopNode;
using TermPtr = std::shared_ptr<const Term>;
using SymbolSet = std::set<const Symbol*>;

/// A closed lambda object. Formals are distinct and the body mentions no
/// other free variables. Formals are always treated as ignorable.
struct LambdaObj {
    std::vector<const Symbol*> formals;
    TermPtr guard;  // null when there is no guard
    TermPtr body;
};

/// What apply$ consumes: a function symbol or a lambda object.
struct FnObject {
    const Symbol* name = nullptr;
    std::shared_ptr<const LambdaObj> lambda;

    static FnObject named(const Symbol* s) { return FnObject{s, nullptr}; }
    static FnObject of(std::shared_ptr<const LambdaObj> l) { return FnObject{nullptr, std::move(l)}; }
    bool is_named() const { return name != nullptr; }
};

enum class TermKind { Const, Var, Call, If, Let, Lambda, Loop };

struct Term {
    TermKind kind = TermKind::Const;
    Value value;                           // Const
    const Symbol* symbol = nullptr;        // Var name, Call function, or a DEFCONST name shown for a Const
    std::vector<TermPtr> args;             // Call arguments; If: test/then/else; Let: binding values
    std::vector<const Symbol*> vars;       // Let variables
    TermPtr body;                          // Let body
    std::shared_ptr<const LambdaObj> lambda;
    std::shared_ptr<const LoopNode> loop;
    const Builtin* builtin = nullptr;      // resolved for calls of primitives
    const Symbol* warrant_of = nullptr;    // set for (APPLY$-WARRANT-F)
};

TermPtr make_const(Value v, const Symbol* display = nullptr);
TermPtr make_var(const Symbol* s);
TermPtr make_call(const Symbol* fn, std::vector<TermPtr> args);
TermPtr make_if(TermPtr test, TermPtr then, TermPtr otherwise);
TermPtr make_let(std::vector<const Symbol*> vars, std::vector<TermPtr> values, TermPtr body);
TermPtr make_lambda(std::shared_ptr<const LambdaObj> fn);
TermPtr make_loop(std::shared_ptr<const LoopNode> node);
/// (APPLY$-WARRANT-F), the warrant hypothesis for F.
TermPtr make_warrant_hyp(const Symbol* fn);

/// Nested IF conjunction; 'T for an empty list.
TermPtr make_and(const std::vector<TermPtr>& parts);
/// Inverse of make_and: flattens (IF a b 'NIL) chains; 'T contributes nothing.
std::vector<TermPtr> conjuncts(const TermPtr& t);

bool is_const(const Term& t, const Value& v);

/// Free variables in order of first occurrence.
std::vector<const Symbol*> free_vars(const Term& t);
bool occurs_free(const Symbol* s, const Term& t);

/// Every user-level function symbol called anywhere in t, including inside
/// lambda objects and nested loops, in first-occurrence order.
std::vector<const Symbol*> called_functions(const Term& t);

bool term_equal(const Term& a, const Term& b);
bool term_equal(const TermPtr& a, const TermPtr& b);

/// Replace free occurrences of variables. Replacements are assumed not to
/// be captured by inner LET bindings.
TermPtr substitute(const TermPtr& t, const std::map<const Symbol*, TermPtr>& subst);

/// Translated rendering: constants quoted, calls of primitives by their
/// real names, lambda objects as quoted LAMBDA forms.
Value term_to_sexpr(const Term& t);
/// Sugared rendering: (* X X) for (BINARY-* X X), AND/OR/LIST restored,
/// lambda objects as LAMBDA$ forms. translate_term of the result yields an
/// equal term.
Value untranslate(const Term& t);
Value untranslate_lambda(const LambdaObj& fn);

}  // namespace loopd
