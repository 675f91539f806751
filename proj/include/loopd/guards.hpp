#pragma once

// Loop$ guard obligations (the special conjectures) and a bounded checker
// that sweeps them over finite value domains.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "loopd/kernel.hpp"
#include "loopd/loop_syntax.hpp"

namespace loopd {

enum class ConjectureClass { A, B, C };

char class_letter(ConjectureClass c);

struct GuardConjecture {
    ConjectureClass cls = ConjectureClass::A;
    std::vector<TermPtr> hyps;
    TermPtr concl;
    std::string source;  // e.g. "body", "UNTIL", "FROM-TO-BY step"
    /// The membership variable, or null for class (c).
    const Symbol* fresh = nullptr;
};

TermPtr typespec_pred(const TypeSpec& s, const TermPtr& x);

std::vector<GuardConjecture> generate_guard_conjectures(const LoopSpec& spec, const TermPtr& context_guard,
                                                        const World& w);

/// (IMPLIES (AND hyps...) concl) in sugar form.
Value conjecture_to_sexpr(const GuardConjecture& c);

using Domains = std::map<const Symbol*, std::vector<Value>>;
using Bindings = std::vector<std::pair<const Symbol*, Value>>;

struct ConjectureResult {
    std::size_t index = 0;  // 1-based
    ConjectureClass cls = ConjectureClass::A;
    bool pass = true;
    Bindings counterexample;
    std::string error;  // set when the failing instance raised an error
    std::size_t instances = 0;
};

struct Report {
    std::vector<ConjectureResult> results;
    bool all_pass() const;
    /// One (CONJECTURE n CLASS a STATUS PASS|FAIL (COUNTEREXAMPLE ...)) per
    /// conjecture.
    std::vector<Value> to_sexprs() const;
};

/// Every free variable except the membership variable needs a domain.
/// Environments are visited in lexicographic domain order; when there are
/// more than max_envs of them, a fixed pseudo-random sample of max_envs is
/// used instead (0 means no limit).
Report check_conjectures(const std::vector<GuardConjecture>& cs, const Domains& domains, const World& w,
                         std::size_t max_envs = 0);

/// Values tried for each variable when a definition is guard-verified at
/// definition time.
const std::vector<Value>& default_domain();

/// All loop$ forms in a term, outermost first, including nested ones.
std::vector<const LoopSpec*> loops_in(const Term& t);

struct GuardVerification {
    bool verified = false;
    std::string note;
};

/// Callees must be guard-verified, and every loop$ conjecture must survive
/// the bounded check over default_domain().
GuardVerification verify_definition_guards(const Definition& def, const World& w);

/// Conjectures for every loop$ in a definition body.
std::vector<GuardConjecture> definition_conjectures(const Definition& def, const World& w);

}  // namespace loopd
