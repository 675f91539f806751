#pragma once

// Scion-call IR: the logical meaning of a loop$ expression. A plain loop
// becomes nested calls of unary-lambda scions over one target list; a fancy
// loop becomes calls of the "+" scions whose lambdas take (LOOP$-GVARS
// LOOP$-IVARS) and whose target is a LOOP$-AS zip.

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "loopd/loop_syntax.hpp"
#include "loopd/term.hpp"

namespace loopd {

enum class ScionKind { Sum, Collect, Append, Always, Thereis, Until, When };

ScionKind scion_for(LoopOp op);
/// SUM$, SUM$+, UNTIL$, ...
std::string_view scion_name(ScionKind kind, bool fancy);

struct TargetExpr {
    enum class Kind { List, Tails, FromToBy, Zip };
    Kind kind = Kind::List;
    TermPtr lst;
    TermPtr lo, hi, by;
    std::vector<TargetExpr> parts;  // Zip
};

struct ScionCall {
    LoopOp op = LoopOp::Collect;
    bool fancy = false;
    FnObject body;
    std::optional<FnObject> until;
    std::optional<FnObject> when;
    std::vector<TermPtr> globals;  // terms for the global values; fancy only
    TargetExpr target;
};

ScionCall translate_loop(const LoopSpec& spec);

/// (COLLECT$ (LAMBDA$ ...) (WHEN$ ... (UNTIL$ ... target))) with lambda$
/// sugar and the original variable names.
Value untranslate(const ScionCall& sc);
/// Same nesting with quoted LAMBDA objects and translated sub-terms.
Value scion_to_sexpr(const ScionCall& sc);

/// Rebuilds a ScionCall from either rendering above.
ScionCall scion_call_from_sexpr(const Value& e, const SymbolSet& outer, const World& w);

bool scion_call_equal(const ScionCall& a, const ScionCall& b);

struct FastLoopCache;

/// A loop$ occurrence inside a term: the parsed spec, its translation, and
/// a memo for the compiled fast path.
struct LoopNode {
    std::shared_ptr<const LoopSpec> spec;
    std::shared_ptr<const ScionCall> scion;
    std::shared_ptr<FastLoopCache> fast;
};

std::shared_ptr<const LoopNode> make_loop_node(LoopSpec spec);

}  // namespace loopd
