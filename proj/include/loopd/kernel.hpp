#pragma once

// The semantic substrate: term translation, the world of definitions and
// warrants, evaluation contexts, the built-in primitives, and apply$.

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "loopd/error.hpp"
#include "loopd/term.hpp"
#include "loopd/value.hpp"

namespace loopd {

class World;
class EvalContext;
struct FastFnCache;

struct Definition {
    const Symbol* name = nullptr;
    std::vector<const Symbol*> formals;
    TermPtr guard;  // 'T when no guard was declared
    TermPtr body;
    bool guard_verified = false;
    /// Why the flag has its value, including the value domains the bounded
    /// check swept.
    std::string verification_note;
    Value source;
    std::shared_ptr<FastFnCache> fast;
};

/// Immutable; every update returns a new World sharing structure with the old.
class World {
public:
    World();

    const Definition* find(const Symbol* name) const;
    std::shared_ptr<const Definition> find_shared(const Symbol* name) const;
    bool warranted(const Symbol* name) const { return warrants_->count(name) != 0; }
    const std::set<const Symbol*>& warrants() const { return *warrants_; }
    const Value* constant(const Symbol* name) const;
    /// Definitions in the order they were introduced.
    const std::vector<const Symbol*>& definition_order() const { return *order_; }

    World with_definition(std::shared_ptr<const Definition> def) const;
    /// Replaces an existing definition (used when guard verification
    /// succeeds after the fact).
    World with_updated_definition(std::shared_ptr<const Definition> def) const;
    World with_warrant(const Symbol* name) const;
    World with_constant(const Symbol* name, Value v) const;

private:
    using DefMap = std::unordered_map<const Symbol*, std::shared_ptr<const Definition>>;
    std::shared_ptr<const DefMap> defs_;
    std::shared_ptr<const std::vector<const Symbol*>> order_;
    std::shared_ptr<const std::set<const Symbol*>> warrants_;
    std::shared_ptr<const std::unordered_map<const Symbol*, Value>> constants_;
};

/// Receives reference-path scion entries and exits.
class ScionTracer {
public:
    virtual ~ScionTracer() = default;
    virtual void enter(int depth, std::string_view scion, std::span<const Value> args) = 0;
    virtual void exit(int depth, std::string_view scion, const Value& result) = 0;
};

/// Writes traces in the `1> (COLLECT$ ...)` / `<1 (COLLECT$ result)` style.
class StreamTracer : public ScionTracer {
public:
    explicit StreamTracer(std::ostream& os) : os_(os) {}
    void enter(int depth, std::string_view scion, std::span<const Value> args) override;
    void exit(int depth, std::string_view scion, const Value& result) override;

private:
    std::ostream& os_;
};

/// TopLevel behaves as if every warrant holds. Proof only trusts the
/// assumed warrants; applying any other warranted user function records it
/// in `forced` and raises ForcedWarrant. One context per evaluation thread.
class EvalContext {
public:
    enum class Kind { TopLevel, Proof };

    static EvalContext top_level() { return EvalContext(Kind::TopLevel, {}); }
    static EvalContext proof(std::set<const Symbol*> assumed) { return EvalContext(Kind::Proof, std::move(assumed)); }

    Kind kind() const { return kind_; }
    bool is_proof() const { return kind_ == Kind::Proof; }
    const std::set<const Symbol*>& assumed() const { return assumed_; }
    const std::vector<const Symbol*>& forced() const { return forced_; }
    void force(const Symbol* s);

    /// Whether (APPLY$-WARRANT-F) is true here.
    bool warrant_holds(const Symbol* fn, const World& w) const;

    ScionTracer* tracer = nullptr;
    /// Route top-level loop$ forms to the fast path (with dynamic guard
    /// checks) instead of the scions.
    bool fast_top_level = false;
    std::size_t max_depth = 100000;
    std::size_t depth = 0;
    int trace_depth = 0;

private:
    EvalContext(Kind k, std::set<const Symbol*> a) : kind_(k), assumed_(std::move(a)) {}

    Kind kind_;
    std::set<const Symbol*> assumed_;
    std::vector<const Symbol*> forced_;
};

/// Evaluation-time services handed to primitives.
struct Interp {
    const World& world;
    EvalContext& ctx;
};

using BuiltinFn = Value (*)(std::span<const Value> args, Interp& in);

struct Builtin {
    std::string_view name;
    int arity;
    BuiltinFn fn;
    /// Primitives apply$ may call directly. Scions, target builders and
    /// apply$ itself are excluded.
    bool applicable;
    /// Argument 0 must be a function object (a lambda term or quoted symbol).
    bool takes_fn;
};

const Builtin* find_builtin(const Symbol* name);
std::span<const Builtin> builtins();

/// Ordered bindings; lookup finds the most recent.
class Environment {
public:
    Environment() = default;
    Environment(std::initializer_list<std::pair<const Symbol*, Value>> init);

    void bind(const Symbol* s, Value v) { bindings_.emplace_back(s, std::move(v)); }
    const Value& lookup(const Symbol* s) const;
    const Value* find(const Symbol* s) const;
    std::size_t size() const { return bindings_.size(); }
    void truncate(std::size_t n) { bindings_.resize(n); }
    const std::vector<std::pair<const Symbol*, Value>>& bindings() const { return bindings_; }

private:
    std::vector<std::pair<const Symbol*, Value>> bindings_;
};

/// The function currently being defined, so its body may call itself.
struct SelfSignature {
    const Symbol* name;
    std::size_t arity;
};

/// Expands the fixed macro set (*, +, -, >, <=, >=, AND, OR, LIST, WARRANT),
/// quotes constants, resolves LAMBDA$ in function positions and LOOP$ forms.
TermPtr translate_term(const Value& e, const SymbolSet& bound, const World& w,
                       const SelfSignature* self = nullptr);

/// Parses (LAMBDA$ formals [declare] body) or (LAMBDA formals [declare] body).
std::shared_ptr<const LambdaObj> translate_lambda(const Value& e, const World& w);

Value eval_term(const Term& t, Environment& env, const World& w, EvalContext& ctx);

/// Evaluates a definition body; loop$ forms inside may take the fast path
/// when the definition is guard-verified and ctx is TopLevel.
Value call_definition(const Definition& def, std::span<const Value> args, const World& w, EvalContext& ctx);

/// The function object named by a runtime value: a symbol, a lambda object,
/// or a quoted (LAMBDA ...) list.
FnObject fn_from_value(const Value& v, const World& w);
std::size_t fn_arity(const FnObject& fn, const World& w);

/// apply$. Arity is checked; lambda bodies are evaluated whether or not
/// their guards hold.
Value apply_fn(const FnObject& fn, std::span<const Value> args, const World& w, EvalContext& ctx);

/// Processes DEFUN, DEFUN$, DEFWARRANT, DEFCONST and VERIFY-GUARDS forms.
World define(const Value& form, const World& w);

bool is_definition_form(const Value& form);

}  // namespace loopd
