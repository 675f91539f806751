#include "loopd/kernel.hpp"

#include <algorithm>
#include <ostream>

#include <boost/container/small_vector.hpp>

#include "loopd/fastpath.hpp"
#include "loopd/guards.hpp"
#include "loopd/loop_syntax.hpp"
#include "loopd/scions.hpp"
#include "loopd/sexpr.hpp"
#include "loopd/symbols.hpp"
#include "loopd/translate.hpp"

namespace loopd {

using ArgVec = boost::container::small_vector<Value, 4>;

// ---------------------------------------------------------------------------
// World

World::World()
    : defs_(std::make_shared<DefMap>()),
      order_(std::make_shared<std::vector<const Symbol*>>()),
      warrants_(std::make_shared<std::set<const Symbol*>>()),
      constants_(std::make_shared<std::unordered_map<const Symbol*, Value>>()) {}

const Definition* World::find(const Symbol* name) const {
    auto it = defs_->find(name);
    return it == defs_->end() ? nullptr : it->second.get();
}

std::shared_ptr<const Definition> World::find_shared(const Symbol* name) const {
    auto it = defs_->find(name);
    return it == defs_->end() ? nullptr : it->second;
}

const Value* World::constant(const Symbol* name) const {
    auto it = constants_->find(name);
    return it == constants_->end() ? nullptr : &it->second;
}

World World::with_definition(std::shared_ptr<const Definition> def) const {
    if (find(def->name) != nullptr || find_builtin(def->name) != nullptr)
        throw Error(ErrorKind::Redefinition, "redefinition of " + def->name->name, {Value::symbol(def->name)});
    World w = *this;
    auto defs = std::make_shared<DefMap>(*defs_);
    auto order = std::make_shared<std::vector<const Symbol*>>(*order_);
    order->push_back(def->name);
    defs->emplace(def->name, std::move(def));
    w.defs_ = std::move(defs);
    w.order_ = std::move(order);
    return w;
}

World World::with_updated_definition(std::shared_ptr<const Definition> def) const {
    World w = *this;
    auto defs = std::make_shared<DefMap>(*defs_);
    (*defs)[def->name] = std::move(def);
    w.defs_ = std::move(defs);
    return w;
}

World World::with_warrant(const Symbol* name) const {
    if (find(name) == nullptr)
        throw Error(ErrorKind::WarrantForUndefined, "cannot warrant undefined function " + name->name,
                    {Value::symbol(name)});
    World w = *this;
    auto ws = std::make_shared<std::set<const Symbol*>>(*warrants_);
    ws->insert(name);
    w.warrants_ = std::move(ws);
    return w;
}

World World::with_constant(const Symbol* name, Value v) const {
    if (constant(name) != nullptr)
        throw Error(ErrorKind::Redefinition, "redefinition of constant " + name->name, {Value::symbol(name)});
    World w = *this;
    auto cs = std::make_shared<std::unordered_map<const Symbol*, Value>>(*constants_);
    cs->emplace(name, std::move(v));
    w.constants_ = std::move(cs);
    return w;
}

// ---------------------------------------------------------------------------
// Contexts and tracing

void EvalContext::force(const Symbol* s) {
    if (std::find(forced_.begin(), forced_.end(), s) == forced_.end()) forced_.push_back(s);
}

bool EvalContext::warrant_holds(const Symbol* fn, const World& w) const {
    if (!w.warranted(fn)) return false;
    return kind_ == Kind::TopLevel || assumed_.count(fn) != 0;
}

void StreamTracer::enter(int depth, std::string_view scion, std::span<const Value> args) {
    os_ << std::string(static_cast<std::size_t>(depth - 1), ' ') << depth << "> (" << scion;
    for (const auto& a : args) os_ << ' ' << print_sexpr(a);
    os_ << ")\n";
}

void StreamTracer::exit(int depth, std::string_view scion, const Value& result) {
    os_ << std::string(static_cast<std::size_t>(depth - 1), ' ') << '<' << depth << " (" << scion << ' '
        << print_sexpr(result) << ")\n";
}

// ---------------------------------------------------------------------------
// Environment

Environment::Environment(std::initializer_list<std::pair<const Symbol*, Value>> init) : bindings_(init) {}

const Value* Environment::find(const Symbol* s) const {
    for (auto it = bindings_.rbegin(); it != bindings_.rend(); ++it)
        if (it->first == s) return &it->second;
    return nullptr;
}

const Value& Environment::lookup(const Symbol* s) const {
    if (const Value* v = find(s)) return *v;
    throw Error(ErrorKind::UnboundVariable, "unbound variable " + s->name, {Value::symbol(s)});
}

// ---------------------------------------------------------------------------
// Built-in primitives

namespace {

Value b_plus(std::span<const Value> a, Interp&) { return int_add(a[0], a[1]); }
Value b_times(std::span<const Value> a, Interp&) { return int_mul(a[0], a[1]); }
Value b_neg(std::span<const Value> a, Interp&) { return int_neg(a[0]); }
Value b_less(std::span<const Value> a, Interp&) { return Value::boolean(int_compare(a[0], a[1]) < 0); }
Value b_equal(std::span<const Value> a, Interp&) { return Value::boolean(equal(a[0], a[1])); }
Value b_car(std::span<const Value> a, Interp&) { return a[0].car(); }
Value b_cdr(std::span<const Value> a, Interp&) { return a[0].cdr(); }
Value b_cons(std::span<const Value> a, Interp&) { return cons(a[0], a[1]); }
Value b_consp(std::span<const Value> a, Interp&) { return Value::boolean(a[0].is_pair()); }
Value b_atom(std::span<const Value> a, Interp&) { return Value::boolean(a[0].is_atom()); }
Value b_not(std::span<const Value> a, Interp&) { return Value::boolean(a[0].is_nil()); }
Value b_integerp(std::span<const Value> a, Interp&) { return Value::boolean(a[0].is_integer()); }
Value b_natp(std::span<const Value> a, Interp&) {
    return Value::boolean(a[0].is_integer() && int_compare(a[0], Value::integer(0)) >= 0);
}
Value b_evenp(std::span<const Value> a, Interp&) { return Value::boolean(int_evenp(a[0])); }
Value b_oddp(std::span<const Value> a, Interp&) { return Value::boolean(!int_evenp(a[0])); }
Value b_floor(std::span<const Value> a, Interp&) { return int_floor(a[0], a[1]); }
Value b_mod(std::span<const Value> a, Interp&) { return int_mod(a[0], a[1]); }
Value b_len(std::span<const Value> a, Interp&) { return Value::integer(static_cast<std::int64_t>(length(a[0]))); }
Value b_true_listp(std::span<const Value> a, Interp&) { return Value::boolean(is_true_list(a[0])); }
Value b_integer_listp(std::span<const Value> a, Interp&) {
    const Value* p = &a[0];
    for (; p->is_pair(); p = &p->cdr())
        if (!p->car().is_integer()) return Value();
    return Value::boolean(p->is_nil());
}
Value b_member_equal(std::span<const Value> a, Interp&) {
    for (const Value* p = &a[1]; p->is_pair(); p = &p->cdr())
        if (equal(p->car(), a[0])) return *p;
    return Value();
}
Value b_revappend(std::span<const Value> a, Interp&) { return reverse_onto(a[0], a[1]); }
Value b_reverse(std::span<const Value> a, Interp&) {
    if (a[0].is_string()) {
        std::string s = a[0].as_string();
        std::reverse(s.begin(), s.end());
        return Value::string(std::move(s));
    }
    return reverse_onto(a[0], Value());
}
Value b_from_to_by(std::span<const Value> a, Interp&) { return from_to_by(a[0], a[1], a[2]); }
Value b_tails(std::span<const Value> a, Interp&) { return tails(a[0]); }
Value b_loop_as(std::span<const Value> a, Interp&) { return loop_as(a[0]); }

Value b_apply(std::span<const Value> a, Interp& in) {
    FnObject fn = fn_from_value(a[0], in.world);
    std::vector<Value> args = list_to_vector(a[1]);
    return apply_fn(fn, args, in.world, in.ctx);
}

template <ScionKind K>
Value b_plain_scion(std::span<const Value> a, Interp& in) {
    return plain_scion(K, fn_from_value(a[0], in.world), true_list_fix(a[1]), in.world, in.ctx);
}

template <ScionKind K>
Value b_fancy_scion(std::span<const Value> a, Interp& in) {
    return fancy_scion(K, fn_from_value(a[0], in.world), a[1], true_list_fix(a[2]), in.world, in.ctx);
}

const Builtin kBuiltins[] = {
    {"BINARY-+", 2, b_plus, true, false},
    {"BINARY-*", 2, b_times, true, false},
    {"UNARY--", 1, b_neg, true, false},
    {"<", 2, b_less, true, false},
    {"EQUAL", 2, b_equal, true, false},
    {"CAR", 1, b_car, true, false},
    {"CDR", 1, b_cdr, true, false},
    {"CONS", 2, b_cons, true, false},
    {"CONSP", 1, b_consp, true, false},
    {"ENDP", 1, b_atom, true, false},
    {"ATOM", 1, b_atom, true, false},
    {"NOT", 1, b_not, true, false},
    {"INTEGERP", 1, b_integerp, true, false},
    {"RATIONALP", 1, b_integerp, true, false},
    {"NATP", 1, b_natp, true, false},
    {"EVENP", 1, b_evenp, true, false},
    {"ODDP", 1, b_oddp, true, false},
    {"FLOOR", 2, b_floor, true, false},
    {"MOD", 2, b_mod, true, false},
    {"LEN", 1, b_len, true, false},
    {"TRUE-LISTP", 1, b_true_listp, true, false},
    {"INTEGER-LISTP", 1, b_integer_listp, true, false},
    {"MEMBER-EQUAL", 2, b_member_equal, true, false},
    {"REVAPPEND", 2, b_revappend, true, false},
    {"REVERSE", 1, b_reverse, true, false},
    // Target builders.
    {"FROM-TO-BY", 3, b_from_to_by, false, false},
    {"TAILS", 1, b_tails, false, false},
    {"LOOP$-AS", 1, b_loop_as, false, false},
    // Higher-order: apply$ and the scions.
    {"APPLY$", 2, b_apply, false, true},
    {"SUM$", 2, b_plain_scion<ScionKind::Sum>, false, true},
    {"COLLECT$", 2, b_plain_scion<ScionKind::Collect>, false, true},
    {"APPEND$", 2, b_plain_scion<ScionKind::Append>, false, true},
    {"ALWAYS$", 2, b_plain_scion<ScionKind::Always>, false, true},
    {"THEREIS$", 2, b_plain_scion<ScionKind::Thereis>, false, true},
    {"UNTIL$", 2, b_plain_scion<ScionKind::Until>, false, true},
    {"WHEN$", 2, b_plain_scion<ScionKind::When>, false, true},
    {"SUM$+", 3, b_fancy_scion<ScionKind::Sum>, false, true},
    {"COLLECT$+", 3, b_fancy_scion<ScionKind::Collect>, false, true},
    {"APPEND$+", 3, b_fancy_scion<ScionKind::Append>, false, true},
    {"ALWAYS$+", 3, b_fancy_scion<ScionKind::Always>, false, true},
    {"THEREIS$+", 3, b_fancy_scion<ScionKind::Thereis>, false, true},
    {"UNTIL$+", 3, b_fancy_scion<ScionKind::Until>, false, true},
    {"WHEN$+", 3, b_fancy_scion<ScionKind::When>, false, true},
};

}  // namespace

std::span<const Builtin> builtins() { return kBuiltins; }

const Builtin* find_builtin(const Symbol* name) {
    static const auto* table = [] {
        auto* m = new std::unordered_map<const Symbol*, const Builtin*>;
        for (const Builtin& b : kBuiltins) m->emplace(intern(b.name), &b);
        return m;
    }();
    auto it = table->find(name);
    return it == table->end() ? nullptr : it->second;
}

// ---------------------------------------------------------------------------
// Translation

namespace {

[[noreturn]] void fail(ErrorKind k, const std::string& msg, const Value& form) {
    throw Error(k, msg + ": " + print_sexpr(form), {form});
}

std::vector<Value> args_of(const Value& e) { return list_to_vector(e.cdr()); }

bool is_variable_name(const Value& v) {
    if (!v.is_symbol() || v.is_nil()) return false;
    const Symbol* s = v.as_symbol();
    return s != sym::t() && !s->keyword();
}

bool is_constant_name(const Symbol* s) {
    return s->name.size() > 2 && s->name.front() == '*' && s->name.back() == '*';
}

class Translator {
public:
    Translator(const World& w, const SelfSignature* self) : w_(w), self_(self) {}

    TermPtr term(const Value& e, const SymbolSet& bound) {
        if (e.is_integer() || e.is_string()) return make_const(e);
        if (e.is_symbol()) return symbol(e, bound);
        if (!e.is_pair()) fail(ErrorKind::BadToken, "not a term", e);
        if (!is_true_list(e)) fail(ErrorKind::UnknownMacroOrFunction, "improper form", e);
        const Value& head = e.car();
        if (!head.is_symbol()) fail(ErrorKind::UnknownMacroOrFunction, "function position must hold a symbol", e);
        const Symbol* f = head.as_symbol();
        std::vector<Value> args = args_of(e);

        if (f == sym::quote()) {
            if (args.size() != 1) fail(ErrorKind::ArityMismatch, "QUOTE takes one argument", e);
            return make_const(args[0]);
        }
        if (f == sym::if_()) {
            if (args.size() != 3) fail(ErrorKind::ArityMismatch, "IF takes three arguments", e);
            return make_if(term(args[0], bound), term(args[1], bound), term(args[2], bound));
        }
        if (f == sym::let()) return let(e, args, bound);
        if (f == sym::and_()) return and_or(args, bound, true);
        if (f == sym::or_()) return and_or(args, bound, false);
        if (f == sym::list()) {
            TermPtr acc = make_const(Value());
            for (auto it = args.rbegin(); it != args.rend(); ++it) acc = make_call(sym::cons(), {term(*it, bound), acc});
            return acc;
        }
        if (f == sym::times()) return fold(args, bound, sym::binary_times(), 1);
        if (f == sym::plus()) return fold(args, bound, sym::binary_plus(), 0);
        if (f == sym::minus()) {
            if (args.size() == 1) return make_call(sym::unary_minus(), {term(args[0], bound)});
            if (args.size() == 2)
                return make_call(sym::binary_plus(),
                                 {term(args[0], bound), make_call(sym::unary_minus(), {term(args[1], bound)})});
            fail(ErrorKind::ArityMismatch, "- takes one or two arguments", e);
        }
        if (f == sym::greater() || f == sym::less_eq() || f == sym::greater_eq()) {
            if (args.size() != 2) fail(ErrorKind::ArityMismatch, f->name + " takes two arguments", e);
            TermPtr a = term(args[0], bound);
            TermPtr b = term(args[1], bound);
            if (f == sym::greater()) return make_call(sym::less(), {b, a});
            if (f == sym::less_eq()) return make_call(sym::not_(), {make_call(sym::less(), {b, a})});
            return make_call(sym::not_(), {make_call(sym::less(), {a, b})});
        }
        if (f == sym::warrant()) {
            std::vector<TermPtr> hyps;
            for (const Value& a : args) {
                if (!a.is_symbol() || w_.find(a.as_symbol()) == nullptr)
                    fail(ErrorKind::UnknownMacroOrFunction, "WARRANT expects defined function names", e);
                hyps.push_back(make_warrant_hyp(a.as_symbol()));
            }
            return make_and(hyps);
        }
        if (f == sym::loop_dollar()) return make_loop(make_loop_node(parse_loop(e, bound, w_, self_)));
        if (f == sym::lambda_dollar() || f == sym::lambda())
            fail(ErrorKind::UnknownMacroOrFunction, "lambda objects may only appear as function arguments", e);
        if (f->name == "MV" || f->name == "MV-LET" || f->name == "MV-NTH" || f->name == "MV-LIST")
            fail(ErrorKind::UnknownMacroOrFunction, "multiple values are not supported", e);
        return call(e, f, args, bound);
    }

private:
    TermPtr symbol(const Value& e, const SymbolSet& bound) {
        const Symbol* s = e.as_symbol();
        if (e.is_nil() || s == sym::t() || s->keyword()) return make_const(e);
        if (bound.count(s) != 0) return make_var(s);
        if (const Value* c = w_.constant(s)) return make_const(*c, s);
        fail(ErrorKind::UnboundVariable, "unbound variable", e);
    }

    TermPtr let(const Value& e, const std::vector<Value>& args, const SymbolSet& bound) {
        if (args.size() != 2 || !is_true_list(args[0])) fail(ErrorKind::MalformedDefun, "malformed LET", e);
        std::vector<const Symbol*> vars;
        std::vector<TermPtr> values;
        for (const Value& b : list_to_vector(args[0])) {
            if (!b.is_pair() || !is_variable_name(b.car()) || length(b) != 2)
                fail(ErrorKind::MalformedDefun, "malformed LET binding", e);
            const Symbol* v = b.car().as_symbol();
            if (std::find(vars.begin(), vars.end(), v) != vars.end())
                fail(ErrorKind::MalformedDefun, "duplicate LET variable", e);
            vars.push_back(v);
            values.push_back(term(b.cdr().car(), bound));
        }
        SymbolSet inner = bound;
        inner.insert(vars.begin(), vars.end());
        return make_let(std::move(vars), std::move(values), term(args[1], inner));
    }

    TermPtr and_or(const std::vector<Value>& args, const SymbolSet& bound, bool is_and) {
        if (args.empty()) return make_const(is_and ? Value::t() : Value());
        TermPtr acc = term(args.back(), bound);
        for (auto it = args.rbegin() + 1; it != args.rend(); ++it) {
            TermPtr t = term(*it, bound);
            acc = is_and ? make_if(t, acc, make_const(Value())) : make_if(t, t, acc);
        }
        return acc;
    }

    TermPtr fold(const std::vector<Value>& args, const SymbolSet& bound, const Symbol* prim, int identity) {
        if (args.empty()) return make_const(Value::integer(identity));
        if (args.size() == 1) return make_call(prim, {make_const(Value::integer(identity)), term(args[0], bound)});
        TermPtr acc = term(args.back(), bound);
        for (auto it = args.rbegin() + 1; it != args.rend(); ++it) acc = make_call(prim, {term(*it, bound), acc});
        return acc;
    }

    TermPtr fn_argument(const Value& a, const SymbolSet& bound) {
        if (a.is_pair() && (a.car().is(sym::lambda_dollar()))) return make_lambda(translate_lambda(a, w_));
        if (a.is_pair() && a.car().is(sym::quote()) && a.cdr().car().is_pair() &&
            a.cdr().car().car().is(sym::lambda()))
            return make_lambda(translate_lambda(a.cdr().car(), w_));
        if (a.is_pair() && a.car().is(sym::quote()) && a.cdr().car().is_symbol()) {
            const Symbol* s = a.cdr().car().as_symbol();
            const Builtin* b = find_builtin(s);
            if ((b == nullptr || !b->applicable) && w_.find(s) == nullptr && !(self_ && self_->name == s))
                fail(ErrorKind::UnknownMacroOrFunction, "not an apply$-able function", a);
        }
        return term(a, bound);
    }

    TermPtr call(const Value& e, const Symbol* f, const std::vector<Value>& args, const SymbolSet& bound) {
        std::size_t arity;
        const Builtin* b = find_builtin(f);
        constexpr std::string_view prefix = "APPLY$-WARRANT-";
        if (b != nullptr) {
            arity = static_cast<std::size_t>(b->arity);
        } else if (const Definition* d = w_.find(f)) {
            arity = d->formals.size();
        } else if (self_ && self_->name == f) {
            arity = self_->arity;
        } else if (f->name.starts_with(prefix) && w_.find(intern(f->name.substr(prefix.size()))) != nullptr) {
            arity = 0;
        } else {
            fail(ErrorKind::UnknownMacroOrFunction, "unknown function or macro " + f->name, e);
        }
        if (args.size() != arity)
            fail(ErrorKind::ArityMismatch,
                 f->name + " expects " + std::to_string(arity) + " arguments, got " + std::to_string(args.size()), e);
        std::vector<TermPtr> targs;
        for (std::size_t i = 0; i < args.size(); ++i)
            targs.push_back(i == 0 && b != nullptr && b->takes_fn ? fn_argument(args[i], bound) : term(args[i], bound));
        return make_call(f, std::move(targs));
    }

    const World& w_;
    const SelfSignature* self_;
};

}  // namespace

TermPtr translate_term(const Value& e, const SymbolSet& bound, const World& w, const SelfSignature* self) {
    return Translator(w, self).term(e, bound);
}

std::shared_ptr<const LambdaObj> translate_lambda(const Value& e, const World& w) {
    std::vector<Value> parts = list_to_vector(e);
    if (!is_true_list(e) || parts.size() < 3 || !is_true_list(parts[1]))
        fail(ErrorKind::MalformedDefun, "malformed lambda", e);
    auto fn = std::make_shared<LambdaObj>();
    SymbolSet bound;
    for (const Value& f : list_to_vector(parts[1])) {
        if (!is_variable_name(f)) fail(ErrorKind::MalformedDefun, "lambda formals must be variables", e);
        const Symbol* s = f.as_symbol();
        if (bound.count(s) != 0) fail(ErrorKind::MalformedDefun, "duplicate lambda formal", e);
        bound.insert(s);
        fn->formals.push_back(s);
    }
    std::size_t i = 2;
    for (; i + 1 < parts.size(); ++i) {
        const Value& d = parts[i];
        if (!d.is_pair() || !d.car().is(sym::declare())) fail(ErrorKind::MalformedDefun, "malformed lambda", e);
        for (const Value& item : list_to_vector(d.cdr())) {
            if (item.car().is(sym::ignorable()) || (item.car().is_symbol() && item.car().as_symbol()->name == "IGNORE"))
                continue;
            if (!item.car().is(sym::xargs())) fail(ErrorKind::MalformedDefun, "unsupported declaration", e);
            std::vector<Value> kv = list_to_vector(item.cdr());
            for (std::size_t k = 0; k + 1 < kv.size(); k += 2) {
                if (kv[k].is(sym::kw_guard())) fn->guard = translate_term(kv[k + 1], bound, w);
                else if (!(kv[k].is_symbol() && kv[k].as_symbol()->name == ":SPLIT-TYPES"))
                    fail(ErrorKind::MalformedDefun, "unsupported lambda xarg", e);
            }
        }
    }
    if (i != parts.size() - 1) fail(ErrorKind::MalformedDefun, "malformed lambda", e);
    fn->body = translate_term(parts[i], bound, w);
    auto fv = free_vars(*fn->body);
    if (fn->guard) {
        auto gv = free_vars(*fn->guard);
        fv.insert(fv.end(), gv.begin(), gv.end());
    }
    for (const Symbol* s : fv)
        if (bound.count(s) == 0) fail(ErrorKind::UnboundVariable, "lambda object is not closed over " + s->name, e);
    return fn;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

class Evaluator {
public:
    Evaluator(const World& w, EvalContext& ctx) : w_(w), ctx_(ctx), interp_{w, ctx} {}

    Value eval(const Term& t, Environment& env, const Definition* enclosing, bool under_apply) {
        switch (t.kind) {
        case TermKind::Const: return t.value;
        case TermKind::Var: return env.lookup(t.symbol);
        case TermKind::If:
            return eval(*t.args[0], env, enclosing, under_apply).truthy()
                       ? eval(*t.args[1], env, enclosing, under_apply)
                       : eval(*t.args[2], env, enclosing, under_apply);
        case TermKind::Let: {
            ArgVec values;
            for (const auto& a : t.args) values.push_back(eval(*a, env, enclosing, under_apply));
            std::size_t mark = env.size();
            for (std::size_t i = 0; i < t.vars.size(); ++i) env.bind(t.vars[i], std::move(values[i]));
            Value r = eval(*t.body, env, enclosing, under_apply);
            env.truncate(mark);
            return r;
        }
        case TermKind::Lambda: return Value::lambda(t.lambda);
        case TermKind::Loop: return eval_loop_node(*t.loop, env, w_, ctx_, enclosing, under_apply);
        case TermKind::Call: return call(t, env, enclosing, under_apply);
        }
        return Value();
    }

    Value call_user(const Definition& def, std::span<const Value> args) {
        DepthGuard guard(ctx_);
        Environment frame;
        for (std::size_t i = 0; i < def.formals.size(); ++i) frame.bind(def.formals[i], args[i]);
        return eval(*def.body, frame, &def, false);
    }

    Value apply_lambda(const LambdaObj& fn, std::span<const Value> args) {
        DepthGuard guard(ctx_);
        Environment frame;
        for (std::size_t i = 0; i < fn.formals.size(); ++i) frame.bind(fn.formals[i], args[i]);
        return eval(*fn.body, frame, nullptr, true);
    }

    Value apply_named(const Symbol* f, std::span<const Value> args) {
        if (const Builtin* b = find_builtin(f)) {
            if (!b->applicable)
                throw Error(ErrorKind::UnwarrantedFunction, f->name + " cannot be applied by apply$",
                            {Value::symbol(f)});
            return b->fn(args, interp_);
        }
        const Definition* def = w_.find(f);
        if (def == nullptr)
            throw Error(ErrorKind::UnknownMacroOrFunction, "unknown function " + f->name, {Value::symbol(f)});
        if (!w_.warranted(f))
            throw Error(ErrorKind::UnwarrantedFunction, f->name + " has no warrant", {Value::symbol(f)});
        if (ctx_.is_proof() && ctx_.assumed().count(f) == 0) {
            ctx_.force(f);
            throw Error(ErrorKind::ForcedWarrant, "forced warrant hypothesis (APPLY$-WARRANT-" + f->name + ")",
                        {Value::symbol(f)});
        }
        return call_user(*def, args);
    }

private:
    struct DepthGuard {
        explicit DepthGuard(EvalContext& c) : ctx(c) {
            if (++ctx.depth > ctx.max_depth) {
                --ctx.depth;
                throw Error(ErrorKind::RecursionDepthExceeded,
                            "recursion depth limit of " + std::to_string(ctx.max_depth) + " exceeded");
            }
        }
        ~DepthGuard() { --ctx.depth; }
        EvalContext& ctx;
    };

    Value call(const Term& t, Environment& env, const Definition* enclosing, bool under_apply) {
        if (t.warrant_of != nullptr) return Value::boolean(ctx_.warrant_holds(t.warrant_of, w_));
        ArgVec args;
        for (const auto& a : t.args) args.push_back(eval(*a, env, enclosing, under_apply));
        const std::span<const Value> argv(args.data(), args.size());
        if (t.builtin != nullptr) return t.builtin->fn(argv, interp_);
        // Inside a lambda object being applied, a call of a user function is
        // itself an apply$ and needs the function's warrant.
        if (under_apply) return apply_named(t.symbol, argv);
        const Definition* def = w_.find(t.symbol);
        if (def == nullptr)
            throw Error(ErrorKind::UnknownMacroOrFunction, "unknown function " + t.symbol->name,
                        {Value::symbol(t.symbol)});
        return call_user(*def, argv);
    }

    const World& w_;
    EvalContext& ctx_;
    Interp interp_;
};

}  // namespace

Value eval_term(const Term& t, Environment& env, const World& w, EvalContext& ctx) {
    return Evaluator(w, ctx).eval(t, env, nullptr, false);
}

Value call_definition(const Definition& def, std::span<const Value> args, const World& w, EvalContext& ctx) {
    if (args.size() != def.formals.size())
        throw Error(ErrorKind::ArityMismatch, def.name->name + " expects " + std::to_string(def.formals.size()) +
                                                  " arguments");
    return Evaluator(w, ctx).call_user(def, args);
}

FnObject fn_from_value(const Value& v, const World& w) {
    if (v.is_lambda()) return FnObject::of(v.as_lambda());
    if (v.is_symbol() && !v.is_nil()) return FnObject::named(v.as_symbol());
    if (v.is_pair() && v.car().is(sym::lambda())) return FnObject::of(translate_lambda(v, w));
    throw Error(ErrorKind::UnknownMacroOrFunction, "not a function object: " + print_sexpr(v), {v});
}

std::size_t fn_arity(const FnObject& fn, const World& w) {
    if (!fn.is_named()) return fn.lambda->formals.size();
    if (const Builtin* b = find_builtin(fn.name)) return static_cast<std::size_t>(b->arity);
    if (const Definition* d = w.find(fn.name)) return d->formals.size();
    throw Error(ErrorKind::UnknownMacroOrFunction, "unknown function " + fn.name->name, {Value::symbol(fn.name)});
}

Value apply_fn(const FnObject& fn, std::span<const Value> args, const World& w, EvalContext& ctx) {
    std::size_t arity = fn_arity(fn, w);
    if (args.size() != arity)
        throw Error(ErrorKind::ArityMismatch, "apply$ of a function of arity " + std::to_string(arity) + " to " +
                                                  std::to_string(args.size()) + " arguments");
    Evaluator ev(w, ctx);
    if (fn.is_named()) return ev.apply_named(fn.name, args);
    return ev.apply_lambda(*fn.lambda, args);
}

// ---------------------------------------------------------------------------
// Definitions

namespace {

struct Xargs {
    Value guard = Value::t();
    bool verify_guards = true;
};

std::shared_ptr<Definition> parse_defun(const Value& form, const World& w) {
    std::vector<Value> parts = list_to_vector(form);
    if (!is_true_list(form) || parts.size() < 4) fail(ErrorKind::MalformedDefun, "malformed definition", form);
    if (!is_variable_name(parts[1])) fail(ErrorKind::MalformedDefun, "definition name must be a symbol", form);
    auto def = std::make_shared<Definition>();
    def->name = parts[1].as_symbol();
    def->source = form;
    if (w.find(def->name) != nullptr || find_builtin(def->name) != nullptr)
        throw Error(ErrorKind::Redefinition, "redefinition of " + def->name->name, {parts[1]});
    if (!is_true_list(parts[2])) fail(ErrorKind::MalformedDefun, "formals must be a list", form);
    SymbolSet bound;
    for (const Value& f : list_to_vector(parts[2])) {
        if (!is_variable_name(f)) fail(ErrorKind::MalformedDefun, "formals must be variables", form);
        if (bound.count(f.as_symbol()) != 0) fail(ErrorKind::MalformedDefun, "duplicate formal", form);
        bound.insert(f.as_symbol());
        def->formals.push_back(f.as_symbol());
    }
    Xargs xargs;
    std::size_t i = 3;
    for (; i + 1 < parts.size(); ++i) {
        const Value& d = parts[i];
        if (d.is_string()) continue;  // documentation string
        if (!d.is_pair() || !d.car().is(sym::declare())) fail(ErrorKind::MalformedDefun, "expected DECLARE", form);
        for (const Value& item : list_to_vector(d.cdr())) {
            const Value& head = item.car();
            if (head.is(sym::ignorable()) || (head.is_symbol() && head.as_symbol()->name == "IGNORE")) continue;
            if (!head.is(sym::xargs())) fail(ErrorKind::MalformedDefun, "unsupported declaration", form);
            std::vector<Value> kv = list_to_vector(item.cdr());
            if (kv.size() % 2 != 0) fail(ErrorKind::MalformedDefun, "odd XARGS list", form);
            for (std::size_t k = 0; k < kv.size(); k += 2) {
                if (kv[k].is(sym::kw_guard())) xargs.guard = kv[k + 1];
                else if (kv[k].is(sym::kw_verify_guards())) xargs.verify_guards = kv[k + 1].truthy();
                else fail(ErrorKind::MalformedDefun, "unsupported XARGS keyword", form);
            }
        }
    }
    if (i != parts.size() - 1) fail(ErrorKind::MalformedDefun, "missing body", form);
    def->guard = translate_term(xargs.guard, bound, w);
    SelfSignature self{def->name, def->formals.size()};
    def->body = translate_term(parts[i], bound, w, &self);
    def->guard_verified = xargs.verify_guards;
    def->fast = make_fast_fn_cache();
    return def;
}

}  // namespace

bool is_definition_form(const Value& form) {
    const Value& h = form.car();
    return form.is_pair() && (h.is(sym::defun()) || h.is(sym::defun_dollar()) || h.is(sym::defwarrant()) ||
                              h.is(sym::defconst()) || h.is(sym::verify_guards()));
}

World define(const Value& form, const World& w) {
    const Value& head = form.car();
    if (head.is(sym::defun()) || head.is(sym::defun_dollar())) {
        auto def = parse_defun(form, w);
        if (def->guard_verified) {
            GuardVerification v = verify_definition_guards(*def, w);
            def->guard_verified = v.verified;
            def->verification_note = v.note;
        } else {
            def->verification_note = ":VERIFY-GUARDS NIL";
        }
        const Symbol* name = def->name;
        World out = w.with_definition(std::move(def));
        if (head.is(sym::defun_dollar())) out = out.with_warrant(name);
        return out;
    }
    if (head.is(sym::defwarrant())) {
        if (length(form) != 2 || !form.cdr().car().is_symbol()) fail(ErrorKind::MalformedDefun, "malformed DEFWARRANT", form);
        return w.with_warrant(form.cdr().car().as_symbol());
    }
    if (head.is(sym::defconst())) {
        std::vector<Value> parts = list_to_vector(form);
        if (parts.size() != 3 || !parts[1].is_symbol() || !is_constant_name(parts[1].as_symbol()))
            fail(ErrorKind::MalformedDefun, "malformed DEFCONST", form);
        TermPtr t = translate_term(parts[2], {}, w);
        Environment env;
        EvalContext ctx = EvalContext::top_level();
        return w.with_constant(parts[1].as_symbol(), eval_term(*t, env, w, ctx));
    }
    if (head.is(sym::verify_guards())) {
        if (length(form) != 2 || !form.cdr().car().is_symbol()) fail(ErrorKind::MalformedDefun, "malformed VERIFY-GUARDS", form);
        auto existing = w.find_shared(form.cdr().car().as_symbol());
        if (!existing) fail(ErrorKind::UnknownMacroOrFunction, "no such definition", form);
        if (existing->guard_verified) return w;
        auto def = std::make_shared<Definition>(*existing);
        GuardVerification v = verify_definition_guards(*def, w);
        if (!v.verified) throw Error(ErrorKind::EvaluationError, "guard verification failed for " + def->name->name + ": " + v.note);
        def->guard_verified = true;
        def->verification_note = v.note;
        def->fast = make_fast_fn_cache();
        return w.with_updated_definition(std::move(def));
    }
    fail(ErrorKind::MalformedDefun, "not a definition form", form);
}

}  // namespace loopd
