#include "loopd/translate.hpp"

#include "loopd/error.hpp"
#include "loopd/fastpath.hpp"
#include "loopd/kernel.hpp"
#include "loopd/sexpr.hpp"
#include "loopd/symbols.hpp"

namespace loopd {

ScionKind scion_for(LoopOp op) {
    switch (op) {
    case LoopOp::Sum: return ScionKind::Sum;
    case LoopOp::Collect: return ScionKind::Collect;
    case LoopOp::Append: return ScionKind::Append;
    case LoopOp::Always: return ScionKind::Always;
    case LoopOp::Thereis: return ScionKind::Thereis;
    }
    return ScionKind::Collect;
}

std::string_view scion_name(ScionKind kind, bool fancy) {
    switch (kind) {
    case ScionKind::Sum: return fancy ? "SUM$+" : "SUM$";
    case ScionKind::Collect: return fancy ? "COLLECT$+" : "COLLECT$";
    case ScionKind::Append: return fancy ? "APPEND$+" : "APPEND$";
    case ScionKind::Always: return fancy ? "ALWAYS$+" : "ALWAYS$";
    case ScionKind::Thereis: return fancy ? "THEREIS$+" : "THEREIS$";
    case ScionKind::Until: return fancy ? "UNTIL$+" : "UNTIL$";
    case ScionKind::When: return fancy ? "WHEN$+" : "WHEN$";
    }
    return "";
}

namespace {

TermPtr conj(std::vector<TermPtr> parts) {
    std::vector<TermPtr> kept;
    for (auto& p : parts)
        if (p && !is_const(*p, Value::t())) kept.push_back(std::move(p));
    if (kept.empty()) return nullptr;
    return make_and(kept);
}

// Of-type recognizers of every iteration variable plus the clause's own
// :GUARD, or null when all of it is trivially true.
TermPtr recognizers(const LoopSpec& spec, const TermPtr& extra) {
    std::vector<TermPtr> parts;
    for (const auto& it : spec.iters)
        if (it.type) parts.push_back(typespec_term(*it.type, make_var(it.var)));
    parts.push_back(extra);
    return conj(std::move(parts));
}

// (CAR (CDR ... (CDR v))) with i CDRs.
TermPtr nth_term(std::size_t i, const Symbol* v) {
    TermPtr t = make_var(v);
    for (std::size_t k = 0; k < i; ++k) t = make_call(sym::cdr(), {t});
    return make_call(sym::car(), {t});
}

class LoopTranslator {
public:
    explicit LoopTranslator(const LoopSpec& spec) : spec_(spec), cls_(classify(spec)) {}

    ScionCall run() {
        ScionCall sc;
        sc.op = spec_.op;
        sc.fancy = !cls_.plain;
        sc.body = fn(spec_.body, spec_.body_guard);
        if (spec_.until) sc.until = fn(spec_.until->test, spec_.until->guard);
        if (spec_.when) sc.when = fn(spec_.when->test, spec_.when->guard);
        if (sc.fancy) {
            for (const Symbol* g : cls_.globals) sc.globals.push_back(make_var(g));
            sc.target.kind = TargetExpr::Kind::Zip;
            for (const auto& it : spec_.iters) sc.target.parts.push_back(target(it.target));
        } else {
            sc.target = target(spec_.iters[0].target);
        }
        return sc;
    }

private:
    static TargetExpr target(const TargetClause& c) {
        TargetExpr t;
        switch (c.kind) {
        case TargetKind::In:
            t.kind = TargetExpr::Kind::List;
            t.lst = c.lst;
            break;
        case TargetKind::On:
            t.kind = TargetExpr::Kind::Tails;
            t.lst = c.lst;
            break;
        case TargetKind::FromToBy:
            t.kind = TargetExpr::Kind::FromToBy;
            t.lo = c.lo;
            t.hi = c.hi;
            t.by = c.by;
            break;
        }
        return t;
    }

    FnObject fn(const TermPtr& body, const TermPtr& guard) {
        auto l = std::make_shared<LambdaObj>();
        TermPtr inner_guard = recognizers(spec_, guard);
        if (!sc_fancy()) {
            l->formals = {spec_.iters[0].var};
            l->guard = inner_guard;
            l->body = body;
            return FnObject::of(std::move(l));
        }
        const Symbol* gv = sym::loop_gvars();
        const Symbol* iv = sym::loop_ivars();
        l->formals = {gv, iv};
        std::vector<const Symbol*> vars;
        std::vector<TermPtr> values;
        for (std::size_t i = 0; i < cls_.globals.size(); ++i) {
            vars.push_back(cls_.globals[i]);
            values.push_back(nth_term(i, gv));
        }
        for (std::size_t i = 0; i < spec_.iters.size(); ++i) {
            vars.push_back(spec_.iters[i].var);
            values.push_back(nth_term(i, iv));
        }
        l->body = make_let(vars, values, body);
        auto len_is = [](const Symbol* v, std::size_t n) {
            return make_call(sym::equal(), {make_call(sym::len(), {make_var(v)}),
                                            make_const(Value::integer(static_cast<std::int64_t>(n)))});
        };
        std::vector<TermPtr> parts{make_call(sym::true_listp(), {make_var(gv)}), len_is(gv, cls_.globals.size()),
                                   make_call(sym::true_listp(), {make_var(iv)}), len_is(iv, spec_.iters.size())};
        if (inner_guard) parts.push_back(make_let(vars, values, inner_guard));
        l->guard = make_and(parts);
        return FnObject::of(std::move(l));
    }

    bool sc_fancy() const { return !cls_.plain; }

    const LoopSpec& spec_;
    Classification cls_;
};

Value sym_v(const Symbol* s) { return Value::symbol(s); }

using Render = Value (*)(const Term&);

Value fn_sexpr(const FnObject& f, bool sugar) {
    if (f.is_named()) return list({sym_v(sym::quote()), sym_v(f.name)});
    if (sugar) return untranslate_lambda(*f.lambda);
    return list({sym_v(sym::quote()), lambda_to_sexpr(*f.lambda)});
}

Value list_of_terms(const std::vector<TermPtr>& ts, bool sugar) {
    if (sugar) {
        if (ts.empty()) return Value();
        std::vector<Value> items{sym_v(sym::list())};
        for (const auto& t : ts) items.push_back(untranslate(*t));
        return list_from(items);
    }
    Value acc = list({sym_v(sym::quote()), Value()});
    for (auto it = ts.rbegin(); it != ts.rend(); ++it)
        acc = list({sym_v(sym::cons()), term_to_sexpr(**it), acc});
    return acc;
}

Value target_sexpr(const TargetExpr& t, bool sugar) {
    Render r = sugar ? static_cast<Render>(&untranslate) : static_cast<Render>(&term_to_sexpr);
    switch (t.kind) {
    case TargetExpr::Kind::List: return r(*t.lst);
    case TargetExpr::Kind::Tails: return list({sym_v(sym::tails()), r(*t.lst)});
    case TargetExpr::Kind::FromToBy: return list({sym_v(sym::from_to_by()), r(*t.lo), r(*t.hi), r(*t.by)});
    case TargetExpr::Kind::Zip: {
        std::vector<Value> parts;
        for (const auto& p : t.parts) parts.push_back(target_sexpr(p, sugar));
        Value lst;
        if (sugar) {
            parts.insert(parts.begin(), sym_v(sym::list()));
            lst = list_from(parts);
        } else {
            lst = list({sym_v(sym::quote()), Value()});
            for (auto it = parts.rbegin(); it != parts.rend(); ++it) lst = list({sym_v(sym::cons()), *it, lst});
        }
        return list({sym_v(sym::loop_as()), lst});
    }
    }
    return Value();
}

Value render(const ScionCall& sc, bool sugar) {
    Value acc = target_sexpr(sc.target, sugar);
    Value globals = sc.fancy ? list_of_terms(sc.globals, sugar) : Value();
    auto wrap = [&](ScionKind k, const FnObject& f) {
        Value name = Value::symbol(scion_name(k, sc.fancy));
        acc = sc.fancy ? list({name, fn_sexpr(f, sugar), globals, acc}) : list({name, fn_sexpr(f, sugar), acc});
    };
    if (sc.until) wrap(ScionKind::Until, *sc.until);
    if (sc.when) wrap(ScionKind::When, *sc.when);
    wrap(scion_for(sc.op), sc.body);
    return acc;
}

}  // namespace

ScionCall translate_loop(const LoopSpec& spec) { return LoopTranslator(spec).run(); }

Value untranslate(const ScionCall& sc) { return render(sc, true); }
Value scion_to_sexpr(const ScionCall& sc) { return render(sc, false); }

// ---------------------------------------------------------------------------
// Reading the IR back

namespace {

struct ScionInfo {
    ScionKind kind;
    bool fancy;
};

std::optional<ScionInfo> scion_info(const Symbol* s) {
    static const ScionKind kinds[] = {ScionKind::Sum,     ScionKind::Collect, ScionKind::Append, ScionKind::Always,
                                      ScionKind::Thereis, ScionKind::Until,   ScionKind::When};
    for (ScionKind k : kinds)
        for (bool f : {false, true})
            if (s->name == scion_name(k, f)) return ScionInfo{k, f};
    return std::nullopt;
}

[[noreturn]] void bad_ir(const Value& e) {
    throw Error(ErrorKind::MalformedLoop, "not a scion call: " + print_sexpr(e), {e});
}

bool is_call_of(const Term& t, const Symbol* f) { return t.kind == TermKind::Call && t.symbol == f; }

// Elements of a translated (CONS a (CONS b 'NIL)) chain.
std::optional<std::vector<TermPtr>> cons_elements(const TermPtr& t) {
    std::vector<TermPtr> out;
    const Term* cur = t.get();
    while (is_call_of(*cur, sym::cons())) {
        out.push_back(cur->args[0]);
        cur = cur->args[1].get();
    }
    if (!is_const(*cur, Value())) return std::nullopt;
    return out;
}

FnObject fn_of(const TermPtr& t, const Value& e) {
    if (t->kind == TermKind::Lambda) return FnObject::of(t->lambda);
    if (t->kind == TermKind::Const && t->value.is_symbol() && !t->value.is_nil())
        return FnObject::named(t->value.as_symbol());
    bad_ir(e);
}

TargetExpr target_of(const TermPtr& t, const Value& e) {
    TargetExpr out;
    if (is_call_of(*t, sym::tails())) {
        out.kind = TargetExpr::Kind::Tails;
        out.lst = t->args[0];
    } else if (is_call_of(*t, sym::from_to_by())) {
        out.kind = TargetExpr::Kind::FromToBy;
        out.lo = t->args[0];
        out.hi = t->args[1];
        out.by = t->args[2];
    } else if (is_call_of(*t, sym::loop_as())) {
        auto parts = cons_elements(t->args[0]);
        if (!parts) bad_ir(e);
        out.kind = TargetExpr::Kind::Zip;
        for (const auto& p : *parts) out.parts.push_back(target_of(p, e));
    } else {
        out.kind = TargetExpr::Kind::List;
        out.lst = t;
    }
    return out;
}

}  // namespace

ScionCall scion_call_from_sexpr(const Value& e, const SymbolSet& outer, const World& w) {
    TermPtr t = translate_term(e, outer, w);
    if (t->kind != TermKind::Call) bad_ir(e);
    auto outer_info = scion_info(t->symbol);
    if (!outer_info || outer_info->kind == ScionKind::Until || outer_info->kind == ScionKind::When) bad_ir(e);
    ScionCall sc;
    sc.fancy = outer_info->fancy;
    static const LoopOp ops[] = {LoopOp::Sum, LoopOp::Collect, LoopOp::Append, LoopOp::Always, LoopOp::Thereis};
    for (LoopOp op : ops)
        if (scion_for(op) == outer_info->kind) sc.op = op;
    std::size_t target_index = sc.fancy ? 2 : 1;
    sc.body = fn_of(t->args[0], e);
    if (sc.fancy) {
        auto gs = cons_elements(t->args[1]);
        if (!gs) bad_ir(e);
        sc.globals = *gs;
    }
    TermPtr rest = t->args[target_index];
    for (ScionKind k : {ScionKind::When, ScionKind::Until}) {
        if (rest->kind != TermKind::Call) break;
        auto info = scion_info(rest->symbol);
        if (!info || info->kind != k) continue;
        if (info->fancy != sc.fancy) bad_ir(e);
        FnObject f = fn_of(rest->args[0], e);
        if (k == ScionKind::When) sc.when = f;
        else sc.until = f;
        rest = rest->args[target_index];
    }
    sc.target = target_of(rest, e);
    return sc;
}

namespace {

bool fn_equal(const FnObject& a, const FnObject& b) {
    if (a.is_named() || b.is_named()) return a.name == b.name;
    return lambda_equal(*a.lambda, *b.lambda);
}

bool opt_fn_equal(const std::optional<FnObject>& a, const std::optional<FnObject>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || fn_equal(*a, *b);
}

bool target_equal(const TargetExpr& a, const TargetExpr& b) {
    if (a.kind != b.kind || a.parts.size() != b.parts.size()) return false;
    if (!term_equal(a.lst, b.lst) || !term_equal(a.lo, b.lo) || !term_equal(a.hi, b.hi) || !term_equal(a.by, b.by))
        return false;
    for (std::size_t i = 0; i < a.parts.size(); ++i)
        if (!target_equal(a.parts[i], b.parts[i])) return false;
    return true;
}

}  // namespace

bool scion_call_equal(const ScionCall& a, const ScionCall& b) {
    if (a.op != b.op || a.fancy != b.fancy || a.globals.size() != b.globals.size()) return false;
    if (!fn_equal(a.body, b.body) || !opt_fn_equal(a.until, b.until) || !opt_fn_equal(a.when, b.when)) return false;
    for (std::size_t i = 0; i < a.globals.size(); ++i)
        if (!term_equal(a.globals[i], b.globals[i])) return false;
    return target_equal(a.target, b.target);
}

std::shared_ptr<const LoopNode> make_loop_node(LoopSpec spec) {
    auto node = std::make_shared<LoopNode>();
    auto s = std::make_shared<const LoopSpec>(std::move(spec));
    node->scion = std::make_shared<const ScionCall>(translate_loop(*s));
    node->spec = std::move(s);
    node->fast = make_fast_loop_cache();
    return node;
}

}  // namespace loopd
