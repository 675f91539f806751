#include "loopd/scions.hpp"

#include <array>
#include <string>

#include "loopd/error.hpp"
#include "loopd/sexpr.hpp"

namespace loopd {

Value from_to_by(const Value& lo, const Value& hi, const Value& by) {
    if (!lo.is_integer() || !hi.is_integer())
        throw Error(ErrorKind::NonIntegerBound,
                    "FROM-TO-BY bounds must be integers, got " + print_sexpr(lo) + " and " + print_sexpr(hi),
                    {lo, hi});
    if (!by.is_integer() || int_compare(by, Value::integer(0)) <= 0)
        throw Error(ErrorKind::NonPositiveStep, "FROM-TO-BY step must be a positive integer, got " + print_sexpr(by),
                    {by});
    if (int_compare(lo, hi) > 0) return Value();
    // Cons from the last element down so the list is built in one pass.
    Value last = int_add(lo, int_mul(by, int_floor(int_add(hi, int_neg(lo)), by)));
    Value out;
    if (last.is_fixnum() && lo.is_fixnum() && by.is_fixnum()) {
        const std::int64_t l = lo.fixnum(), step = by.fixnum();
        for (std::int64_t v = last.fixnum();; v -= step) {
            out = cons(Value::integer(v), std::move(out));
            if (v == l) break;
        }
        return out;
    }
    Value neg_by = int_neg(by);
    for (Value v = last;; v = int_add(v, neg_by)) {
        out = cons(v, std::move(out));
        if (int_compare(v, lo) == 0) break;
    }
    return out;
}

Value tails(const Value& lst) {
    ListBuilder b;
    for (const Value* p = &lst; p->is_pair(); p = &p->cdr()) b.push_back(*p);
    return b.finish();
}

Value loop_as(const Value& lists) {
    std::vector<const Value*> cursors;
    for (const Value* p = &lists; p->is_pair(); p = &p->cdr()) cursors.push_back(&p->car());
    if (cursors.empty()) return Value();
    ListBuilder out;
    for (;;) {
        ListBuilder tuple;
        for (const Value*& c : cursors) {
            if (!c->is_pair()) return out.finish();
            tuple.push_back(c->car());
            c = &c->cdr();
        }
        out.push_back(tuple.finish());
    }
}

namespace {

Value fn_value(const FnObject& fn) {
    return fn.is_named() ? Value::symbol(fn.name) : Value::lambda(fn.lambda);
}

class TraceScope {
public:
    TraceScope(EvalContext& ctx, ScionKind kind, bool fancy, std::span<const Value> args)
        : ctx_(ctx), name_(scion_name(kind, fancy)) {
        if (ctx_.tracer == nullptr) return;
        ++ctx_.trace_depth;
        ctx_.tracer->enter(ctx_.trace_depth, name_, args);
    }
    ~TraceScope() {
        if (ctx_.tracer != nullptr) --ctx_.trace_depth;
    }
    Value done(Value v) {
        if (ctx_.tracer != nullptr) ctx_.tracer->exit(ctx_.trace_depth, name_, v);
        return v;
    }

private:
    EvalContext& ctx_;
    std::string_view name_;
};

// Shared fold. `call` applies the function object to one element.
template <class Call>
Value fold(ScionKind kind, const Value& lst, Call&& call) {
    switch (kind) {
    case ScionKind::Sum: {
        Value acc = Value::integer(0);
        for (const Value* p = &lst; p->is_pair(); p = &p->cdr()) acc = int_add(acc, fix(call(p->car())));
        return acc;
    }
    case ScionKind::Collect: {
        ListBuilder b;
        for (const Value* p = &lst; p->is_pair(); p = &p->cdr()) b.push_back(call(p->car()));
        return b.finish();
    }
    case ScionKind::Append: {
        ListBuilder b;
        for (const Value* p = &lst; p->is_pair(); p = &p->cdr()) {
            Value v = call(p->car());
            for (const Value* q = &v; q->is_pair(); q = &q->cdr()) b.push_back(q->car());
        }
        return b.finish();
    }
    case ScionKind::Always:
        for (const Value* p = &lst; p->is_pair(); p = &p->cdr())
            if (call(p->car()).is_nil()) return Value();
        return Value::t();
    case ScionKind::Thereis:
        for (const Value* p = &lst; p->is_pair(); p = &p->cdr()) {
            Value v = call(p->car());
            if (v.truthy()) return v;
        }
        return Value();
    case ScionKind::Until: {
        ListBuilder b;
        for (const Value* p = &lst; p->is_pair(); p = &p->cdr()) {
            if (call(p->car()).truthy()) break;
            b.push_back(p->car());
        }
        return b.finish();
    }
    case ScionKind::When: {
        ListBuilder b;
        for (const Value* p = &lst; p->is_pair(); p = &p->cdr())
            if (call(p->car()).truthy()) b.push_back(p->car());
        return b.finish();
    }
    }
    return Value();
}

}  // namespace

Value plain_scion(ScionKind kind, const FnObject& fn, const Value& lst, const World& w, EvalContext& ctx) {
    std::array<Value, 2> shown;
    if (ctx.tracer != nullptr) shown = {fn_value(fn), lst};
    TraceScope trace(ctx, kind, false, shown);
    return trace.done(fold(kind, lst, [&](const Value& e) {
        return apply_fn(fn, std::span<const Value>(&e, 1), w, ctx);
    }));
}

Value fancy_scion(ScionKind kind, const FnObject& fn, const Value& globals, const Value& lst, const World& w,
                  EvalContext& ctx) {
    std::array<Value, 3> shown;
    if (ctx.tracer != nullptr) shown = {fn_value(fn), globals, lst};
    TraceScope trace(ctx, kind, true, shown);
    std::array<Value, 2> args{globals, Value()};
    return trace.done(fold(kind, lst, [&](const Value& e) {
        args[1] = e;
        return apply_fn(fn, args, w, ctx);
    }));
}

Value eval_target(const TargetExpr& t, Environment& env, const World& w, EvalContext& ctx) {
    switch (t.kind) {
    case TargetExpr::Kind::List: return true_list_fix(eval_term(*t.lst, env, w, ctx));
    case TargetExpr::Kind::Tails: return tails(eval_term(*t.lst, env, w, ctx));
    case TargetExpr::Kind::FromToBy:
        return from_to_by(eval_term(*t.lo, env, w, ctx), eval_term(*t.hi, env, w, ctx), eval_term(*t.by, env, w, ctx));
    case TargetExpr::Kind::Zip: {
        ListBuilder lists;
        for (const auto& p : t.parts) lists.push_back(eval_target(p, env, w, ctx));
        return loop_as(lists.finish());
    }
    }
    return Value();
}

Value eval_loop_reference(const ScionCall& sc, Environment& env, const World& w, EvalContext& ctx) {
    Value lst = eval_target(sc.target, env, w, ctx);
    if (!sc.fancy) {
        if (sc.until) lst = plain_scion(ScionKind::Until, *sc.until, lst, w, ctx);
        if (sc.when) lst = plain_scion(ScionKind::When, *sc.when, lst, w, ctx);
        return plain_scion(scion_for(sc.op), sc.body, lst, w, ctx);
    }
    ListBuilder gb;
    for (const auto& g : sc.globals) gb.push_back(eval_term(*g, env, w, ctx));
    Value globals = gb.finish();
    if (sc.until) lst = fancy_scion(ScionKind::Until, *sc.until, globals, lst, w, ctx);
    if (sc.when) lst = fancy_scion(ScionKind::When, *sc.when, globals, lst, w, ctx);
    return fancy_scion(scion_for(sc.op), sc.body, globals, lst, w, ctx);
}

}  // namespace loopd
