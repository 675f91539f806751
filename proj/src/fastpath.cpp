#include "loopd/fastpath.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <mutex>

#include <boost/container/small_vector.hpp>

#include "loopd/error.hpp"
#include "loopd/scions.hpp"
#include "loopd/sexpr.hpp"
#include "loopd/symbols.hpp"

namespace loopd {

const char* exec_mode_name(ExecMode m) {
    switch (m) {
    case ExecMode::Trusted: return "TRUSTED";
    case ExecMode::Checked: return "CHECKED";
    case ExecMode::ReferenceOnly: return "REFERENCE";
    }
    return "";
}

namespace {

// ---------------------------------------------------------------------------
// Runtime: a segmented value stack of slot frames, one per thread.

class ValueStack {
public:
    static constexpr std::size_t kChunk = std::size_t{1} << 16;

    struct Mark {
        std::size_t chunk, top;
    };

    Mark mark() const { return {chunk_, top_}; }

    Value* push(std::size_t n) {
        if (n > kChunk) throw Error(ErrorKind::EvaluationError, "frame too large");
        if (chunks_.empty()) chunks_.push_back(std::make_unique<Value[]>(kChunk));
        if (top_ + n > kChunk) {
            ++chunk_;
            top_ = 0;
            if (chunk_ == chunks_.size()) chunks_.push_back(std::make_unique<Value[]>(kChunk));
        }
        Value* f = chunks_[chunk_].get() + top_;
        top_ += n;
        return f;
    }

    void pop(Mark m, Value* frame, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) frame[i] = Value();
        chunk_ = m.chunk;
        top_ = m.top;
    }

private:
    std::vector<std::unique_ptr<Value[]>> chunks_;
    std::size_t chunk_ = 0;
    std::size_t top_ = 0;
};

struct Machine {
    ValueStack stack;
    const World* w = nullptr;
    EvalContext* ctx = nullptr;
};

thread_local Machine tl_machine;

class MachineScope {
public:
    MachineScope(const World& w, EvalContext& ctx) : saved_w_(tl_machine.w), saved_ctx_(tl_machine.ctx) {
        tl_machine.w = &w;
        tl_machine.ctx = &ctx;
    }
    ~MachineScope() {
        tl_machine.w = saved_w_;
        tl_machine.ctx = saved_ctx_;
    }

private:
    const World* saved_w_;
    EvalContext* saved_ctx_;
};

class Frame {
public:
    Frame(Machine& m, std::size_t n) : m_(m), mark_(m.stack.mark()), fp_(m.stack.push(n)), n_(n) {}
    ~Frame() { m_.stack.pop(mark_, fp_, n_); }
    Value* fp() const { return fp_; }

private:
    Machine& m_;
    ValueStack::Mark mark_;
    Value* fp_;
    std::size_t n_;
};

class Depth {
public:
    explicit Depth(EvalContext& c) : ctx_(c) {
        if (++ctx_.depth > ctx_.max_depth) {
            --ctx_.depth;
            throw Error(ErrorKind::RecursionDepthExceeded,
                        "recursion depth limit of " + std::to_string(ctx_.max_depth) + " exceeded");
        }
    }
    ~Depth() { --ctx_.depth; }

private:
    EvalContext& ctx_;
};

// ---------------------------------------------------------------------------
// Compiled nodes

struct CNode {
    virtual ~CNode() = default;
    virtual Value eval(Machine& m, Value* fp) const = 0;
};
using CNodePtr = std::unique_ptr<CNode>;

struct ConstNode final : CNode {
    explicit ConstNode(Value v) : v(std::move(v)) {}
    Value eval(Machine&, Value*) const override { return v; }
    Value v;
};

struct SlotNode final : CNode {
    explicit SlotNode(std::size_t s) : slot(s) {}
    Value eval(Machine&, Value* fp) const override { return fp[slot]; }
    std::size_t slot;
};

struct IfNode final : CNode {
    Value eval(Machine& m, Value* fp) const override {
        return test->eval(m, fp).truthy() ? then->eval(m, fp) : otherwise->eval(m, fp);
    }
    CNodePtr test, then, otherwise;
};

struct LetNode final : CNode {
    Value eval(Machine& m, Value* fp) const override {
        for (const auto& [slot, node] : bindings) fp[slot] = node->eval(m, fp);
        return body->eval(m, fp);
    }
    std::vector<std::pair<std::size_t, CNodePtr>> bindings;
    CNodePtr body;
};

struct WarrantNode final : CNode {
    explicit WarrantNode(const Symbol* f) : fn(f) {}
    Value eval(Machine& m, Value*) const override { return Value::boolean(m.ctx->warrant_holds(fn, *m.w)); }
    const Symbol* fn;
};

template <std::size_t N>
struct PrimNode final : CNode {
    Value eval(Machine& m, Value* fp) const override {
        std::array<Value, N> vals;
        for (std::size_t i = 0; i < N; ++i) vals[i] = args[i]->eval(m, fp);
        Interp in{*m.w, *m.ctx};
        return fn(vals, in);
    }
    BuiltinFn fn = nullptr;
    std::array<CNodePtr, N> args;
};

struct UnaryNode : CNode {
    CNodePtr a;
};
struct BinaryNode : CNode {
    CNodePtr a, b;
};

struct PlusNode final : BinaryNode {
    Value eval(Machine& m, Value* fp) const override {
        Value x = a->eval(m, fp);
        Value y = b->eval(m, fp);
        if (x.is_fixnum() && y.is_fixnum()) return Value::integer(x.fixnum() + y.fixnum());
        return int_add(x, y);
    }
};
struct TimesNode final : BinaryNode {
    Value eval(Machine& m, Value* fp) const override { return int_mul(a->eval(m, fp), b->eval(m, fp)); }
};
struct LessNode final : BinaryNode {
    Value eval(Machine& m, Value* fp) const override {
        Value x = a->eval(m, fp);
        Value y = b->eval(m, fp);
        if (x.is_fixnum() && y.is_fixnum()) return Value::boolean(x.fixnum() < y.fixnum());
        return Value::boolean(int_compare(x, y) < 0);
    }
};
struct EqualNode final : BinaryNode {
    Value eval(Machine& m, Value* fp) const override {
        Value x = a->eval(m, fp);
        Value y = b->eval(m, fp);
        return Value::boolean(x.identical(y) || equal(x, y));
    }
};
struct ConsNode final : BinaryNode {
    Value eval(Machine& m, Value* fp) const override {
        Value x = a->eval(m, fp);
        return cons(std::move(x), b->eval(m, fp));
    }
};
struct CarNode final : UnaryNode {
    Value eval(Machine& m, Value* fp) const override { return a->eval(m, fp).car(); }
};
struct CdrNode final : UnaryNode {
    Value eval(Machine& m, Value* fp) const override { return a->eval(m, fp).cdr(); }
};
struct ConspNode final : UnaryNode {
    Value eval(Machine& m, Value* fp) const override { return Value::boolean(a->eval(m, fp).is_pair()); }
};
struct NotNode final : UnaryNode {
    Value eval(Machine& m, Value* fp) const override { return Value::boolean(a->eval(m, fp).is_nil()); }
};
struct IntegerpNode final : UnaryNode {
    Value eval(Machine& m, Value* fp) const override { return Value::boolean(a->eval(m, fp).is_integer()); }
};
struct NegNode final : UnaryNode {
    Value eval(Machine& m, Value* fp) const override { return int_neg(a->eval(m, fp)); }
};

}  // namespace

struct CompiledFn {
    CNodePtr body;
    std::size_t frame = 0;
};

struct FastFnCache {
    std::mutex mu;
    std::array<std::atomic<const CompiledFn*>, 2> code{};
    std::array<std::unique_ptr<CompiledFn>, 2> owned;
};

struct CompiledLoop {
    std::vector<const Symbol*> inputs;  // loaded into slots 0..n-1
    CNodePtr node;
    std::size_t frame = 0;
};

struct FastLoopCache {
    std::mutex mu;
    std::array<std::atomic<const CompiledLoop*>, 2> code{};
    std::array<std::unique_ptr<CompiledLoop>, 2> owned;
};

std::shared_ptr<FastLoopCache> make_fast_loop_cache() { return std::make_shared<FastLoopCache>(); }
std::shared_ptr<FastFnCache> make_fast_fn_cache() { return std::make_shared<FastFnCache>(); }

namespace {

std::size_t mode_index(ExecMode m) { return m == ExecMode::Trusted ? 0 : 1; }

const CompiledFn& compiled_for(const Definition& def, Machine& m);

struct UserCallNode final : CNode {
    Value eval(Machine& m, Value* fp) const override {
        const CompiledFn* c = code.load(std::memory_order_acquire);
        if (c == nullptr) {
            c = &compiled_for(*def, m);
            code.store(c, std::memory_order_release);
        }
        Frame frame(m, c->frame);
        Value* nf = frame.fp();
        for (std::size_t i = 0; i < args.size(); ++i) nf[i] = args[i]->eval(m, fp);
        Depth depth(*m.ctx);
        return c->body->eval(m, nf);
    }
    const Definition* def = nullptr;
    std::shared_ptr<const Definition> hold;  // null for self-calls
    std::vector<CNodePtr> args;
    mutable std::atomic<const CompiledFn*> code{nullptr};
};

[[noreturn]] void type_violation(const Symbol* var, const Value& v, const TypeSpec& t) {
    throw Error(ErrorKind::GuardViolation,
                "guard violation: " + var->name + " = " + print_sexpr(v) + " does not satisfy " +
                    print_sexpr(t.to_sexpr()),
                {Value::symbol(var), v, Value::symbol(t.predicate_name()), t.to_sexpr()});
}

[[noreturn]] void guard_violation(const char* clause, const Value& guard) {
    throw Error(ErrorKind::GuardViolation,
                std::string("guard violation: :GUARD ") + print_sexpr(guard) + " of the " + clause + " is false",
                {guard});
}

struct LoopCNode final : CNode {
    struct Iter {
        const Symbol* var;
        std::size_t slot;
        TargetKind kind;
        CNodePtr lst, lo, hi, by;
        std::optional<TypeSpec> type;
    };
    struct Test {
        CNodePtr guard;
        Value guard_form;
        CNodePtr test;
    };

    std::vector<Iter> iters;
    std::optional<Test> until, when;
    CNodePtr body_guard;
    Value body_guard_form;
    CNodePtr body;
    LoopOp op = LoopOp::Collect;
    bool checked = false;

    struct Cursor {
        Value owner;
        const Value* p = nullptr;
        bool small = false;
        std::int64_t cur = 0, hi = 0, step = 0;
        Value bcur, bhi, bstep;
    };

    Value eval(Machine& m, Value* fp) const override {
        boost::container::small_vector<Cursor, 2> cs(iters.size());
        for (std::size_t i = 0; i < iters.size(); ++i) open(m, fp, iters[i], cs[i]);

        std::int64_t isum = 0;
        Value big_sum = Value::integer(0);
        ListBuilder out;

        for (;;) {
            bool more = true;
            for (std::size_t i = 0; i < iters.size() && more; ++i) more = bind(iters[i], cs[i], fp);
            if (!more) break;
            if (checked)
                for (const Iter& it : iters)
                    if (it.type && !it.type->holds(fp[it.slot])) type_violation(it.var, fp[it.slot], *it.type);
            if (until) {
                if (until->guard && until->guard->eval(m, fp).is_nil()) guard_violation("UNTIL clause", until->guard_form);
                if (until->test->eval(m, fp).truthy()) break;
            }
            bool skip = false;
            if (when) {
                if (when->guard && when->guard->eval(m, fp).is_nil()) guard_violation("WHEN clause", when->guard_form);
                skip = when->test->eval(m, fp).is_nil();
            }
            if (!skip) {
                if (body_guard && body_guard->eval(m, fp).is_nil()) guard_violation("loop body", body_guard_form);
                Value v = body->eval(m, fp);
                switch (op) {
                case LoopOp::Sum:
                    if (v.is_fixnum()) {
                        if (__builtin_add_overflow(isum, v.fixnum(), &isum)) {
                            big_sum = int_add(big_sum, Value::integer(isum - v.fixnum()));
                            isum = v.fixnum();
                        }
                    } else if (v.is_integer()) {
                        big_sum = int_add(big_sum, v);
                    }
                    break;
                case LoopOp::Collect: out.push_back(std::move(v)); break;
                case LoopOp::Append:
                    for (const Value* q = &v; q->is_pair(); q = &q->cdr()) out.push_back(q->car());
                    break;
                case LoopOp::Always:
                    if (v.is_nil()) return Value();
                    break;
                case LoopOp::Thereis:
                    if (v.truthy()) return v;
                    break;
                }
            }
            for (std::size_t i = 0; i < iters.size(); ++i) advance(cs[i]);
        }

        switch (op) {
        case LoopOp::Sum: return int_add(big_sum, Value::integer(isum));
        case LoopOp::Collect:
        case LoopOp::Append: return out.finish();
        case LoopOp::Always: return Value::t();
        case LoopOp::Thereis: return Value();
        }
        return Value();
    }

    static void open(Machine& m, Value* fp, const Iter& it, Cursor& c) {
        if (it.kind != TargetKind::FromToBy) {
            c.owner = it.lst->eval(m, fp);
            c.p = &c.owner;
            return;
        }
        Value lo = it.lo->eval(m, fp);
        Value hi = it.hi->eval(m, fp);
        Value by = it.by->eval(m, fp);
        if (!lo.is_integer() || !hi.is_integer())
            throw Error(ErrorKind::NonIntegerBound,
                        "FROM-TO-BY bounds must be integers, got " + print_sexpr(lo) + " and " + print_sexpr(hi),
                        {lo, hi});
        if (!by.is_integer() || int_compare(by, Value::integer(0)) <= 0)
            throw Error(ErrorKind::NonPositiveStep,
                        "FROM-TO-BY step must be a positive integer, got " + print_sexpr(by), {by});
        // Fixnums are below 2^62, so cur + step cannot overflow an int64.
        if (lo.is_fixnum() && hi.is_fixnum() && by.is_fixnum()) {
            c.small = true;
            c.cur = lo.fixnum();
            c.hi = hi.fixnum();
            c.step = by.fixnum();
        } else {
            c.bcur = lo;
            c.bhi = hi;
            c.bstep = by;
        }
    }

    static bool bind(const Iter& it, Cursor& c, Value* fp) {
        switch (it.kind) {
        case TargetKind::In:
            if (!c.p->is_pair()) return false;
            fp[it.slot] = c.p->car();
            return true;
        case TargetKind::On:
            if (!c.p->is_pair()) return false;
            fp[it.slot] = *c.p;
            return true;
        case TargetKind::FromToBy:
            if (c.small) {
                if (c.cur > c.hi) return false;
                fp[it.slot] = Value::integer(c.cur);
                return true;
            }
            if (int_compare(c.bcur, c.bhi) > 0) return false;
            fp[it.slot] = c.bcur;
            return true;
        }
        return false;
    }

    static void advance(Cursor& c) {
        if (c.p != nullptr) c.p = &c.p->cdr();
        else if (c.small) c.cur += c.step;
        else c.bcur = int_add(c.bcur, c.bstep);
    }
};

// ---------------------------------------------------------------------------
// Compiler

class Compiler {
public:
    Compiler(const World& w, ExecMode mode, const Definition* self) : w_(w), mode_(mode), self_(self) {}

    std::size_t bind_input(const Symbol* s) {
        std::size_t slot = next_++;
        max_ = std::max(max_, next_);
        names_.emplace_back(s, slot);
        return slot;
    }

    std::size_t frame_size() const { return max_; }

    CNodePtr term(const Term& t) {
        switch (t.kind) {
        case TermKind::Const: return std::make_unique<ConstNode>(t.value);
        case TermKind::Var: return std::make_unique<SlotNode>(lookup(t.symbol));
        case TermKind::Lambda: return std::make_unique<ConstNode>(Value::lambda(t.lambda));
        case TermKind::If: {
            auto n = std::make_unique<IfNode>();
            n->test = term(*t.args[0]);
            n->then = term(*t.args[1]);
            n->otherwise = term(*t.args[2]);
            return n;
        }
        case TermKind::Let: {
            // Slots are reserved before the values are compiled so that
            // temporaries inside them land above the new bindings.
            const std::size_t mark_next = next_, mark_names = names_.size();
            std::vector<std::size_t> slots;
            for (std::size_t i = 0; i < t.vars.size(); ++i) slots.push_back(reserve());
            auto n = std::make_unique<LetNode>();
            for (std::size_t i = 0; i < t.vars.size(); ++i) n->bindings.emplace_back(slots[i], term(*t.args[i]));
            for (std::size_t i = 0; i < t.vars.size(); ++i) names_.emplace_back(t.vars[i], slots[i]);
            n->body = term(*t.body);
            names_.resize(mark_names);
            next_ = mark_next;
            return n;
        }
        case TermKind::Loop: return loop(*t.loop->spec);
        case TermKind::Call: return call(t);
        }
        return nullptr;
    }

    CNodePtr loop(const LoopSpec& spec) {
        const std::size_t mark_next = next_, mark_names = names_.size();
        auto n = std::make_unique<LoopCNode>();
        n->op = spec.op;
        n->checked = mode_ == ExecMode::Checked;
        std::vector<std::size_t> slots;
        for (std::size_t i = 0; i < spec.iters.size(); ++i) slots.push_back(reserve());
        for (std::size_t i = 0; i < spec.iters.size(); ++i) {
            const IterClause& ic = spec.iters[i];
            LoopCNode::Iter it{ic.var, slots[i], ic.target.kind, nullptr, nullptr, nullptr, nullptr, ic.type};
            if (ic.target.kind == TargetKind::FromToBy) {
                it.lo = term(*ic.target.lo);
                it.hi = term(*ic.target.hi);
                it.by = term(*ic.target.by);
            } else {
                it.lst = term(*ic.target.lst);
            }
            n->iters.push_back(std::move(it));
        }
        for (std::size_t i = 0; i < spec.iters.size(); ++i) names_.emplace_back(spec.iters[i].var, slots[i]);
        auto test = [&](const std::optional<LoopTest>& lt) -> std::optional<LoopCNode::Test> {
            if (!lt) return std::nullopt;
            LoopCNode::Test out;
            if (n->checked && lt->guard) {
                out.guard = term(*lt->guard);
                out.guard_form = untranslate(*lt->guard);
            }
            out.test = term(*lt->test);
            return out;
        };
        n->until = test(spec.until);
        n->when = test(spec.when);
        if (n->checked && spec.body_guard) {
            n->body_guard = term(*spec.body_guard);
            n->body_guard_form = untranslate(*spec.body_guard);
        }
        n->body = term(*spec.body);
        names_.resize(mark_names);
        next_ = mark_next;
        return n;
    }

private:
    std::size_t reserve() {
        std::size_t slot = next_++;
        max_ = std::max(max_, next_);
        return slot;
    }

    std::size_t lookup(const Symbol* s) const {
        for (auto it = names_.rbegin(); it != names_.rend(); ++it)
            if (it->first == s) return it->second;
        throw Error(ErrorKind::UnboundVariable, "unbound variable " + s->name, {Value::symbol(s)});
    }

    template <class N>
    CNodePtr unary(const Term& t) {
        auto n = std::make_unique<N>();
        n->a = term(*t.args[0]);
        return n;
    }

    template <class N>
    CNodePtr binary(const Term& t) {
        auto n = std::make_unique<N>();
        n->a = term(*t.args[0]);
        n->b = term(*t.args[1]);
        return n;
    }

    template <std::size_t N>
    CNodePtr prim(const Term& t) {
        auto n = std::make_unique<PrimNode<N>>();
        n->fn = t.builtin->fn;
        for (std::size_t i = 0; i < N; ++i) n->args[i] = term(*t.args[i]);
        return n;
    }

    CNodePtr call(const Term& t) {
        if (t.warrant_of != nullptr) return std::make_unique<WarrantNode>(t.warrant_of);
        if (t.builtin != nullptr) {
            const Symbol* f = t.symbol;
            if (f == sym::binary_plus()) return binary<PlusNode>(t);
            if (f == sym::binary_times()) return binary<TimesNode>(t);
            if (f == sym::less()) return binary<LessNode>(t);
            if (f == sym::equal()) return binary<EqualNode>(t);
            if (f == sym::cons()) return binary<ConsNode>(t);
            if (f == sym::car()) return unary<CarNode>(t);
            if (f == sym::cdr()) return unary<CdrNode>(t);
            if (f == sym::consp()) return unary<ConspNode>(t);
            if (f == sym::not_()) return unary<NotNode>(t);
            if (f == sym::integerp()) return unary<IntegerpNode>(t);
            if (f == sym::unary_minus()) return unary<NegNode>(t);
            switch (t.args.size()) {
            case 1: return prim<1>(t);
            case 2: return prim<2>(t);
            case 3: return prim<3>(t);
            default: break;
            }
            throw Error(ErrorKind::EvaluationError, "unsupported primitive arity for " + f->name);
        }
        auto n = std::make_unique<UserCallNode>();
        if (self_ != nullptr && t.symbol == self_->name) {
            n->def = self_;
        } else {
            n->hold = w_.find_shared(t.symbol);
            if (!n->hold)
                throw Error(ErrorKind::UnknownMacroOrFunction, "unknown function " + t.symbol->name,
                            {Value::symbol(t.symbol)});
            n->def = n->hold.get();
        }
        for (const auto& a : t.args) n->args.push_back(term(*a));
        return n;
    }

    const World& w_;
    ExecMode mode_;
    const Definition* self_;
    std::vector<std::pair<const Symbol*, std::size_t>> names_;
    std::size_t next_ = 0;
    std::size_t max_ = 0;
};

const CompiledFn& compiled_for(const Definition& def, Machine& m) {
    if (!def.fast) throw Error(ErrorKind::EvaluationError, "definition " + def.name->name + " has no code cache");
    const ExecMode mode = def.guard_verified ? ExecMode::Trusted : ExecMode::Checked;
    FastFnCache& cache = *def.fast;
    const std::size_t idx = mode_index(mode);
    if (const CompiledFn* c = cache.code[idx].load(std::memory_order_acquire)) return *c;
    std::lock_guard<std::mutex> lock(cache.mu);
    if (const CompiledFn* c = cache.code[idx].load(std::memory_order_acquire)) return *c;
    Compiler comp(*m.w, mode, &def);
    for (const Symbol* f : def.formals) comp.bind_input(f);
    auto fn = std::make_unique<CompiledFn>();
    fn->body = comp.term(*def.body);
    fn->frame = std::max<std::size_t>(comp.frame_size(), 1);
    cache.owned[idx] = std::move(fn);
    cache.code[idx].store(cache.owned[idx].get(), std::memory_order_release);
    return *cache.owned[idx];
}

std::unique_ptr<CompiledLoop> compile_loop(const LoopSpec& spec, const World& w, ExecMode mode) {
    auto out = std::make_unique<CompiledLoop>();
    Compiler comp(w, mode, nullptr);
    out->inputs = loop_free_vars(spec);
    for (const Symbol* s : out->inputs) comp.bind_input(s);
    out->node = comp.loop(spec);
    out->frame = std::max<std::size_t>(comp.frame_size(), 1);
    return out;
}

Value run_loop(const CompiledLoop& code, Environment& env, const World& w, EvalContext& ctx) {
    MachineScope scope(w, ctx);
    Machine& m = tl_machine;
    Frame frame(m, code.frame);
    Value* fp = frame.fp();
    for (std::size_t i = 0; i < code.inputs.size(); ++i) fp[i] = env.lookup(code.inputs[i]);
    return code.node->eval(m, fp);
}

std::mutex perturb_mu;
std::function<Value(const Value&)> perturb;

}  // namespace

Value eval_loop_fast(const LoopSpec& spec, Environment& env, const World& w, ExecMode mode, EvalContext* ctx) {
    if (mode == ExecMode::ReferenceOnly)
        throw Error(ErrorKind::EvaluationError, "the fast path cannot run in reference-only mode");
    auto code = compile_loop(spec, w, mode);
    if (ctx != nullptr) return run_loop(*code, env, w, *ctx);
    EvalContext top = EvalContext::top_level();
    return run_loop(*code, env, w, top);
}

ExecMode select_mode(const EvalContext& ctx, const Definition* enclosing, bool in_lambda) {
    if (ctx.is_proof() || in_lambda) return ExecMode::ReferenceOnly;
    if (enclosing != nullptr && enclosing->guard_verified) return ExecMode::Trusted;
    if (ctx.fast_top_level) return ExecMode::Checked;
    return ExecMode::ReferenceOnly;
}

Value eval_loop(const LoopSpec& spec, Environment& env, const World& w, EvalContext& ctx,
                const Definition* enclosing) {
    ExecMode mode = select_mode(ctx, enclosing, false);
    if (mode == ExecMode::ReferenceOnly) return eval_loop_reference(translate_loop(spec), env, w, ctx);
    return eval_loop_fast(spec, env, w, mode, &ctx);
}

Value eval_loop_node(const LoopNode& node, Environment& env, const World& w, EvalContext& ctx,
                     const Definition* enclosing, bool in_lambda) {
    ExecMode mode = select_mode(ctx, enclosing, in_lambda);
    if (mode == ExecMode::ReferenceOnly) return eval_loop_reference(*node.scion, env, w, ctx);
    FastLoopCache& cache = *node.fast;
    const std::size_t idx = mode_index(mode);
    const CompiledLoop* code = cache.code[idx].load(std::memory_order_acquire);
    if (code == nullptr) {
        std::lock_guard<std::mutex> lock(cache.mu);
        code = cache.code[idx].load(std::memory_order_acquire);
        if (code == nullptr) {
            cache.owned[idx] = compile_loop(*node.spec, w, mode);
            code = cache.owned[idx].get();
            cache.code[idx].store(code, std::memory_order_release);
        }
    }
    return run_loop(*code, env, w, ctx);
}

// ---------------------------------------------------------------------------
// Benchmarking

void set_bench_perturb(std::function<Value(const Value&)> f) {
    std::lock_guard<std::mutex> lock(perturb_mu);
    perturb = std::move(f);
}

BenchResult bench(const LoopSpec& spec, Environment& env, const World& w, int reps, ExecMode mode) {
    using clock = std::chrono::steady_clock;
    if (reps < 1) reps = 1;
    if (mode == ExecMode::ReferenceOnly) mode = ExecMode::Trusted;
    BenchResult r;
    r.reps = reps;
    EvalContext ctx = EvalContext::top_level();

    const ScionCall sc = translate_loop(spec);
    Value ref;
    auto t0 = clock::now();
    for (int i = 0; i < reps; ++i) ref = eval_loop_reference(sc, env, w, ctx);
    auto t1 = clock::now();

    auto code = compile_loop(spec, w, mode);
    Value fast;
    auto t2 = clock::now();
    for (int i = 0; i < reps; ++i) fast = run_loop(*code, env, w, ctx);
    auto t3 = clock::now();

    {
        std::lock_guard<std::mutex> lock(perturb_mu);
        if (perturb) fast = perturb(fast);
    }
    if (!equal(ref, fast))
        throw Error(ErrorKind::ResultMismatch,
                    "reference and fast paths disagree: " + print_sexpr(ref) + " vs " + print_sexpr(fast), {ref, fast});

    auto ms = [&](clock::duration d) { return std::chrono::duration<double, std::milli>(d).count() / reps; };
    r.reference_ms = ms(t1 - t0);
    r.fast_ms = ms(t3 - t2);
    r.result = std::move(ref);
    return r;
}

Value bench_to_sexpr(const BenchResult& r) {
    auto whole = [](double ms) { return Value::integer(static_cast<std::int64_t>(ms + 0.5)); };
    return list({Value::symbol("BENCH"), list({Value::symbol("REFERENCE"), whole(r.reference_ms)}),
                 list({Value::symbol("FAST"), whole(r.fast_ms)}), list({Value::symbol("RESULT"), r.result})});
}

}  // namespace loopd
