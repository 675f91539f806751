#include "loopd/value.hpp"

#include <cassert>
#include <mutex>
#include <ostream>
#include <unordered_map>

#include "loopd/sexpr.hpp"

namespace loopd {

namespace {

struct BigIntObj : Object {
    explicit BigIntObj(mpz_class v) : Object(ObjKind::BigInt), value(std::move(v)) {}
    mpz_class value;
};

struct StringObj : Object {
    explicit StringObj(std::string s) : Object(ObjKind::String), value(std::move(s)) {}
    std::string value;
};

struct LambdaValueObj : Object {
    explicit LambdaValueObj(std::shared_ptr<const LambdaObj> f)
        : Object(ObjKind::Lambda), fn(std::move(f)) {}
    std::shared_ptr<const LambdaObj> fn;
};

struct NameHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

struct SymbolTable {
    std::mutex mu;
    std::unordered_map<std::string, const Symbol*, NameHash, std::equal_to<>> table;
};

SymbolTable& symbols() {
    static auto* t = new SymbolTable;
    return *t;
}

const Value kNil;

}  // namespace

const Symbol* intern(std::string_view name) {
    auto& st = symbols();
    std::lock_guard lock(st.mu);
    if (auto it = st.table.find(name); it != st.table.end()) return it->second;
    auto* s = new Symbol(std::string(name));
    st.table.emplace(s->name, s);
    return s;
}

namespace sym {
const Symbol* nil() {
    static const Symbol* s = intern("NIL");
    return s;
}
const Symbol* t() {
    static const Symbol* s = intern("T");
    return s;
}
const Symbol* quote() {
    static const Symbol* s = intern("QUOTE");
    return s;
}
}  // namespace sym

void Value::release_object() noexcept {
    Object* o = ptr();
    bits_ = 0;
    // Pair chains are unwound iteratively so that dropping a long list does
    // not recurse once per cell.
    while (o != nullptr) {
        if (o->kind == ObjKind::Symbol) return;
        if (o->refs.fetch_sub(1, std::memory_order_acq_rel) != 1) return;
        switch (o->kind) {
        case ObjKind::Pair: {
            auto* p = static_cast<PairObj*>(o);
            Object* next = nullptr;
            if (p->cdr.bits_ != 0 && !p->cdr.is_fixnum()) {
                next = p->cdr.ptr();
                p->cdr.bits_ = 0;
            }
            delete p;
            o = next;
            break;
        }
        case ObjKind::BigInt: delete static_cast<BigIntObj*>(o); return;
        case ObjKind::String: delete static_cast<StringObj*>(o); return;
        case ObjKind::Lambda: delete static_cast<LambdaValueObj*>(o); return;
        case ObjKind::Symbol: return;
        }
    }
}

Value Value::t() { return symbol(sym::t()); }

Value Value::big_integer(std::int64_t v) { return integer(mpz_class(std::to_string(v))); }

Value make_bigint_value(mpz_class v) {
    if (v.fits_slong_p()) {
        long l = v.get_si();
        if (l >= Value::kFixMin && l <= Value::kFixMax) return Value::integer(static_cast<std::int64_t>(l));
    }
    return Value(new BigIntObj(std::move(v)));
}

Value Value::integer(const mpz_class& v) { return make_bigint_value(v); }

Value Value::symbol(const Symbol* s) {
    if (s == sym::nil()) return Value();
    return Value(const_cast<Symbol*>(s));
}

Value Value::string(std::string s) { return Value(new StringObj(std::move(s))); }

Value Value::lambda(std::shared_ptr<const LambdaObj> fn) { return Value(new LambdaValueObj(std::move(fn))); }

mpz_class Value::to_mpz() const {
    if (is_fixnum()) {
        mpz_class r;
        std::int64_t v = fixnum();
        // mpz_class has no int64 constructor on every platform.
        r = static_cast<long>(v);
        return r;
    }
    if (is_kind(ObjKind::BigInt)) return static_cast<BigIntObj*>(ptr())->value;
    return 0;
}

const mpz_class& Value::bigint() const { return static_cast<BigIntObj*>(ptr())->value; }

const Symbol* Value::as_symbol() const {
    if (bits_ == 0) return sym::nil();
    assert(is_kind(ObjKind::Symbol));
    return static_cast<const Symbol*>(ptr());
}

const std::string& Value::as_string() const { return static_cast<StringObj*>(ptr())->value; }

const std::shared_ptr<const LambdaObj>& Value::as_lambda() const {
    return static_cast<LambdaValueObj*>(ptr())->fn;
}

const Value& Value::car() const {
    if (!is_pair()) return kNil;
    return static_cast<PairObj*>(ptr())->car;
}

const Value& Value::cdr() const {
    if (!is_pair()) return kNil;
    return static_cast<PairObj*>(ptr())->cdr;
}

Value cons(Value a, Value b) { return Value(new PairObj(std::move(a), std::move(b))); }

Value list(std::initializer_list<Value> items) {
    return list_from(std::span<const Value>(items.begin(), items.size()));
}

Value list_from(std::span<const Value> items) {
    Value r;
    for (auto it = items.rbegin(); it != items.rend(); ++it) r = cons(*it, std::move(r));
    return r;
}

std::vector<Value> list_to_vector(const Value& lst) {
    std::vector<Value> out;
    for (const Value* p = &lst; p->is_pair(); p = &p->cdr()) out.push_back(p->car());
    return out;
}

std::size_t length(const Value& lst) {
    std::size_t n = 0;
    for (const Value* p = &lst; p->is_pair(); p = &p->cdr()) ++n;
    return n;
}

bool is_true_list(const Value& v) {
    const Value* p = &v;
    while (p->is_pair()) p = &p->cdr();
    return p->is_nil();
}

void ListBuilder::push_back(Value v) {
    Value cell = cons(std::move(v), Value());
    auto* p = static_cast<PairObj*>(cell.ptr());
    if (tail_ == nullptr) head_ = std::move(cell);
    else tail_->cdr = std::move(cell);
    tail_ = p;
}

Value true_list_fix(const Value& v) {
    if (is_true_list(v)) return v;
    return list_from(list_to_vector(v));
}

Value reverse_onto(Value lst, Value tail) {
    for (const Value* p = &lst; p->is_pair(); p = &p->cdr()) tail = cons(p->car(), std::move(tail));
    return tail;
}

bool equal(const Value& a, const Value& b) {
    const Value* x = &a;
    const Value* y = &b;
    for (;;) {
        if (x->identical(*y)) return true;
        if (x->is_pair()) {
            if (!y->is_pair() || !equal(x->car(), y->car())) return false;
            x = &x->cdr();
            y = &y->cdr();
            continue;
        }
        if (x->is_fixnum() || y->is_fixnum() || x->is_nil() || y->is_nil()) return false;
        if (x->is_integer() && y->is_integer()) return x->bigint() == y->bigint();
        if (x->is_string() && y->is_string()) return x->as_string() == y->as_string();
        if (x->is_lambda() && y->is_lambda()) return lambda_equal(*x->as_lambda(), *y->as_lambda());
        return false;
    }
}

Value fix(const Value& v) { return v.is_integer() ? v : Value::integer(0); }

Value int_add(const Value& a, const Value& b) {
    if (a.is_fixnum() && b.is_fixnum()) return Value::integer(a.fixnum() + b.fixnum());
    if (!a.is_integer()) return b.is_integer() ? b : Value::integer(0);
    if (!b.is_integer()) return a;
    return Value::integer(mpz_class(a.to_mpz() + b.to_mpz()));
}

Value int_mul(const Value& a, const Value& b) {
    if (!a.is_integer() || !b.is_integer()) return Value::integer(0);
    if (a.is_fixnum() && b.is_fixnum()) {
        std::int64_t r;
        if (!__builtin_mul_overflow(a.fixnum(), b.fixnum(), &r)) return Value::integer(r);
    }
    return Value::integer(mpz_class(a.to_mpz() * b.to_mpz()));
}

Value int_neg(const Value& a) {
    if (a.is_fixnum()) return Value::integer(-a.fixnum());
    if (!a.is_integer()) return Value::integer(0);
    return Value::integer(mpz_class(-a.to_mpz()));
}

int int_compare(const Value& a, const Value& b) {
    Value x = fix(a);
    Value y = fix(b);
    if (x.is_fixnum() && y.is_fixnum()) return (x.fixnum() > y.fixnum()) - (x.fixnum() < y.fixnum());
    int c = cmp(x.to_mpz(), y.to_mpz());
    return (c > 0) - (c < 0);
}

Value int_floor(const Value& a, const Value& b) {
    Value x = fix(a);
    Value y = fix(b);
    if (y.is_fixnum() && y.fixnum() == 0) return Value::integer(0);
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), x.to_mpz().get_mpz_t(), y.to_mpz().get_mpz_t());
    return Value::integer(q);
}

Value int_mod(const Value& a, const Value& b) {
    Value x = fix(a);
    Value y = fix(b);
    if (y.is_fixnum() && y.fixnum() == 0) return x;
    mpz_class r;
    mpz_fdiv_r(r.get_mpz_t(), x.to_mpz().get_mpz_t(), y.to_mpz().get_mpz_t());
    return Value::integer(r);
}

bool int_evenp(const Value& a) {
    if (a.is_fixnum()) return (a.fixnum() & 1) == 0;
    if (!a.is_integer()) return true;
    return mpz_even_p(a.bigint().get_mpz_t()) != 0;
}

std::ostream& operator<<(std::ostream& os, const Value& v) { return os << print_sexpr(v); }

}  // namespace loopd
