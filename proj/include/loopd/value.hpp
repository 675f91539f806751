#pragma once

// The object universe: integers (fixnums inline, bignums on the heap),
// interned symbols, strings, pairs, and opaque lambda objects produced by
// evaluating a LAMBDA$ in a function position. NIL is both the empty list
// and falsity.

#include <atomic>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace loopd {

struct LambdaObj;

enum class ObjKind : std::uint8_t { Symbol, Pair, BigInt, String, Lambda };

struct Object {
    explicit Object(ObjKind k) : kind(k) {}
    mutable std::atomic<std::uint32_t> refs{1};
    const ObjKind kind;
};

/// Interned; never freed. Compare by pointer.
struct Symbol : Object {
    explicit Symbol(std::string n) : Object(ObjKind::Symbol), name(std::move(n)) {}
    const std::string name;
    bool keyword() const { return !name.empty() && name.front() == ':'; }
};

/// Returns the unique symbol with this exact name. Callers normalize case.
const Symbol* intern(std::string_view name);

class Value {
public:
    Value() noexcept = default;
    Value(const Value& o) noexcept : bits_(o.bits_) { retain(); }
    Value(Value&& o) noexcept : bits_(o.bits_) { o.bits_ = 0; }
    Value& operator=(const Value& o) noexcept {
        Value tmp(o);
        swap(tmp);
        return *this;
    }
    Value& operator=(Value&& o) noexcept {
        Value tmp(std::move(o));
        swap(tmp);
        return *this;
    }
    ~Value() { release(); }

    void swap(Value& o) noexcept { std::swap(bits_, o.bits_); }

    static Value nil() { return Value(); }
    static Value t();
    static Value integer(std::int64_t v) {
        if (v < kFixMin || v > kFixMax) return big_integer(v);
        Value r;
        r.bits_ = (static_cast<std::uintptr_t>(v) << 1) | 1u;
        return r;
    }
    static Value integer(const mpz_class& v);
    static Value symbol(const Symbol* s);
    static Value symbol(std::string_view name) { return symbol(intern(name)); }
    static Value string(std::string s);
    static Value lambda(std::shared_ptr<const LambdaObj> fn);
    static Value boolean(bool b) { return b ? t() : nil(); }

    bool is_nil() const { return bits_ == 0; }
    bool truthy() const { return bits_ != 0; }
    bool is_fixnum() const { return (bits_ & 1u) != 0; }
    bool is_integer() const { return is_fixnum() || is_kind(ObjKind::BigInt); }
    bool is_symbol() const { return is_nil() || is_kind(ObjKind::Symbol); }
    bool is_pair() const { return is_kind(ObjKind::Pair); }
    bool is_string() const { return is_kind(ObjKind::String); }
    bool is_lambda() const { return is_kind(ObjKind::Lambda); }
    bool is_atom() const { return !is_pair(); }

    std::int64_t fixnum() const { return static_cast<std::int64_t>(bits_) >> 1; }
    mpz_class to_mpz() const;
    /// Only meaningful when is_integer().
    bool fits_int64() const { return is_fixnum(); }

    const Symbol* as_symbol() const;
    const std::string& as_string() const;
    const std::shared_ptr<const LambdaObj>& as_lambda() const;
    const mpz_class& bigint() const;

    /// Total: NIL on atoms.
    const Value& car() const;
    const Value& cdr() const;

    bool is(const Symbol* s) const { return is_symbol() && as_symbol() == s; }
    bool identical(const Value& o) const { return bits_ == o.bits_; }
    const Object* object() const { return is_fixnum() || bits_ == 0 ? nullptr : ptr(); }

    friend Value cons(Value a, Value b);

private:
    static constexpr std::int64_t kFixMin = -(std::int64_t{1} << 62);
    static constexpr std::int64_t kFixMax = (std::int64_t{1} << 62) - 1;

    explicit Value(Object* o) noexcept : bits_(reinterpret_cast<std::uintptr_t>(o)) {}
    Object* ptr() const { return reinterpret_cast<Object*>(bits_); }
    bool is_kind(ObjKind k) const { return bits_ != 0 && !is_fixnum() && ptr()->kind == k; }

    void retain() const noexcept {
        if (bits_ != 0 && !is_fixnum() && ptr()->kind != ObjKind::Symbol)
            ptr()->refs.fetch_add(1, std::memory_order_relaxed);
    }
    void release() noexcept {
        if (bits_ != 0 && !is_fixnum()) release_object();
    }
    void release_object() noexcept;
    static Value big_integer(std::int64_t v);

    std::uintptr_t bits_ = 0;

    friend struct PairObj;
    friend class ListBuilder;
    friend Value make_bigint_value(mpz_class v);
};

struct PairObj : Object {
    PairObj(Value a, Value d) : Object(ObjKind::Pair), car(std::move(a)), cdr(std::move(d)) {}
    Value car;
    Value cdr;
};

Value cons(Value a, Value b);

/// Builds a fresh list front to back in one pass.
class ListBuilder {
public:
    void push_back(Value v);
    Value finish() {
        tail_ = nullptr;
        return std::move(head_);
    }

private:
    Value head_;
    PairObj* tail_ = nullptr;
};

Value list(std::initializer_list<Value> items);
Value list_from(std::span<const Value> items);
std::vector<Value> list_to_vector(const Value& lst);

/// Number of leading pairs in the cdr chain.
std::size_t length(const Value& lst);
bool is_true_list(const Value& v);
/// v itself when it is a true list, otherwise its longest proper prefix.
Value true_list_fix(const Value& v);
Value reverse_onto(Value lst, Value tail);

/// EQUAL: structural equality.
bool equal(const Value& a, const Value& b);

// Integer arithmetic. Non-integer operands are treated as 0, the way the
// logic completes the arithmetic primitives.
Value fix(const Value& v);
Value int_add(const Value& a, const Value& b);
Value int_mul(const Value& a, const Value& b);
Value int_neg(const Value& a);
/// Sign of a - b.
int int_compare(const Value& a, const Value& b);
/// floor(a / b); 0 when b is 0.
Value int_floor(const Value& a, const Value& b);
/// a - b * floor(a / b); a when b is 0.
Value int_mod(const Value& a, const Value& b);
bool int_evenp(const Value& a);

// Provided by the term layer.
bool lambda_equal(const LambdaObj& a, const LambdaObj& b);
Value lambda_to_sexpr(const LambdaObj& fn);

namespace sym {
const Symbol* nil();
const Symbol* t();
const Symbol* quote();
}  // namespace sym

std::ostream& operator<<(std::ostream& os, const Value& v);

}  // namespace loopd
