#pragma once

// Fused single-pass loop$ evaluation and the dispatch between it and the
// scion reference semantics.
//
// Terms are compiled to a tree of nodes over slot-addressed frames. A loop$
// becomes one pass over its targets: FROM-TO-BY is streamed, IN/ON walk the
// list in place, AS clauses advance in lockstep, and user functions are
// called directly rather than through apply$.

#include <functional>
#include <memory>

#include "loopd/kernel.hpp"
#include "loopd/loop_syntax.hpp"
#include "loopd/translate.hpp"

namespace loopd {

enum class ExecMode { Trusted, Checked, ReferenceOnly };

const char* exec_mode_name(ExecMode m);

struct FastLoopCache;
struct FastFnCache;
std::shared_ptr<FastLoopCache> make_fast_loop_cache();
std::shared_ptr<FastFnCache> make_fast_fn_cache();

/// Free variables of spec are read from env. Checked mode tests each bound
/// element against its OF-TYPE and the :GUARD terms before the tests and
/// body run. ctx supplies the depth limit and the context for primitives
/// such as apply$; a TopLevel context is used when it is null.
Value eval_loop_fast(const LoopSpec& spec, Environment& env, const World& w, ExecMode mode,
                     EvalContext* ctx = nullptr);

/// The path a loop$ takes: the reference path in Proof contexts and inside
/// lambda objects, Trusted when the enclosing definition is guard-verified,
/// Checked when ctx.fast_top_level is set, and the reference path otherwise.
ExecMode select_mode(const EvalContext& ctx, const Definition* enclosing, bool in_lambda);

Value eval_loop(const LoopSpec& spec, Environment& env, const World& w, EvalContext& ctx,
                const Definition* enclosing = nullptr);

/// Dispatch for a loop$ term met during evaluation; the compiled code is
/// cached on the node.
Value eval_loop_node(const LoopNode& node, Environment& env, const World& w, EvalContext& ctx,
                     const Definition* enclosing, bool in_lambda = false);

struct BenchResult {
    double reference_ms = 0;  // mean per repetition
    double fast_ms = 0;
    int reps = 0;
    Value result;
};

/// Runs both paths reps times in TopLevel and throws ResultMismatch when
/// their results differ.
BenchResult bench(const LoopSpec& spec, Environment& env, const World& w, int reps,
                  ExecMode mode = ExecMode::Trusted);

/// (BENCH (REFERENCE ms) (FAST ms) (RESULT v)) with whole milliseconds.
Value bench_to_sexpr(const BenchResult& r);

/// Fault injection for the bench harness: when set, the fast path's result
/// is passed through this function before the comparison.
void set_bench_perturb(std::function<Value(const Value&)> f);

}  // namespace loopd
