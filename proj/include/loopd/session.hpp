#pragma once

// A loop$ session: the evolving world, the evaluation context selection,
// and the REPL command set. The CLI and the tests drive everything through
// this class.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "loopd/fastpath.hpp"
#include "loopd/guards.hpp"
#include "loopd/kernel.hpp"

namespace loopd {

class Session {
public:
    explicit Session(std::ostream& out);

    const World& world() const { return world_; }

    void use_top_level();
    void use_proof(std::set<const Symbol*> assumed);
    bool in_proof() const { return proof_; }
    const std::set<const Symbol*>& assumed() const { return assumed_; }

    void set_trace(bool on) { trace_ = on; }
    bool tracing() const { return trace_; }
    void set_fast_top_level(bool on) { fast_top_level_ = on; }
    bool fast_top_level() const { return fast_top_level_; }

    /// Definitions update the world and return nullopt; any other form is
    /// evaluated. (TOP-LEVEL form) evaluates form with top-level loop$
    /// forms routed to the checked fast path.
    std::optional<Value> process(const Value& form);

    /// The lambda$ rendering of the scion calls for a LOOP$ form, or for
    /// every loop$ in the body of a named definition.
    std::vector<Value> translate_display(const Value& form) const;

    /// Guard conjectures for every loop$ in a definition body.
    std::vector<GuardConjecture> conjectures_for(const Symbol* name) const;

    /// Processes one form, printing its value (or the defined name) or the
    /// error.
    bool handle(const Value& input);

    /// Feeds raw REPL text; complete forms are handled as soon as they
    /// close. A colon command takes the remaining forms on the input as its
    /// arguments. Returns false once :QUIT is read.
    bool feed(std::string_view text);
    bool pending_input() const;

    /// The context most recently used for an evaluation (for inspecting
    /// forced warrants).
    const EvalContext& last_context() const { return *last_ctx_; }

private:
    EvalContext fresh_context();
    bool command(const Symbol* cmd, const std::vector<Value>& args);
    void print_error(const Error& e);

    std::ostream& out_;
    World world_;
    bool proof_ = false;
    std::set<const Symbol*> assumed_;
    bool trace_ = false;
    bool fast_top_level_ = false;
    std::unique_ptr<ScionTracer> tracer_;
    std::unique_ptr<EvalContext> last_ctx_;
    std::string buffer_;
};

/// Whether every form in text is closed, ignoring comments and string
/// contents. Used by the REPL to decide when to read.
bool forms_balanced(std::string_view text);

/// Runs f on a thread with a large stack so deep user recursion does not
/// overflow the native stack before the depth limit trips.
int run_with_large_stack(const std::function<int()>& f, std::size_t bytes = std::size_t{1} << 29);

}  // namespace loopd
