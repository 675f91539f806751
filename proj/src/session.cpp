#include "loopd/session.hpp"

#include <pthread.h>

#include <exception>
#include <ostream>

#include "loopd/scions.hpp"
#include "loopd/sexpr.hpp"
#include "loopd/symbols.hpp"
#include "loopd/translate.hpp"

namespace loopd {

Session::Session(std::ostream& out)
    : out_(out), tracer_(std::make_unique<StreamTracer>(out)),
      last_ctx_(std::make_unique<EvalContext>(EvalContext::top_level())) {}

void Session::use_top_level() {
    proof_ = false;
    assumed_.clear();
}

void Session::use_proof(std::set<const Symbol*> assumed) {
    proof_ = true;
    assumed_ = std::move(assumed);
}

EvalContext Session::fresh_context() {
    EvalContext ctx = proof_ ? EvalContext::proof(assumed_) : EvalContext::top_level();
    ctx.fast_top_level = fast_top_level_;
    if (trace_) ctx.tracer = tracer_.get();
    return ctx;
}

std::optional<Value> Session::process(const Value& form) {
    if (is_definition_form(form)) {
        world_ = define(form, world_);
        return std::nullopt;
    }
    EvalContext ctx = fresh_context();
    Value body = form;
    if (form.is_pair() && form.car().is(sym::top_level())) {
        std::vector<Value> args = list_to_vector(form.cdr());
        if (args.size() != 1)
            throw Error(ErrorKind::ArityMismatch, "TOP-LEVEL takes one form: " + print_sexpr(form), {form});
        ctx.fast_top_level = true;
        body = args[0];
    }
    TermPtr t = translate_term(body, {}, world_);
    Environment env;
    try {
        Value v = eval_term(*t, env, world_, ctx);
        last_ctx_ = std::make_unique<EvalContext>(ctx);
        return v;
    } catch (...) {
        last_ctx_ = std::make_unique<EvalContext>(ctx);
        throw;
    }
}

std::vector<Value> Session::translate_display(const Value& form) const {
    std::vector<Value> out;
    if (form.is_symbol() && !form.is_nil()) {
        const Definition* def = world_.find(form.as_symbol());
        if (def == nullptr)
            throw Error(ErrorKind::UnknownMacroOrFunction, "no definition named " + form.as_symbol()->name, {form});
        for (const LoopSpec* spec : loops_in(*def->body)) out.push_back(untranslate(translate_loop(*spec)));
        return out;
    }
    // Displaying a loop need not evaluate it, so any symbol that could be a
    // variable is treated as bound.
    SymbolSet bound;
    std::vector<const Value*> todo{&form};
    while (!todo.empty()) {
        const Value* v = todo.back();
        todo.pop_back();
        if (v->is_pair()) {
            if (v->car().is(sym::quote())) continue;
            todo.push_back(&v->car());
            todo.push_back(&v->cdr());
        } else if (v->is_symbol() && !v->is_nil() && !v->is(sym::t()) && !v->as_symbol()->keyword() &&
                   world_.constant(v->as_symbol()) == nullptr) {
            bound.insert(v->as_symbol());
        }
    }
    TermPtr t = translate_term(form, bound, world_);
    for (const LoopSpec* spec : loops_in(*t)) out.push_back(untranslate(translate_loop(*spec)));
    return out;
}

std::vector<GuardConjecture> Session::conjectures_for(const Symbol* name) const {
    const Definition* def = world_.find(name);
    if (def == nullptr) throw Error(ErrorKind::UnknownMacroOrFunction, "no definition named " + name->name);
    return definition_conjectures(*def, world_);
}

void Session::print_error(const Error& e) {
    out_ << "ERROR " << error_kind_name(e.kind()) << ": " << e.what() << '\n';
    if (e.kind() == ErrorKind::ForcedWarrant) {
        out_ << "missing warrant:";
        for (const Symbol* s : last_ctx_->forced()) out_ << " (APPLY$-WARRANT-" << s->name << ')';
        out_ << '\n';
    }
}

bool Session::command(const Symbol* cmd, const std::vector<Value>& args) {
    const std::string& c = cmd->name;
    if (c == ":QUIT" || c == ":Q") return false;
    if (c == ":TRACE") {
        trace_ = !trace_;
        out_ << "trace " << (trace_ ? "on" : "off") << '\n';
    } else if (c == ":FAST") {
        fast_top_level_ = !fast_top_level_;
        out_ << "fast top level " << (fast_top_level_ ? "on" : "off") << '\n';
    } else if (c == ":TRANSLATE") {
        if (args.size() != 1) throw Error(ErrorKind::ArityMismatch, ":TRANSLATE takes one form");
        std::vector<Value> shown = translate_display(args[0]);
        if (shown.empty()) out_ << "no loop$ forms\n";
        for (const Value& v : shown) out_ << print_sexpr(v) << '\n';
    } else if (c == ":GUARDS") {
        if (args.size() != 1 || !args[0].is_symbol())
            throw Error(ErrorKind::ArityMismatch, ":GUARDS takes a function name");
        std::vector<GuardConjecture> cs = conjectures_for(args[0].as_symbol());
        if (cs.empty()) out_ << "no loop$ guard conjectures\n";
        for (std::size_t i = 0; i < cs.size(); ++i)
            out_ << "(" << (i + 1) << " CLASS " << class_letter(cs[i].cls) << ") "
                 << print_sexpr(conjecture_to_sexpr(cs[i])) << '\n';
    } else if (c == ":CTX") {
        if (args.empty() || !args[0].is_symbol()) throw Error(ErrorKind::ArityMismatch, ":CTX takes TOP or PROOF");
        const std::string& which = args[0].as_symbol()->name;
        if (which == "TOP" || which == "TOP-LEVEL") {
            use_top_level();
            out_ << "context top-level\n";
        } else if (which == "PROOF") {
            std::set<const Symbol*> assumed;
            for (std::size_t i = 1; i < args.size(); ++i) {
                const Value& w = args[i];
                if (!w.is_pair() || !w.car().is(sym::warrant()))
                    throw Error(ErrorKind::MalformedDefun, "expected (WARRANT f ...): " + print_sexpr(w), {w});
                for (const Value& f : list_to_vector(w.cdr())) {
                    if (!f.is_symbol() || f.is_nil())
                        throw Error(ErrorKind::MalformedDefun, "warrant names must be symbols", {f});
                    assumed.insert(f.as_symbol());
                }
            }
            use_proof(assumed);
            out_ << "context proof";
            for (const Symbol* s : assumed) out_ << " (APPLY$-WARRANT-" << s->name << ')';
            out_ << '\n';
        } else {
            throw Error(ErrorKind::ArityMismatch, ":CTX takes TOP or PROOF");
        }
    } else if (c == ":HELP") {
        out_ << "forms: DEFUN DEFUN$ DEFWARRANT DEFCONST VERIFY-GUARDS, terms, (TOP-LEVEL term)\n"
                "commands: :TRANSLATE form|name  :GUARDS name  :TRACE  :FAST  :CTX TOP  "
                ":CTX PROOF (WARRANT f ...)  :QUIT\n";
    } else {
        throw Error(ErrorKind::UnknownMacroOrFunction, "unknown command " + c);
    }
    return true;
}

bool Session::handle(const Value& input) {
    try {
        if (std::optional<Value> v = process(input)) out_ << print_sexpr(*v) << '\n';
        else out_ << print_sexpr(input.cdr().car()) << '\n';
    } catch (const Error& e) {
        print_error(e);
    }
    return true;
}

bool Session::feed(std::string_view text) {
    buffer_.append(text);
    buffer_.push_back('\n');
    if (!forms_balanced(buffer_)) return true;
    std::string src;
    src.swap(buffer_);
    std::vector<Value> forms;
    try {
        forms = read_all(src);
    } catch (const Error& e) {
        print_error(e);
        return true;
    }
    for (std::size_t i = 0; i < forms.size(); ++i) {
        const Value& f = forms[i];
        if (f.is_symbol() && !f.is_nil() && f.as_symbol()->keyword()) {
            // A command consumes the rest of the forms on its input.
            std::vector<Value> args(forms.begin() + static_cast<std::ptrdiff_t>(i) + 1, forms.end());
            try {
                if (!command(f.as_symbol(), args)) return false;
            } catch (const Error& e) {
                print_error(e);
            }
            return true;
        }
        handle(f);
    }
    return true;
}

bool Session::pending_input() const { return !buffer_.empty(); }

bool forms_balanced(std::string_view text) {
    int depth = 0;
    bool in_string = false, in_bar = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (in_bar) {
            if (c == '|') in_bar = false;
            continue;
        }
        switch (c) {
        case ';':
            while (i < text.size() && text[i] != '\n') ++i;
            break;
        case '"': in_string = true; break;
        case '|': in_bar = true; break;
        case '(': ++depth; break;
        case ')': --depth; break;
        default: break;
        }
    }
    // A stray ')' is complete too: the reader reports it.
    return !in_string && !in_bar && depth <= 0;
}

namespace {

struct StackJob {
    const std::function<int()>* f;
    int status = 0;
    std::exception_ptr error;
};

void* stack_job(void* p) {
    auto* job = static_cast<StackJob*>(p);
    try {
        job->status = (*job->f)();
    } catch (...) {
        job->error = std::current_exception();
    }
    return nullptr;
}

}  // namespace

int run_with_large_stack(const std::function<int()>& f, std::size_t bytes) {
    StackJob job{&f, 0, nullptr};
    pthread_attr_t attr;
    pthread_attr_init(&attr);
    pthread_attr_setstacksize(&attr, bytes);
    pthread_t th;
    int rc = pthread_create(&th, &attr, stack_job, &job);
    pthread_attr_destroy(&attr);
    if (rc != 0) return f();
    pthread_join(th, nullptr);
    if (job.error) std::rethrow_exception(job.error);
    return job.status;
}

}  // namespace loopd
