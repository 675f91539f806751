#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "loopd/fastpath.hpp"
#include "loopd/guards.hpp"
#include "loopd/session.hpp"
#include "loopd/sexpr.hpp"
#include "loopd/symbols.hpp"
#include "loopd/translate.hpp"

using namespace loopd;

namespace {

constexpr int kUsage = 2;
constexpr int kFailure = 1;

struct SourceFile {
    std::string path;
    std::string text;
};

SourceFile slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return {path, ss.str()};
}

void report(const SourceFile& f, const Error& e, SourcePos fallback) {
    SourcePos p = e.pos().value_or(fallback);
    std::cerr << f.path << ':' << p.line << ':' << p.column << ": " << error_kind_name(e.kind()) << ": " << e.what()
              << '\n';
}

// Calls f on each top-level form; stops at the first error.
template <class F>
int each_form(const SourceFile& src, F&& f) {
    Reader r(src.text);
    SourcePos at;
    try {
        while (std::optional<Value> form = r.next()) {
            at = r.form_start();
            f(*form);
        }
    } catch (const Error& e) {
        report(src, e, at);
        return e.kind() == ErrorKind::DomainMissing ? kUsage : kFailure;
    }
    return 0;
}

bool is_defun(const Value& form) {
    return form.is_pair() && (form.car().is(sym::defun()) || form.car().is(sym::defun_dollar()));
}

int cmd_eval(const SourceFile& src) {
    Session s(std::cout);
    return each_form(src, [&](const Value& form) {
        std::optional<Value> v;
        try {
            v = s.process(form);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::ForcedWarrant) {
                std::cerr << "missing warrant:";
                for (const Symbol* f : s.last_context().forced()) std::cerr << " (APPLY$-WARRANT-" << f->name << ')';
                std::cerr << '\n';
            }
            throw;
        }
        if (v) std::cout << print_sexpr(*v) << '\n';
    });
}

int cmd_translate(const SourceFile& src) {
    Session s(std::cout);
    return each_form(src, [&](const Value& form) {
        if (is_definition_form(form)) {
            s.process(form);
            if (!is_defun(form)) return;
            for (const Value& v : s.translate_display(form.cdr().car())) std::cout << print_sexpr(v) << '\n';
            return;
        }
        for (const Value& v : s.translate_display(form)) std::cout << print_sexpr(v) << '\n';
    });
}

Domains parse_domains(const std::vector<std::string>& specs) {
    Domains out;
    for (const std::string& spec : specs) {
        auto eq = spec.find('=');
        auto dots = spec.find("..", eq == std::string::npos ? 0 : eq);
        if (eq == std::string::npos || dots == std::string::npos)
            throw CLI::ValidationError("--domain", "expected VAR=LO..HI, got " + spec);
        std::int64_t lo = 0, hi = 0;
        try {
            lo = std::stoll(spec.substr(eq + 1, dots - eq - 1));
            hi = std::stoll(spec.substr(dots + 2));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--domain", "bad bounds in " + spec);
        }
        std::string name = spec.substr(0, eq);
        for (char& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        std::vector<Value>& d = out[intern(name)];
        for (std::int64_t v = lo; v <= hi; ++v) d.push_back(Value::integer(v));
    }
    return out;
}

int cmd_guards(const SourceFile& src, bool check, const Domains& domains, std::size_t max_envs) {
    Session s(std::cout);
    bool failed = false;
    auto show = [&](const std::string& label, const std::vector<GuardConjecture>& cs) {
        if (cs.empty()) return;
        std::cout << "(GUARDS " << label << ")\n";
        for (std::size_t i = 0; i < cs.size(); ++i)
            std::cout << "(CONJECTURE " << (i + 1) << " CLASS " << class_letter(cs[i].cls) << ' '
                      << print_sexpr(conjecture_to_sexpr(cs[i])) << ")\n";
        if (!check) return;
        Report r = check_conjectures(cs, domains, s.world(), max_envs);
        for (const Value& v : r.to_sexprs()) std::cout << print_sexpr(v) << '\n';
        failed = failed || !r.all_pass();
    };
    int rc = each_form(src, [&](const Value& form) {
        if (is_definition_form(form)) {
            s.process(form);
            if (is_defun(form)) {
                const Symbol* name = form.cdr().car().as_symbol();
                show(name->name, s.conjectures_for(name));
            }
            return;
        }
        TermPtr t = translate_term(form, {}, s.world());
        std::vector<GuardConjecture> cs;
        for (const LoopSpec* spec : loops_in(*t)) {
            auto more = generate_guard_conjectures(*spec, make_const(Value::t()), s.world());
            for (auto& c : more) cs.push_back(std::move(c));
        }
        show(print_sexpr(form), cs);
    });
    if (rc != 0) return rc;
    return failed ? kFailure : 0;
}

int cmd_bench(const SourceFile& src, int reps) {
    Session s(std::cout);
    return each_form(src, [&](const Value& form) {
        if (is_definition_form(form)) {
            s.process(form);
            return;
        }
        TermPtr t = translate_term(form, {}, s.world());
        Environment env;
        const LoopSpec* spec = nullptr;
        ExecMode mode = ExecMode::Checked;
        if (t->kind == TermKind::Loop) {
            spec = t->loop->spec.get();
        } else if (t->kind == TermKind::Call && t->builtin == nullptr && t->warrant_of == nullptr) {
            const Definition* def = s.world().find(t->symbol);
            if (def != nullptr && def->body->kind == TermKind::Loop) {
                EvalContext ctx = EvalContext::top_level();
                Environment empty;
                for (std::size_t i = 0; i < def->formals.size(); ++i)
                    env.bind(def->formals[i], eval_term(*t->args[i], empty, s.world(), ctx));
                spec = def->body->loop->spec.get();
                if (def->guard_verified) mode = ExecMode::Trusted;
            }
        }
        if (spec == nullptr) {
            if (std::optional<Value> v = s.process(form)) std::cout << print_sexpr(*v) << '\n';
            return;
        }
        BenchResult r = bench(*spec, env, s.world(), reps, mode);
        std::cout << print_sexpr(bench_to_sexpr(r)) << '\n';
    });
}

int cmd_repl() {
    Session s(std::cout);
    std::string line;
    std::cout << "loop$ !>" << std::flush;
    while (std::getline(std::cin, line)) {
        if (!s.feed(line)) return 0;
        std::cout << (s.pending_input() ? "  " : "loop$ !>") << std::flush;
    }
    std::cout << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evaluate, translate, guard-check and benchmark loop$ programs"};
    app.require_subcommand(1);

    std::string path;
    int reps = 3;
    bool check = false;
    std::vector<std::string> domain_specs;
    std::size_t max_envs = 0;

    auto* eval = app.add_subcommand("eval", "Load definitions and print the value of every other form");
    eval->add_option("FILE", path)->required()->check(CLI::ExistingFile);
    auto* translate = app.add_subcommand("translate", "Print the scion calls of every loop$ in FILE");
    translate->add_option("FILE", path)->required()->check(CLI::ExistingFile);
    auto* guards = app.add_subcommand("guards", "Print loop$ guard conjectures, optionally checking them");
    guards->add_option("FILE", path)->required()->check(CLI::ExistingFile);
    guards->add_flag("--check", check, "Check the conjectures over the given domains");
    guards->add_option("--domain", domain_specs, "VAR=LO..HI (repeatable)");
    guards->add_option("--max-envs", max_envs, "Sample at most this many environments (0: all)");
    auto* bench_cmd = app.add_subcommand("bench", "Time the reference and fast paths on each loop$ form");
    bench_cmd->add_option("FILE", path)->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--reps", reps, "Repetitions per path")->check(CLI::PositiveNumber);
    auto* repl = app.add_subcommand("repl", "Interactive session");

    Domains domains;
    try {
        app.parse(argc, argv);
        domains = parse_domains(domain_specs);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }

    try {
        return run_with_large_stack([&]() -> int {
            if (repl->parsed()) return cmd_repl();
            SourceFile src = slurp(path);
            if (eval->parsed()) return cmd_eval(src);
            if (translate->parsed()) return cmd_translate(src);
            if (guards->parsed()) return cmd_guards(src, check, domains, max_envs);
            if (bench_cmd->parsed()) return cmd_bench(src, reps);
            return kUsage;
        });
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}
