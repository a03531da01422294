// selene: command-line front end for the SELENE toolchain. Subcommands map
// onto the library's phases: parse/typecheck (check), clocked execution
// (run), attacker views of recorded traces (project), bounded
// noninterference experiments (verify-ni), and the bundled corpus (examples).
//
// Exit codes: 0 on success or a passing analysis, 1 when the analysis itself
// rejects (type errors, a noninterference counterexample), 2 on usage, IO,
// parse, or configuration errors.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "selene/corpus_data.hpp"
#include "selene/selene.hpp"

namespace {

std::string quote_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out + "\"";
}

std::string render_value(const selene::Value& v) {
    return v.is_int() ? std::to_string(v.as_int()) : quote_string(v.as_string());
}

std::string render_alpha(const selene::ChannelTable& channels, const selene::ProgramEvent& e) {
    using namespace selene;
    if (e.is_eps()) return "-";
    if (const auto* a = std::get_if<AssignEv>(&e.node))
        return "assign " + a->var + " = " + render_value(a->value);
    if (const auto* a = std::get_if<AssignSizeEv>(&e.node))
        return "assign " + a->var + " size=" + std::to_string(a->size);
    if (const auto* q = std::get_if<QueueEv>(&e.node))
        return "queue " + channels.name(q->channel) + " " + render_value(q->value);
    if (const auto* s = std::get_if<ScheduleEv>(&e.node))
        return "schedule " + channels.name(s->channel) + " n=" + std::to_string(s->count) +
               " from=" + std::to_string(s->slot);
    const auto& i = std::get<InputEv>(e.node);
    return "input " + channels.name(i.channel) + " -> " + i.var + " = " + render_value(i.value);
}

std::string render_beta(const selene::ChannelTable& channels, const selene::RuntimeEvent& e) {
    using namespace selene;
    if (e.is_eps()) return "-";
    if (const auto* out = std::get_if<OutputEv>(&e.node)) {
        std::string p = out->packet.is_dummy()
                            ? "dummy"
                            : render_value(out->packet.frag->value) + " [" +
                                  std::to_string(out->packet.frag->index) + "/" +
                                  std::to_string(out->packet.frag->count) + "]";
        return "output " + channels.name(out->channel) + " " + p;
    }
    const auto& hidden = std::get<OutputHiddenEv>(e.node);
    return "output " + channels.name(hidden.channel) + " (redacted)";
}

// One line per instant that carries an event; silent clock ticks are elided.
void print_trace(std::ostream& os, const selene::ChannelTable& channels, const selene::Trace& t,
                 const char* indent = "  ") {
    for (const auto& ev : t) {
        if (ev.alpha.is_eps() && ev.beta.is_eps()) continue;
        os << indent << "ts=" << ev.ts;
        if (!ev.alpha.is_eps()) os << "  " << render_alpha(channels, ev.alpha);
        if (!ev.beta.is_eps()) os << "  " << render_beta(channels, ev.beta);
        os << "\n";
    }
}

void print_issues(const std::string& path, const selene::TypecheckReport& report) {
    for (const auto& issue : report.issues) {
        std::cout << path << ":";
        if (issue.pos.line != 0) std::cout << issue.pos.line << ":" << issue.pos.col << ":";
        std::cout << " [" << issue.rule << "] " << issue.message << "\n";
    }
    std::cout << "rejected: " << report.issues.size() << " issue(s)\n";
}

int cmd_check(const std::string& path) {
    auto parsed = selene::parse_program(selene::read_file(path));
    selene::TypingEnv gamma = selene::build_gamma(parsed.program);
    auto report = selene::check_program(parsed.program, gamma);
    if (!report.ok()) {
        print_issues(path, report);
        return 1;
    }
    std::cout << "ok: well-typed, final context "
              << parsed.program.lattice.name(*report.final_pc) << "\n";
    return 0;
}

void apply_sets(selene::Memory& memory, const selene::TypingEnv& gamma,
                const std::vector<std::string>& sets) {
    for (const auto& s : sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw selene::ConfigError("--set expects name=value, got '" + s + "'");
        std::string name = s.substr(0, eq);
        std::string text = s.substr(eq + 1);
        const auto* t = gamma.find(name);
        if (!t) throw selene::ConfigError("--set names undeclared variable '" + name + "'");
        if (t->type.kind == selene::ValueKind::Int) {
            try {
                std::size_t used = 0;
                long long v = std::stoll(text, &used);
                if (used != text.size()) throw std::invalid_argument(text);
                memory.set(name, selene::Value::integer(v));
            } catch (const std::exception&) {
                throw selene::ConfigError("--set " + name + ": '" + text + "' is not an int");
            }
        } else {
            memory.set(name, selene::Value::string(text));
        }
    }
}

struct RunOptions {
    std::string program_path;
    std::string input_path;
    std::string trace_path;
    std::vector<std::string> sets;
    std::uint64_t max_steps = 10000;
    std::uint32_t eta = 1;
    bool skip_typecheck = false;
    bool quiet = false;
};

int cmd_run(const RunOptions& opt) {
    auto parsed = selene::parse_program(selene::read_file(opt.program_path));
    const selene::SourceProgram& program = parsed.program;
    selene::TypingEnv gamma = selene::build_gamma(program);

    if (!opt.skip_typecheck) {
        auto report = selene::check_program(program, gamma);
        if (!report.ok()) {
            print_issues(opt.program_path, report);
            std::cout << "not running; pass --unsafe-skip-typecheck to execute anyway\n";
            return 1;
        }
    }

    selene::GlobalConfig g = selene::make_initial_config(program, gamma);
    if (!opt.input_path.empty()) {
        auto j = selene::parse_json(selene::read_file(opt.input_path), opt.input_path);
        g.program.input = selene::input_env_from_json(program.channels, j, opt.input_path);
    }
    apply_sets(g.program.memory, gamma, opt.sets);

    selene::RunParams params;
    params.max_steps = opt.max_steps;
    params.eta = opt.eta;
    auto outcome = selene::run(std::move(g), params);

    if (!opt.quiet) print_trace(std::cout, program.channels, outcome.trace);
    std::cout << "status: " << selene::run_status_text(outcome.status) << "\n";
    if (!outcome.diagnostic.empty()) std::cout << "diagnostic: " << outcome.diagnostic << "\n";
    std::cout << "steps: " << outcome.trace.size() << "\n";
    std::map<std::string, std::uint64_t> counts;
    for (const auto& ev : outcome.trace)
        if (const auto* out = std::get_if<selene::OutputEv>(&ev.beta.node))
            ++counts[program.channels.name(out->channel)];
    for (const auto& [name, n] : counts) std::cout << "outputs " << name << ": " << n << "\n";

    if (!opt.trace_path.empty()) {
        selene::TraceDocument doc{program.lattice, program.channels, gamma, outcome.trace};
        selene::write_file(opt.trace_path, selene::write_trace_text(doc));
        std::cout << "trace written to " << opt.trace_path << "\n";
    }
    return 0;
}

int cmd_project(const std::string& trace_path, const std::string& level_name, bool internal,
                const std::string& out_path) {
    auto doc = selene::read_trace_text(selene::read_file(trace_path), trace_path);
    auto level = doc.lattice.find(level_name);
    if (!level) throw selene::ConfigError("unknown level '" + level_name + "'");
    auto ctx = doc.context();
    selene::Trace filtered = internal
                                 ? selene::filter_trace_internal(ctx, *level, doc.events)
                                 : selene::filter_trace(ctx, *level, doc.events);
    print_trace(std::cout, doc.channels, filtered);
    std::cout << "visible: " << filtered.size() << " of " << doc.events.size() << " instants\n";
    if (!out_path.empty()) {
        selene::TraceDocument out{doc.lattice, doc.channels, doc.gamma, std::move(filtered)};
        selene::write_file(out_path, selene::write_trace_text(out));
    }
    return 0;
}

struct VerifyOptions {
    std::string experiment_path;
    std::optional<std::uint64_t> bound;
    std::string adversary;
    std::string mode;
    std::string knowledge_path;
};

int cmd_verify(const VerifyOptions& opt) {
    selene::NIExperiment exp = selene::load_experiment_file(opt.experiment_path);
    if (opt.bound) exp.bound = *opt.bound;
    if (!opt.adversary.empty()) {
        auto adv = exp.program.lattice.find(opt.adversary);
        if (!adv) throw selene::ConfigError("unknown adversary level '" + opt.adversary + "'");
        exp.adversary = *adv;
    }
    if (!opt.mode.empty()) {
        if (opt.mode == "external")
            exp.mode = selene::AttackerMode::External;
        else if (opt.mode == "internal")
            exp.mode = selene::AttackerMode::Internal;
        else
            throw selene::ConfigError("mode must be external or internal");
    }

    if (!opt.knowledge_path.empty()) {
        auto doc =
            selene::read_trace_text(selene::read_file(opt.knowledge_path), opt.knowledge_path);
        auto variants = selene::enumerate_equiv_configs(exp);
        auto consistent = selene::knowledge(exp, doc.events);
        std::cout << "knowledge: " << consistent.size() << " of " << variants.size()
                  << " variants consistent with the observation\n";
        for (auto i : consistent) std::cout << "  [" << i << "] " << variants[i].description << "\n";
        return 0;
    }

    selene::NIVerdict v = exp.mode == selene::AttackerMode::Internal
                              ? selene::check_ni_internal(exp)
                              : selene::check_ni(exp);
    std::cout << "mode: " << (v.mode == selene::AttackerMode::Internal ? "internal" : "external")
              << "\n";
    std::cout << "adversary: " << exp.program.lattice.name(exp.adversary) << "\n";
    std::cout << "bound: " << exp.bound << " steps\n";
    std::cout << "variants: " << v.variant_descriptions.size() << "\n";
    for (std::size_t i = 0; i < v.variant_descriptions.size(); ++i)
        std::cout << "  [" << i << "] " << v.variant_descriptions[i] << ": "
                  << selene::run_status_text(v.statuses[i]) << ", " << v.filtered[i].size()
                  << " visible instant(s)\n";

    if (v.pass) {
        std::cout << "verdict: PASS"
                  << (v.bounded ? " (bounded: a run hit the step budget)" : "") << "\n";
        return 0;
    }
    std::cout << "verdict: FAIL\n";
    std::cout << "divergence at ts=" << v.divergence_ts << " between [" << v.counter_a << "] '"
              << v.variant_descriptions[v.counter_a] << "' and [" << v.counter_b << "] '"
              << v.variant_descriptions[v.counter_b] << "'\n";
    for (std::size_t idx : {v.counter_a, v.counter_b}) {
        std::cout << "[" << idx << "] " << v.variant_descriptions[idx] << ":\n";
        selene::Trace shown;
        for (const auto& ev : v.filtered[idx])
            if (ev.ts <= v.divergence_ts) shown.push_back(ev);
        if (shown.empty())
            std::cout << "    (nothing visible up to ts=" << v.divergence_ts << ")\n";
        else
            print_trace(std::cout, exp.program.channels, shown, "    ");
        if (shown.size() < v.filtered[idx].size())
            std::cout << "    ... " << v.filtered[idx].size() - shown.size()
                      << " later instant(s) elided\n";
    }
    return 1;
}

int cmd_examples(const std::string& name, const std::string& write_dir) {
    if (!write_dir.empty()) {
        namespace fs = std::filesystem;
        for (const auto& f : selene::corpus::bundled_files) {
            fs::path target = fs::path(write_dir) / std::string(f.name);
            fs::create_directories(target.parent_path());
            selene::write_file(target.string(), std::string(f.text));
        }
        std::cout << "wrote " << selene::corpus::bundled_files.size() << " files to "
                  << write_dir << "\n";
        return 0;
    }
    if (name.empty()) {
        for (const auto& f : selene::corpus::bundled_files) std::cout << f.name << "\n";
        return 0;
    }
    for (const auto& f : selene::corpus::bundled_files) {
        if (f.name == name) {
            std::cout << f.text;
            return 0;
        }
    }
    throw selene::ConfigError("no bundled example named '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SELENE: security-typed language with clocked packet scheduling"};
    app.require_subcommand(1);

    auto* check = app.add_subcommand("check", "Parse and typecheck a program");
    std::string check_path;
    check->add_option("program", check_path, "Program file")->required();

    auto* run = app.add_subcommand("run", "Execute a program under the global clock");
    RunOptions run_opt;
    if (const char* env = std::getenv("SELENE_MAX_STEPS")) {
        try {
            run_opt.max_steps = std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "error: SELENE_MAX_STEPS is not a number\n";
            return 2;
        }
    }
    run->add_option("program", run_opt.program_path, "Program file")->required();
    run->add_option("--input", run_opt.input_path, "Pending input environment (JSON)");
    run->add_option("--trace", run_opt.trace_path, "Write the full trace document here (JSON)");
    run->add_option("--set", run_opt.sets, "Override an initial memory value (name=value)");
    run->add_option("--max-steps", run_opt.max_steps, "Step budget (or SELENE_MAX_STEPS)");
    run->add_option("--eta", run_opt.eta, "Packet payload size in units")
        ->check(CLI::PositiveNumber);
    run->add_flag("--unsafe-skip-typecheck", run_opt.skip_typecheck,
                  "Execute even if the program is ill-typed");
    run->add_flag("--quiet", run_opt.quiet, "Suppress per-instant event lines");

    auto* project = app.add_subcommand("project", "Filter a trace to an observer's view");
    std::string project_trace, project_level, project_out;
    bool project_internal = false;
    project->add_option("trace", project_trace, "Trace document (JSON)")->required();
    project->add_option("--level", project_level, "Observer level")->required();
    project->add_flag("--internal", project_internal,
                      "Co-resident observer: include visible program events");
    project->add_option("--out", project_out, "Write the filtered trace document here");

    auto* verify = app.add_subcommand("verify-ni", "Bounded noninterference experiment");
    VerifyOptions verify_opt;
    verify->add_option("experiment", verify_opt.experiment_path, "Experiment file (JSON)")
        ->required();
    std::uint64_t verify_bound = 0;
    auto* bound_opt = verify->add_option("--bound", verify_bound, "Step budget per run");
    verify->add_option("--adversary", verify_opt.adversary, "Adversary level");
    verify->add_option("--mode", verify_opt.mode, "external or internal");
    verify->add_option("--knowledge", verify_opt.knowledge_path,
                       "Report which variants are consistent with this observed trace");

    auto* examples = app.add_subcommand("examples", "List or print the bundled corpus");
    std::string examples_name, examples_dir;
    examples->add_option("name", examples_name, "Print this bundled file");
    examples->add_option("--write-dir", examples_dir, "Materialize the whole corpus here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (bound_opt->count() > 0) verify_opt.bound = verify_bound;

    try {
        if (check->parsed()) return cmd_check(check_path);
        if (run->parsed()) return cmd_run(run_opt);
        if (project->parsed())
            return cmd_project(project_trace, project_level, project_internal, project_out);
        if (verify->parsed()) return cmd_verify(verify_opt);
        if (examples->parsed()) return cmd_examples(examples_name, examples_dir);
    } catch (const selene::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const selene::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const selene::EvalError& e) {
        std::cerr << "evaluation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
