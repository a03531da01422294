// Release gates for the toolchain. Each test checks one acceptance
// criterion end to end and prints a single pass/fail line with its cost.

#include <gtest/gtest.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "selene/interp.hpp"
#include "selene/json_io.hpp"
#include "selene/ni.hpp"
#include "selene/observe.hpp"
#include "selene/parser.hpp"
#include "selene/runtime.hpp"
#include "selene/typecheck.hpp"
#include "testutil.hpp"

namespace fs = std::filesystem;
using namespace selene;

namespace {

class Criterion {
public:
    Criterion(int number, std::string what, double budget_seconds)
        : number_(number),
          what_(std::move(what)),
          budget_(budget_seconds),
          start_(std::chrono::steady_clock::now()) {}

    ~Criterion() {
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        if (budget_ > 0) EXPECT_LE(elapsed, budget_) << "criterion " << number_ << " over budget";
        const char* verdict = ::testing::Test::HasFailure() ? "FAIL" : "PASS";
        std::printf("[criterion %d] %s: %s (%.2fs)\n", number_, verdict, what_.c_str(), elapsed);
        std::fflush(stdout);
    }

private:
    int number_;
    std::string what_;
    double budget_;
    std::chrono::steady_clock::time_point start_;
};

std::string corpus(const std::string& rel) {
    return std::string(SELENE_CORPUS_DIR) + "/" + rel;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(in.good()) << path;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct CmdResult {
    int code;
    std::string out;
};

CmdResult cli(const std::string& args) {
    std::string cmd = std::string(SELENE_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, "popen failed"};
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, std::move(out)};
}

struct Loaded {
    SourceProgram program;
    TypingEnv gamma;
};

Loaded load(const std::string& rel) {
    ParsedProgram parsed = parse_program(slurp(corpus(rel)));
    TypingEnv gamma = build_gamma(parsed.program);
    return {std::move(parsed.program), std::move(gamma)};
}

std::vector<Timestamp> output_timestamps(const Trace& trace) {
    std::vector<Timestamp> out;
    for (const auto& ev : trace)
        if (std::holds_alternative<OutputEv>(ev.beta.node)) out.push_back(ev.ts);
    return out;
}

std::string memory_repr(const TypingEnv& gamma, const Memory& m) {
    std::string out;
    for (const auto& decl : gamma.decls())
        out += decl.name + "=" + value_to_json(m.at(decl.name)).dump() + ";";
    return out;
}

}  // namespace

TEST(Acceptance, CorpusTypability) {
    Criterion gate(1, "programs 5-7 typecheck, 3b is rejected at its branch schedule", 1.0);
    for (const char* name : {"program5.sel", "program6.sel", "program7.sel"}) {
        Loaded l = load(name);
        TypecheckReport report = check_program(l.program, l.gamma);
        EXPECT_TRUE(report.ok()) << name;
    }

    std::string source = slurp(corpus("program3b.sel"));
    std::uint32_t schedule_line = 0;
    {
        std::istringstream in(source);
        std::string line;
        for (std::uint32_t n = 1; std::getline(in, line); ++n) {
            if (line.find("schedule(") != std::string::npos) {
                schedule_line = n;
                break;
            }
        }
    }
    ASSERT_GT(schedule_line, 0u);

    Loaded l = load("program3b.sel");
    TypecheckReport report = check_program(l.program, l.gamma);
    ASSERT_FALSE(report.ok());
    ASSERT_FALSE(report.issues.empty());
    EXPECT_EQ(report.issues.front().rule, "T-Schedule");
    EXPECT_EQ(report.issues.front().pos.line, schedule_line);
}

TEST(Acceptance, PacketCountsFollowTheSecret) {
    Criterion gate(2, "program 3b emits 6 packets for h=1 and 1 packet for h=0", 1.0);
    Loaded l = load("program3b.sel");
    auto outputs_for = [&](std::int64_t h) {
        GlobalConfig cfg = make_initial_config(l.program, l.gamma);
        cfg.program.memory.set("h", Value::integer(h));
        RunOutcome out = run(cfg, RunParams{.max_steps = 1000, .eta = 1});
        EXPECT_EQ(out.status, RunStatus::Terminated) << "h=" << h;
        return output_timestamps(out.trace).size();
    };
    EXPECT_EQ(outputs_for(1), 6u);
    EXPECT_EQ(outputs_for(0), 1u);

    CmdResult r = cli("run " + corpus("program3b.sel") + " --unsafe-skip-typecheck --set h=1");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("outputs Alice: 6"), std::string::npos) << r.out;
}

TEST(Acceptance, SecondPacketRefutesNoninterference) {
    Criterion gate(3, "verify-ni pins 3b's divergence to the second packet", 1.0);
    NIExperiment exp = load_experiment_file(corpus("experiments/program3b.json"));
    EXPECT_EQ(exp.adversary, exp.program.lattice.bottom());

    NIVerdict verdict = check_ni(exp);
    EXPECT_FALSE(verdict.pass);
    ASSERT_EQ(verdict.variant_descriptions.size(), 2u);
    EXPECT_EQ(verdict.variant_descriptions[verdict.counter_a], "base");
    EXPECT_EQ(verdict.variant_descriptions[verdict.counter_b], "h=1");

    GlobalConfig cfg = make_initial_config(exp.program, exp.gamma, exp.base_input);
    cfg.program.memory = exp.base_memory;
    cfg.program.memory.set("h", Value::integer(1));
    RunOutcome out = run(cfg, RunParams{.max_steps = exp.bound, .eta = exp.eta});
    std::vector<Timestamp> emissions = output_timestamps(out.trace);
    ASSERT_GE(emissions.size(), 2u);
    EXPECT_EQ(verdict.divergence_ts, emissions[1]);
    EXPECT_EQ(verdict.divergence_ts, 4u);

    CmdResult r = cli("verify-ni " + corpus("experiments/program3b.json"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("divergence at ts=4"), std::string::npos) << r.out;
}

TEST(Acceptance, WellTypedCorpusKeepsItsSecrets) {
    Criterion gate(4, "programs 5-7 pass bounded NI against both attackers", 30.0);
    for (const char* stem : {"program5", "program6", "program7"}) {
        for (bool internal : {false, true}) {
            std::string rel =
                std::string("experiments/") + stem + (internal ? "_internal.json" : ".json");
            NIExperiment exp = load_experiment_file(corpus(rel));
            EXPECT_EQ(exp.bound, 1000u) << rel;
            EXPECT_EQ(exp.mode, internal ? AttackerMode::Internal : AttackerMode::External)
                << rel;

            std::vector<NIVariant> variants = enumerate_equiv_configs(exp);
            std::set<std::string> memories;
            std::set<std::string> inputs;
            for (const NIVariant& v : variants) {
                memories.insert(memory_repr(exp.gamma, v.memory));
                inputs.insert(input_env_to_json(exp.program.channels, v.input).dump());
            }
            EXPECT_GE(memories.size(), 4u) << rel;
            EXPECT_GE(inputs.size(), 2u) << rel;

            NIVerdict verdict = internal ? check_ni_internal(exp) : check_ni(exp);
            EXPECT_TRUE(verdict.pass) << rel;
        }
    }
}

TEST(Acceptance, LeakyPatternsAreRefuted) {
    Criterion gate(5, "programs 1, 2 and 4 each yield a counterexample", 5.0);
    struct Row {
        const char* rel;
        Timestamp divergence;
    };
    for (Row row : {Row{"experiments/program1.json", 4}, Row{"experiments/program2.json", 2},
                    Row{"experiments/program4.json", 2}}) {
        NIExperiment exp = load_experiment_file(corpus(row.rel));
        NIVerdict verdict = check_ni(exp);
        EXPECT_FALSE(verdict.pass) << row.rel;
        EXPECT_EQ(verdict.divergence_ts, row.divergence) << row.rel;
    }
}

TEST(Acceptance, SemanticLemmasHoldUnderRandomization) {
    Criterion gate(6, "four lemma suites of 1000 randomized cases each", 60.0);

    // Local steps keep the memory well-formed.
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        testutil::Gen g(seed);
        testutil::Scenario sc = testutil::gen_scenario(g);
        testutil::CommandGen cg(g, sc);
        std::uint32_t eta = g.coin() ? 1 : 2;
        ProgramConfig p{cg.command(sc.program.lattice.bottom(), 6).first,
                        testutil::gen_memory(g, sc.gamma),
                        testutil::gen_input(g, sc.program.channels)};
        ASSERT_TRUE(p.memory.well_formed(sc.gamma)) << "seed " << seed;
        for (Timestamp now = 0; now < 30; ++now) {
            LocalStepResult r = step_program(p, now, eta);
            if (std::holds_alternative<AlreadyStopped>(r)) break;
            if (auto* s = std::get_if<Stepped>(&r)) {
                p = s->next;
                ASSERT_TRUE(p.memory.well_formed(sc.gamma)) << "seed " << seed << " ts " << now;
            }
        }
    }

    // Steps of a command typed under a context the adversary cannot see
    // project to silence and preserve memory equivalence.
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        testutil::Gen g(10000 + seed);
        testutil::Scenario sc = testutil::gen_scenario(g);
        const SecurityLattice& lat = sc.program.lattice;
        ProgramContext ctx = sc.ctx();

        std::vector<std::pair<Level, Level>> pairs;
        for (Level pc : lat.all_levels())
            for (Level adv : lat.all_levels())
                if (!lat.leq(pc, adv)) pairs.emplace_back(pc, adv);
        ASSERT_FALSE(pairs.empty());
        auto [pc, adv] = g.pick(pairs);

        testutil::CommandGen cg(g, sc);
        CommandPtr cmd = cg.command(pc, 5).first;
        ASSERT_TRUE(type_cmd(lat, sc.gamma, sc.program.channels, *cmd, pc).has_value())
            << "seed " << seed;

        ProgramConfig p{cmd, testutil::gen_memory(g, sc.gamma),
                        testutil::gen_input(g, sc.program.channels)};
        Memory first = p.memory;
        std::uint32_t eta = g.coin() ? 1 : 2;
        for (Timestamp now = 0; now < 30; ++now) {
            LocalStepResult r = step_program(p, now, eta);
            if (std::holds_alternative<AlreadyStopped>(r)) break;
            if (auto* s = std::get_if<Stepped>(&r)) {
                ASSERT_TRUE(project_program_event(ctx, adv, s->event).is_eps())
                    << "seed " << seed << " ts " << now;
                ASSERT_TRUE(mem_equiv(ctx, adv, p.memory, s->next.memory))
                    << "seed " << seed << " ts " << now;
                p = s->next;
            }
        }
        EXPECT_TRUE(mem_equiv(ctx, adv, first, p.memory)) << "seed " << seed;
    }

    // The external view of a trace is the internal view with program halves
    // erased and silent instants dropped.
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        testutil::Gen g(20000 + seed);
        testutil::Scenario sc = testutil::gen_scenario(g);
        ProgramContext ctx = sc.ctx();
        Trace raw = testutil::gen_raw_trace(g, sc, 15);
        Level adv = g.pick(sc.program.lattice.all_levels());

        Trace external = filter_trace(ctx, adv, raw);
        Trace derived;
        for (const GlobalEvent& ev : filter_trace_internal(ctx, adv, raw)) {
            if (ev.beta.is_eps()) continue;
            derived.push_back(GlobalEvent{ev.ts, ProgramEvent::eps(), ev.beta});
        }
        ASSERT_EQ(derived, external) << "seed " << seed;
    }

    // choose undoes split: fragments timestamped at or before the receive
    // instant decode back to the original value with nothing left over.
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        testutil::Gen g(30000 + seed);
        ValueKind kind = g.coin() ? ValueKind::Int : ValueKind::String;
        Value v = testutil::gen_value(g, kind);
        std::uint32_t eta = static_cast<std::uint32_t>(g.int_between(1, 4));

        std::vector<TimedPacket> stream;
        Timestamp ts = static_cast<Timestamp>(g.int_between(0, 3));
        Timestamp last = ts;
        for (Packet& frag : split(v, eta)) {
            for (int d = g.int_between(0, 2); d > 0; --d)
                stream.push_back(TimedPacket{ts, Packet::dummy()});
            ts += static_cast<Timestamp>(g.int_between(0, 2));
            stream.push_back(TimedPacket{ts, std::move(frag)});
            last = ts;
        }

        auto decoded = choose(stream, kind, last);
        ASSERT_TRUE(decoded.has_value()) << "seed " << seed;
        EXPECT_EQ(decoded->first, v) << "seed " << seed;
        EXPECT_TRUE(decoded->second.empty()) << "seed " << seed;
        if (last > 0) EXPECT_FALSE(choose(stream, kind, last - 1).has_value()) << "seed " << seed;
    }
}

TEST(Acceptance, TracesAreReproducible) {
    Criterion gate(7, "10 repeated runs of every corpus program write identical traces", 0.0);
    fs::path dir = fs::temp_directory_path() / ("selene-acceptance-" + std::to_string(getpid()));
    fs::create_directories(dir);
    for (const char* name : {"program1.sel", "program2.sel", "program3b.sel", "program4.sel",
                             "program5.sel", "program6.sel", "program7.sel"}) {
        fs::path trace = dir / (std::string(name) + ".trace.json");
        std::string first;
        for (int i = 0; i < 10; ++i) {
            CmdResult r = cli("run " + corpus(name) +
                              " --unsafe-skip-typecheck --quiet --max-steps 400 --trace " +
                              trace.string());
            ASSERT_EQ(r.code, 0) << name << "\n" << r.out;
            std::string text = slurp(trace.string());
            ASSERT_FALSE(text.empty()) << name;
            if (i == 0)
                first = text;
            else
                ASSERT_EQ(text, first) << name << " differs on run " << i;
        }
    }
    fs::remove_all(dir);
}

TEST(Acceptance, EquivalenceRelationLaws) {
    Criterion gate(8, "equivalence laws hold on 500 randomized environments", 0.0);
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        testutil::Gen g(40000 + seed);
        testutil::check_equiv_laws_once(g);
        if (::testing::Test::HasFailure()) {
            ADD_FAILURE() << "seed " << seed;
            break;
        }
    }
}
