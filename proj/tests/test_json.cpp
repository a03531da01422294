#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>

#include "selene/json_io.hpp"
#include "selene/typecheck.hpp"
#include "testutil.hpp"

using namespace selene;

namespace {

Value rt_value(const Value& v) { return value_from_json(value_to_json(v), "test"); }

// A scratch directory for experiment-file tests, fresh per process.
std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() /
               ("selene-json-test-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

void put_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

const char* kTinyProgram =
    "channel Pub : L;\n"
    "channel Hi : H;\n"
    "var h : int @ H;\n"
    "queue(Pub, 1);\n"
    "schedule(Pub, 1, 1);\n";

}  // namespace

TEST(ValueJson, RoundTripsAndRejectsForeignShapes) {
    EXPECT_EQ(rt_value(Value::integer(0)), Value::integer(0));
    EXPECT_EQ(rt_value(Value::integer(-42)), Value::integer(-42));
    EXPECT_EQ(rt_value(Value::integer(std::numeric_limits<std::int64_t>::max())),
              Value::integer(std::numeric_limits<std::int64_t>::max()));
    EXPECT_EQ(rt_value(Value::string("")), Value::string(""));
    EXPECT_EQ(rt_value(Value::string("hello world")), Value::string("hello world"));
    EXPECT_EQ(rt_value(Value::string("quote\"and\\slash")), Value::string("quote\"and\\slash"));

    EXPECT_THROW(value_from_json(Json(true), "t"), ConfigError);
    EXPECT_THROW(value_from_json(Json(1.5), "t"), ConfigError);
    EXPECT_THROW(value_from_json(Json::array(), "t"), ConfigError);
    // An unsigned value beyond the signed range must not wrap silently.
    Json big = Json::parse("18446744073709551615");
    EXPECT_THROW(value_from_json(big, "t"), ConfigError);
}

TEST(FragmentJson, ValidatesTheIndexInvariant) {
    Fragment f{Value::string("abc"), 2, 4};
    Fragment back = fragment_from_json(fragment_to_json(f), "t");
    EXPECT_EQ(back.value, f.value);
    EXPECT_EQ(back.index, f.index);
    EXPECT_EQ(back.count, f.count);

    auto parse = [](const char* text) { return fragment_from_json(Json::parse(text), "t"); };
    EXPECT_THROW(parse(R"({"v": 1, "j": 0, "N": 2})"), ConfigError);
    EXPECT_THROW(parse(R"({"v": 1, "j": 3, "N": 2})"), ConfigError);
    EXPECT_THROW(parse(R"({"v": 1, "j": 1, "N": 0})"), ConfigError);
    EXPECT_THROW(parse(R"({"v": 1, "j": 1})"), ConfigError);
    EXPECT_THROW(parse(R"({"v": 1, "j": -1, "N": 2})"), ConfigError);
}

TEST(PacketJson, DummyAndFragmentAreExclusive) {
    TimedPacket dummy{7, Packet::dummy()};
    TimedPacket frag{9, Packet::fragment(Fragment{Value::integer(3), 1, 2})};
    EXPECT_EQ(timed_packet_from_json(timed_packet_to_json(dummy), "t"), dummy);
    EXPECT_EQ(timed_packet_from_json(timed_packet_to_json(frag), "t"), frag);

    auto parse = [](const char* text) { return timed_packet_from_json(Json::parse(text), "t"); };
    EXPECT_THROW(parse(R"({"frag": {"v": 1, "j": 1, "N": 1}})"), ConfigError);
    EXPECT_THROW(parse(R"({"t": 1})"), ConfigError);
    EXPECT_THROW(parse(R"({"t": 1, "dummy": true, "frag": {"v": 1, "j": 1, "N": 1}})"),
                 ConfigError);
    EXPECT_THROW(parse(R"({"t": -1, "dummy": true})"), ConfigError);
}

TEST(InputJson, KeysByChannelAndKeepsArrivalOrder) {
    ChannelTable channels;
    SecurityLattice lat = SecurityLattice::two_point();
    ChannelId a = channels.add({"A", lat.bottom(), {}});
    channels.add({"B", lat.top(), {}});

    InputEnv env;
    env.set(a, {TimedPacket{0, Packet::dummy()},
                TimedPacket{0, Packet::fragment(Fragment{Value::string("hi"), 1, 3})},
                TimedPacket{4, Packet::fragment(Fragment{Value::string("hi"), 2, 3})}});
    InputEnv back = input_env_from_json(channels, input_env_to_json(channels, env), "t");
    EXPECT_EQ(back, env);

    EXPECT_THROW(input_env_from_json(channels, Json::parse(R"({"C": []})"), "t"), ConfigError);
    EXPECT_THROW(input_env_from_json(channels, Json::parse(R"({"A": 3})"), "t"), ConfigError);
    EXPECT_THROW(input_env_from_json(channels, Json::parse(R"([])"), "t"), ConfigError);
    try {
        input_env_from_json(
            channels,
            Json::parse(R"({"A": [{"t": 5, "dummy": true}, {"t": 2, "dummy": true}]})"), "t");
        FAIL() << "decreasing timestamps must not load";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("non-decreasing"), std::string::npos);
    }
}

TEST(TraceJson, EveryEventKindRoundTrips) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        testutil::Gen g(seed);
        testutil::Scenario sc = testutil::gen_scenario(g);
        TraceDocument doc;
        doc.lattice = sc.program.lattice;
        doc.channels = sc.program.channels;
        doc.gamma = sc.gamma;
        doc.events = testutil::gen_raw_trace(g, sc, 15);

        std::string text = write_trace_text(doc);
        TraceDocument back = read_trace_text(text, "t");
        EXPECT_EQ(back.events, doc.events) << "seed " << seed;
        EXPECT_TRUE(back.lattice.same_shape(doc.lattice)) << "seed " << seed;
        ASSERT_EQ(back.channels.size(), doc.channels.size());
        for (std::uint16_t i = 0; i < doc.channels.size(); ++i) {
            ChannelId ch{i};
            EXPECT_EQ(back.channels.name(ch), doc.channels.name(ch));
            EXPECT_EQ(back.lattice.name(back.channels.level(ch)),
                      doc.lattice.name(doc.channels.level(ch)));
        }
        ASSERT_EQ(back.gamma.size(), doc.gamma.size());
        for (const auto& decl : doc.gamma.decls()) {
            const auto* t = back.gamma.find(decl.name);
            ASSERT_NE(t, nullptr);
            EXPECT_EQ(t->type.kind, decl.type.type.kind);
            EXPECT_EQ(back.lattice.name(t->level), doc.lattice.name(decl.type.level));
            if (t->type.kind == ValueKind::String)
                EXPECT_EQ(back.lattice.name(t->type.size_level),
                          doc.lattice.name(decl.type.type.size_level));
        }
        // Serialization is deterministic, so a second pass is bytewise equal.
        EXPECT_EQ(write_trace_text(back), text) << "seed " << seed;
        if (::testing::Test::HasFailure()) break;
    }
}

TEST(TraceJson, RedactedPacketsSurviveTheTrip) {
    SecurityLattice lat = SecurityLattice::two_point();
    TraceDocument doc;
    doc.lattice = lat;
    ChannelId hi = doc.channels.add({"Hi", lat.top(), {}});
    doc.events.push_back(GlobalEvent{3, ProgramEvent::eps(), RuntimeEvent{OutputHiddenEv{hi}}});
    doc.events.push_back(
        GlobalEvent{4, ProgramEvent{AssignSizeEv{"s", 9}}, RuntimeEvent::eps()});
    doc.gamma.add({"s", {ValueType::string(lat.bottom()), lat.top()}, {}});

    std::string text = write_trace_text(doc);
    EXPECT_NE(text.find("\"redacted\""), std::string::npos);
    TraceDocument back = read_trace_text(text, "t");
    EXPECT_EQ(back.events, doc.events);
}

TEST(TraceJson, RejectsMalformedDocuments) {
    auto read = [](const std::string& text) { return read_trace_text(text, "t"); };
    EXPECT_THROW(read("not json at all"), ConfigError);
    EXPECT_THROW(read(R"({"no_events": []})"), ConfigError);
    EXPECT_THROW(read(R"({"events": 7})"), ConfigError);
    EXPECT_THROW(read(R"({"events": [{"alpha": null}]})"), ConfigError);
    EXPECT_THROW(read(R"({"events": [{"ts": 0, "alpha": {"kind": "mystery"}}]})"), ConfigError);
    EXPECT_THROW(read(R"({"events": [{"ts": 0, "beta": {"kind": "output"}}]})"), ConfigError);
    // Events may only reference declared channels.
    EXPECT_THROW(
        read(R"({"events": [{"ts": 0, "alpha": {"kind": "queue", "ch": "X", "v": 1}}]})"),
        ConfigError);
    EXPECT_THROW(read(R"({"channels": {"C": "Mystery"}, "events": []})"), ConfigError);
    EXPECT_THROW(
        read(R"({"vars": {"x": {"type": "int", "level": "Mystery"}}, "events": []})"),
        ConfigError);
}

TEST(LatticeJson, ShapeSurvivesTheTrip) {
    SecurityLattice diamond = testutil::diamond();
    SecurityLattice back = lattice_from_json(lattice_to_json(diamond), "t");
    EXPECT_TRUE(back.same_shape(diamond));
    EXPECT_EQ(back.name(back.bottom()), diamond.name(diamond.bottom()));

    EXPECT_THROW(lattice_from_json(Json::parse(R"({"levels": ["A"]})"), "t"), ConfigError);
    EXPECT_THROW(lattice_from_json(Json::parse(R"({"edges": []})"), "t"), ConfigError);
    EXPECT_THROW(
        lattice_from_json(Json::parse(R"({"levels": ["A"], "edges": [["A"]]})"), "t"),
        ConfigError);
}

TEST(ExperimentJson, LoadsFieldsAndAppliesDefaults) {
    auto dir = scratch_dir();
    put_file(dir / "prog.sel", kTinyProgram);
    put_file(dir / "exp.json", R"({
        "program": "prog.sel",
        "memory": {"h": 7},
        "inputs": {"Hi": [{"t": 2, "frag": {"v": 5, "j": 1, "N": 1}}]},
        "vary": {
            "vars": {"h": [0, 1]},
            "channels": {"Hi": [[{"t": 2, "dummy": true}]]}
        }
    })");

    NIExperiment exp = load_experiment_file((dir / "exp.json").string());
    EXPECT_EQ(exp.bound, 1000u);
    EXPECT_EQ(exp.eta, 1u);
    EXPECT_TRUE(exp.mode == AttackerMode::External);
    EXPECT_EQ(exp.program.lattice.name(exp.adversary), "L");
    EXPECT_EQ(exp.base_memory.at("h"), Value::integer(7));
    ChannelId hi = *exp.program.channels.find("Hi");
    ASSERT_EQ(exp.base_input.at(hi).size(), 1u);
    EXPECT_EQ(exp.base_input.at(hi)[0].t, 2u);
    ASSERT_EQ(exp.vary_vars.size(), 1u);
    EXPECT_EQ(exp.vary_vars[0].first, "h");
    EXPECT_EQ(exp.vary_vars[0].second.size(), 2u);
    ASSERT_EQ(exp.vary_channels.size(), 1u);
    EXPECT_EQ(exp.vary_channels[0].first, hi);

    // The carrier this file describes actually enumerates.
    EXPECT_EQ(enumerate_equiv_configs(exp).size(), 3u);
}

TEST(ExperimentJson, HonorsExplicitSettings) {
    auto dir = scratch_dir();
    put_file(dir / "prog2.sel", kTinyProgram);
    put_file(dir / "exp2.json", R"({
        "program": "prog2.sel",
        "adversary": "H",
        "bound": 64,
        "eta": 3,
        "mode": "internal"
    })");
    NIExperiment exp = load_experiment_file((dir / "exp2.json").string());
    EXPECT_EQ(exp.bound, 64u);
    EXPECT_EQ(exp.eta, 3u);
    EXPECT_TRUE(exp.mode == AttackerMode::Internal);
    EXPECT_EQ(exp.program.lattice.name(exp.adversary), "H");
}

TEST(ExperimentJson, RejectsBrokenFiles) {
    auto dir = scratch_dir();
    put_file(dir / "prog3.sel", kTinyProgram);
    auto write_exp = [&](const std::string& body) {
        put_file(dir / "bad.json", body);
        return (dir / "bad.json").string();
    };

    EXPECT_THROW(load_experiment_file((dir / "absent.json").string()), ConfigError);
    EXPECT_THROW(load_experiment_file(write_exp("{nope")), ConfigError);
    EXPECT_THROW(load_experiment_file(write_exp(R"({"bound": 3})")), ConfigError);
    EXPECT_THROW(load_experiment_file(write_exp(R"({"program": "missing.sel"})")), ConfigError);
    EXPECT_THROW(
        load_experiment_file(write_exp(R"({"program": "prog3.sel", "adversary": "X"})")),
        ConfigError);
    EXPECT_THROW(load_experiment_file(write_exp(R"({"program": "prog3.sel", "eta": 0})")),
                 ConfigError);
    EXPECT_THROW(
        load_experiment_file(write_exp(R"({"program": "prog3.sel", "mode": "sideways"})")),
        ConfigError);
    EXPECT_THROW(
        load_experiment_file(write_exp(R"({"program": "prog3.sel", "memory": {"nope": 1}})")),
        ConfigError);
    EXPECT_THROW(
        load_experiment_file(write_exp(R"({"program": "prog3.sel", "memory": {"h": "s"}})")),
        ConfigError);
    EXPECT_THROW(
        load_experiment_file(
            write_exp(R"({"program": "prog3.sel", "vary": {"channels": {"X": [[]]}}})")),
        ConfigError);
}

TEST(ExperimentJson, BundledExperimentsAllLoadAndEnumerate) {
    std::filesystem::path dir = std::filesystem::path(SELENE_CORPUS_DIR) / "experiments";
    std::size_t count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        ++count;
        NIExperiment exp = load_experiment_file(entry.path().string());
        EXPECT_GE(exp.bound, 1u) << entry.path();
        auto variants = enumerate_equiv_configs(exp);
        EXPECT_GE(variants.size(), 2u) << entry.path();
    }
    EXPECT_EQ(count, 10u);
}
