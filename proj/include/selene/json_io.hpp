#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "selene/env.hpp"
#include "selene/events.hpp"
#include "selene/ni.hpp"
#include "selene/parser.hpp"
#include "selene/program.hpp"

namespace selene {

using Json = nlohmann::json;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
}

inline Json parse_json(const std::string& text, const std::string& what) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("malformed JSON in " + what);
    return j;
}

inline Json value_to_json(const Value& v) {
    if (v.is_int()) return Json(v.as_int());
    return Json(v.as_string());
}

inline Value value_from_json(const Json& j, const std::string& what) {
    if (j.is_string()) return Value::string(j.get<std::string>());
    if (j.is_number_integer()) {
        if (j.is_number_unsigned() &&
            j.get<std::uint64_t>() >
                static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
            throw ConfigError(what + ": integer out of range");
        return Value::integer(j.get<std::int64_t>());
    }
    throw ConfigError(what + ": expected an int or a string");
}

inline std::uint64_t nat_from_json(const Json& j, const std::string& what) {
    if (!j.is_number_integer())
        throw ConfigError(what + ": expected a non-negative integer");
    if (!j.is_number_unsigned() && j.get<std::int64_t>() < 0)
        throw ConfigError(what + ": expected a non-negative integer");
    return j.get<std::uint64_t>();
}

inline Json fragment_to_json(const Fragment& f) {
    Json j;
    j["v"] = value_to_json(f.value);
    j["j"] = f.index;
    j["N"] = f.count;
    return j;
}

inline Fragment fragment_from_json(const Json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("v") || !j.contains("j") || !j.contains("N"))
        throw ConfigError(what + ": fragment needs fields v, j, N");
    Fragment f;
    f.value = value_from_json(j.at("v"), what + ".v");
    f.index = nat_from_json(j.at("j"), what + ".j");
    f.count = nat_from_json(j.at("N"), what + ".N");
    if (f.index == 0 || f.count == 0 || f.index > f.count)
        throw ConfigError(what + ": fragment index must satisfy 1 <= j <= N");
    return f;
}

inline Json timed_packet_to_json(const TimedPacket& p) {
    Json j;
    j["t"] = p.t;
    if (p.packet.is_dummy())
        j["dummy"] = true;
    else
        j["frag"] = fragment_to_json(*p.packet.frag);
    return j;
}

inline TimedPacket timed_packet_from_json(const Json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("t"))
        throw ConfigError(what + ": packet needs a timestamp field t");
    TimedPacket p;
    p.t = nat_from_json(j.at("t"), what + ".t");
    bool dummy = j.value("dummy", false);
    if (dummy) {
        if (j.contains("frag")) throw ConfigError(what + ": packet cannot be both frag and dummy");
        p.packet = Packet::dummy();
        return p;
    }
    if (!j.contains("frag")) throw ConfigError(what + ": packet needs frag or dummy");
    p.packet = Packet::fragment(fragment_from_json(j.at("frag"), what + ".frag"));
    return p;
}

inline Json input_env_to_json(const ChannelTable& channels, const InputEnv& env) {
    Json j = Json::object();
    for (const auto& [ch, packets] : env.lists()) {
        Json list = Json::array();
        for (const auto& p : packets) list.push_back(timed_packet_to_json(p));
        j[channels.name(ch)] = std::move(list);
    }
    return j;
}

inline InputEnv input_env_from_json(const ChannelTable& channels, const Json& j,
                                    const std::string& what) {
    if (!j.is_object()) throw ConfigError(what + ": expected an object keyed by channel");
    InputEnv env;
    for (const auto& [name, list] : j.items()) {
        auto ch = channels.find(name);
        if (!ch) throw ConfigError(what + ": unknown channel '" + name + "'");
        if (!list.is_array()) throw ConfigError(what + "." + name + ": expected an array");
        std::vector<TimedPacket> packets;
        for (std::size_t i = 0; i < list.size(); ++i)
            packets.push_back(
                timed_packet_from_json(list[i], what + "." + name + "[" + std::to_string(i) + "]"));
        try {
            env.set(*ch, std::move(packets));
        } catch (const ConfigError& e) {
            throw ConfigError(what + "." + name + ": " + e.what());
        }
    }
    return env;
}

// --- trace documents ---------------------------------------------------
//
// A trace file is self-describing: it carries the lattice, the channel
// levels and the variable types alongside the events, so projection can run
// on the file alone. Hidden payloads in projected traces serialize as an
// explicit {"redacted": true} marker.

inline Json alpha_to_json(const ChannelTable& channels, const ProgramEvent& e) {
    if (e.is_eps()) return Json();  // null
    Json j;
    if (const auto* a = std::get_if<AssignEv>(&e.node)) {
        j["kind"] = "assign";
        j["x"] = a->var;
        j["v"] = value_to_json(a->value);
    } else if (const auto* a = std::get_if<AssignSizeEv>(&e.node)) {
        j["kind"] = "assign_size";
        j["x"] = a->var;
        j["size"] = a->size;
    } else if (const auto* q = std::get_if<QueueEv>(&e.node)) {
        j["kind"] = "queue";
        j["ch"] = channels.name(q->channel);
        j["v"] = value_to_json(q->value);
    } else if (const auto* s = std::get_if<ScheduleEv>(&e.node)) {
        j["kind"] = "schedule";
        j["ch"] = channels.name(s->channel);
        j["n"] = s->count;
        j["t"] = s->slot;
    } else if (const auto* i = std::get_if<InputEv>(&e.node)) {
        j["kind"] = "input";
        j["ch"] = channels.name(i->channel);
        j["x"] = i->var;
        j["v"] = value_to_json(i->value);
    }
    return j;
}

inline ProgramEvent alpha_from_json(const ChannelTable& channels, const Json& j,
                                    const std::string& what) {
    if (j.is_null()) return ProgramEvent::eps();
    if (!j.is_object() || !j.contains("kind")) throw ConfigError(what + ": malformed event");
    auto channel = [&](const Json& name) {
        auto ch = channels.find(name.get<std::string>());
        if (!ch) throw ConfigError(what + ": unknown channel");
        return *ch;
    };
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "assign")
        return ProgramEvent{AssignEv{j.at("x").get<std::string>(),
                                     value_from_json(j.at("v"), what + ".v")}};
    if (kind == "assign_size")
        return ProgramEvent{AssignSizeEv{j.at("x").get<std::string>(),
                                         nat_from_json(j.at("size"), what + ".size")}};
    if (kind == "queue")
        return ProgramEvent{QueueEv{channel(j.at("ch")),
                                    value_from_json(j.at("v"), what + ".v")}};
    if (kind == "schedule")
        return ProgramEvent{ScheduleEv{channel(j.at("ch")),
                                       j.at("n").get<std::int64_t>(),
                                       nat_from_json(j.at("t"), what + ".t")}};
    if (kind == "input")
        return ProgramEvent{InputEv{channel(j.at("ch")), j.at("x").get<std::string>(),
                                    value_from_json(j.at("v"), what + ".v")}};
    throw ConfigError(what + ": unknown program event kind '" + kind + "'");
}

inline Json beta_to_json(const ChannelTable& channels, const RuntimeEvent& e) {
    if (e.is_eps()) return Json();  // null
    Json j;
    j["kind"] = "output";
    if (const auto* out = std::get_if<OutputEv>(&e.node)) {
        j["ch"] = channels.name(out->channel);
        if (out->packet.is_dummy())
            j["packet"] = Json{{"dummy", true}};
        else
            j["packet"] = fragment_to_json(*out->packet.frag);
    } else {
        const auto& hidden = std::get<OutputHiddenEv>(e.node);
        j["ch"] = channels.name(hidden.channel);
        j["packet"] = Json{{"redacted", true}};
    }
    return j;
}

inline RuntimeEvent beta_from_json(const ChannelTable& channels, const Json& j,
                                   const std::string& what) {
    if (j.is_null()) return RuntimeEvent::eps();
    if (!j.is_object() || j.value("kind", "") != "output" || !j.contains("ch") ||
        !j.contains("packet"))
        throw ConfigError(what + ": malformed runtime event");
    auto ch = channels.find(j.at("ch").get<std::string>());
    if (!ch) throw ConfigError(what + ": unknown channel");
    const Json& packet = j.at("packet");
    if (packet.is_object() && packet.value("redacted", false))
        return RuntimeEvent{OutputHiddenEv{*ch}};
    if (packet.is_object() && packet.value("dummy", false))
        return RuntimeEvent::output(*ch, Packet::dummy());
    return RuntimeEvent::output(
        *ch, Packet::fragment(fragment_from_json(packet, what + ".packet")));
}

struct TraceDocument {
    SecurityLattice lattice = SecurityLattice::two_point();
    ChannelTable channels;
    TypingEnv gamma;
    Trace events;

    ProgramContext context() const { return ProgramContext(lattice, channels, gamma); }
};

inline Json lattice_to_json(const SecurityLattice& lat) {
    Json j;
    Json levels = Json::array();
    for (auto l : lat.all_levels()) levels.push_back(lat.name(l));
    j["levels"] = std::move(levels);
    Json edges = Json::array();
    for (const auto& [lo, hi] : lat.cover_edges()) edges.push_back(Json::array({lo, hi}));
    j["edges"] = std::move(edges);
    return j;
}

inline SecurityLattice lattice_from_json(const Json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("levels") || !j.contains("edges"))
        throw ConfigError(what + ": lattice needs levels and edges");
    std::vector<std::string> names;
    for (const auto& n : j.at("levels")) names.push_back(n.get<std::string>());
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2)
            throw ConfigError(what + ": each edge is a [lo, hi] pair");
        edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    return SecurityLattice(std::move(names), edges);
}

inline Json trace_document_to_json(const TraceDocument& doc) {
    Json j;
    j["lattice"] = lattice_to_json(doc.lattice);
    Json channels = Json::object();
    for (const auto& decl : doc.channels.decls())
        channels[decl.name] = doc.lattice.name(decl.level);
    j["channels"] = std::move(channels);
    Json vars = Json::object();
    for (const auto& decl : doc.gamma.decls()) {
        Json v;
        if (decl.type.type.kind == ValueKind::Int) {
            v["type"] = "int";
        } else {
            v["type"] = "string";
            v["size_level"] = doc.lattice.name(decl.type.type.size_level);
        }
        v["level"] = doc.lattice.name(decl.type.level);
        vars[decl.name] = std::move(v);
    }
    j["vars"] = std::move(vars);
    Json events = Json::array();
    for (const auto& ev : doc.events) {
        Json e;
        e["ts"] = ev.ts;
        e["alpha"] = alpha_to_json(doc.channels, ev.alpha);
        e["beta"] = beta_to_json(doc.channels, ev.beta);
        events.push_back(std::move(e));
    }
    j["events"] = std::move(events);
    return j;
}

inline TraceDocument trace_document_from_json(const Json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("events"))
        throw ConfigError(what + ": trace document needs an events array");
    TraceDocument doc;
    if (j.contains("lattice")) doc.lattice = lattice_from_json(j.at("lattice"), what + ".lattice");
    if (j.contains("channels")) {
        for (const auto& [name, level] : j.at("channels").items()) {
            auto l = doc.lattice.find(level.get<std::string>());
            if (!l) throw ConfigError(what + ": channel '" + name + "' has an unknown level");
            doc.channels.add(ChannelDecl{name, *l, SourcePos{}});
        }
    }
    if (j.contains("vars")) {
        for (const auto& [name, spec] : j.at("vars").items()) {
            auto level = doc.lattice.find(spec.at("level").get<std::string>());
            if (!level) throw ConfigError(what + ": variable '" + name + "' has an unknown level");
            ValueType vt = ValueType::integer();
            if (spec.at("type").get<std::string>() == "string") {
                auto size = spec.contains("size_level")
                                ? doc.lattice.find(spec.at("size_level").get<std::string>())
                                : level;
                if (!size)
                    throw ConfigError(what + ": variable '" + name +
                                      "' has an unknown size level");
                vt = ValueType::string(*size);
            }
            doc.gamma.add(VarDecl{name, LabeledType{vt, *level}, SourcePos{}});
        }
    }
    const Json& events = j.at("events");
    if (!events.is_array()) throw ConfigError(what + ": events must be an array");
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Json& e = events[i];
        std::string ctx = what + ".events[" + std::to_string(i) + "]";
        if (!e.is_object() || !e.contains("ts")) throw ConfigError(ctx + ": malformed event");
        GlobalEvent ev;
        ev.ts = nat_from_json(e.at("ts"), ctx + ".ts");
        ev.alpha = alpha_from_json(doc.channels, e.value("alpha", Json()), ctx + ".alpha");
        ev.beta = beta_from_json(doc.channels, e.value("beta", Json()), ctx + ".beta");
        doc.events.push_back(std::move(ev));
    }
    return doc;
}

inline std::string write_trace_text(const TraceDocument& doc) {
    return trace_document_to_json(doc).dump(2) + "\n";
}

inline TraceDocument read_trace_text(const std::string& text, const std::string& what) {
    return trace_document_from_json(parse_json(text, what), what);
}

// --- experiments --------------------------------------------------------

inline std::string dirname_of(const std::string& path) {
    auto slash = path.find_last_of('/');
    if (slash == std::string::npos) return ".";
    return path.substr(0, slash);
}

// Load an experiment file. The referenced program is parsed from the path in
// its "program" field, resolved relative to the experiment file's directory.
inline NIExperiment load_experiment_file(const std::string& path) {
    Json j = parse_json(read_file(path), path);
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    if (!j.contains("program")) throw ConfigError(path + ": missing program field");
    std::string program_path = j.at("program").get<std::string>();
    if (!program_path.empty() && program_path.front() != '/')
        program_path = dirname_of(path) + "/" + program_path;

    NIExperiment exp;
    exp.program = parse_program(read_file(program_path)).program;
    exp.gamma = build_gamma(exp.program);

    auto adv_name = j.value("adversary", std::string("L"));
    auto adv = exp.program.lattice.find(adv_name);
    if (!adv) throw ConfigError(path + ": unknown adversary level '" + adv_name + "'");
    exp.adversary = *adv;

    exp.bound = j.contains("bound") ? nat_from_json(j.at("bound"), path + ".bound") : 1000;
    if (j.contains("eta")) {
        auto eta = nat_from_json(j.at("eta"), path + ".eta");
        if (eta == 0) throw ConfigError(path + ": eta must be positive");
        exp.eta = static_cast<std::uint32_t>(eta);
    }
    std::string mode = j.value("mode", std::string("external"));
    if (mode == "external")
        exp.mode = AttackerMode::External;
    else if (mode == "internal")
        exp.mode = AttackerMode::Internal;
    else
        throw ConfigError(path + ": mode must be external or internal");

    exp.base_memory = Memory::initial(exp.gamma);
    if (j.contains("memory")) {
        for (const auto& [name, value] : j.at("memory").items()) {
            const auto* t = exp.gamma.find(name);
            if (!t) throw ConfigError(path + ": memory names undeclared variable '" + name + "'");
            Value v = value_from_json(value, path + ".memory." + name);
            if ((v.kind() == ValueKind::Int) != (t->type.kind == ValueKind::Int))
                throw ConfigError(path + ": memory value for '" + name + "' has the wrong kind");
            exp.base_memory.set(name, std::move(v));
        }
    }
    if (j.contains("inputs"))
        exp.base_input =
            input_env_from_json(exp.program.channels, j.at("inputs"), path + ".inputs");

    if (j.contains("vary")) {
        const Json& vary = j.at("vary");
        if (vary.contains("vars")) {
            for (const auto& [name, list] : vary.at("vars").items()) {
                if (!list.is_array())
                    throw ConfigError(path + ".vary.vars." + name + ": expected an array");
                std::vector<Value> values;
                for (const auto& v : list)
                    values.push_back(value_from_json(v, path + ".vary.vars." + name));
                exp.vary_vars.emplace_back(name, std::move(values));
            }
        }
        if (vary.contains("channels")) {
            for (const auto& [name, alts] : vary.at("channels").items()) {
                auto ch = exp.program.channels.find(name);
                if (!ch) throw ConfigError(path + ": variation names unknown channel '" + name + "'");
                if (!alts.is_array())
                    throw ConfigError(path + ".vary.channels." + name + ": expected an array");
                std::vector<std::vector<TimedPacket>> alternatives;
                for (std::size_t a = 0; a < alts.size(); ++a) {
                    if (!alts[a].is_array())
                        throw ConfigError(path + ".vary.channels." + name +
                                          ": each alternative is a packet array");
                    std::vector<TimedPacket> packets;
                    for (std::size_t i = 0; i < alts[a].size(); ++i)
                        packets.push_back(timed_packet_from_json(
                            alts[a][i], path + ".vary.channels." + name + "[" +
                                            std::to_string(a) + "][" + std::to_string(i) + "]"));
                    alternatives.push_back(std::move(packets));
                }
                exp.vary_channels.emplace_back(*ch, std::move(alternatives));
            }
        }
    }
    return exp;
}

}  // namespace selene
