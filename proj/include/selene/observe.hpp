#pragma once

#include <optional>
#include <string>

#include "selene/env.hpp"
#include "selene/events.hpp"
#include "selene/program.hpp"

namespace selene {

// What an observer at level adv sees of a transmission: the packet itself on
// channels at or below adv, otherwise only the fact that the channel carried
// a packet. Idempotent, and monotone in adv.
inline RuntimeEvent project_runtime_event(const ProgramContext& ctx, Level adv,
                                          const RuntimeEvent& e) {
    if (const auto* out = std::get_if<OutputEv>(&e.node)) {
        if (ctx.lattice->leq(ctx.channels->level(out->channel), adv)) return e;
        return RuntimeEvent{OutputHiddenEv{out->channel}};
    }
    return e;
}

// What an observer at level adv sees of a program step. Schedules are always
// visible: slot bookings are traffic metadata the runtime does not hide.
// An assignment to a hidden string variable with a visible size level reveals
// only the stored size (in units, before packet framing).
inline ProgramEvent project_program_event(const ProgramContext& ctx, Level adv,
                                          const ProgramEvent& e) {
    const auto& lat = *ctx.lattice;
    if (const auto* a = std::get_if<AssignEv>(&e.node)) {
        const auto* t = ctx.gamma->find(a->var);
        if (!t) throw ConfigError("assignment event names undeclared variable '" + a->var + "'");
        if (lat.leq(t->level, adv)) return e;
        if (t->type.kind == ValueKind::String && lat.leq(t->type.size_level, adv))
            return ProgramEvent{AssignSizeEv{a->var, size_of_value(a->value)}};
        return ProgramEvent::eps();
    }
    if (const auto* a = std::get_if<AssignSizeEv>(&e.node)) {
        const auto* t = ctx.gamma->find(a->var);
        if (!t) throw ConfigError("assignment event names undeclared variable '" + a->var + "'");
        bool size_visible = t->type.kind == ValueKind::String
                                ? lat.leq(t->type.size_level, adv)
                                : lat.leq(t->level, adv);
        return size_visible ? e : ProgramEvent::eps();
    }
    if (const auto* q = std::get_if<QueueEv>(&e.node))
        return lat.leq(ctx.channels->level(q->channel), adv) ? e : ProgramEvent::eps();
    if (const auto* i = std::get_if<InputEv>(&e.node))
        return lat.leq(ctx.channels->level(i->channel), adv) ? e : ProgramEvent::eps();
    return e;  // eps and schedule events pass through
}

// External attacker's view: runtime events only. An instant survives iff its
// projected runtime event is not eps; the program event is erased entirely.
inline Trace filter_trace(const ProgramContext& ctx, Level adv, const Trace& trace) {
    Trace out;
    for (const auto& ev : trace) {
        RuntimeEvent beta = project_runtime_event(ctx, adv, ev.beta);
        if (beta.is_eps()) continue;
        out.push_back(GlobalEvent{ev.ts, ProgramEvent::eps(), std::move(beta)});
    }
    return out;
}

// Internal attacker's view: a co-resident observer also sees projected
// program events. An instant survives iff either projected part is not eps.
inline Trace filter_trace_internal(const ProgramContext& ctx, Level adv, const Trace& trace) {
    Trace out;
    for (const auto& ev : trace) {
        ProgramEvent alpha = project_program_event(ctx, adv, ev.alpha);
        RuntimeEvent beta = project_runtime_event(ctx, adv, ev.beta);
        if (alpha.is_eps() && beta.is_eps()) continue;
        out.push_back(GlobalEvent{ev.ts, std::move(alpha), std::move(beta)});
    }
    return out;
}

// The equivalence checkers return the first violated clause as text, or
// nullopt when the relation holds; the bool forms wrap them.

inline std::optional<std::string> mem_equiv_explain(const ProgramContext& ctx, Level adv,
                                                    const Memory& m1, const Memory& m2) {
    const auto& lat = *ctx.lattice;
    for (const auto& decl : ctx.gamma->decls()) {
        if (!m1.has(decl.name) || !m2.has(decl.name))
            throw ConfigError("memory is missing declared variable '" + decl.name + "'");
        const Value& v1 = m1.at(decl.name);
        const Value& v2 = m2.at(decl.name);
        if (lat.leq(decl.type.level, adv)) {
            if (v1 != v2) return "visible variable '" + decl.name + "' differs";
        } else if (decl.type.type.kind == ValueKind::String &&
                   lat.leq(decl.type.type.size_level, adv)) {
            if (size_of_value(v1) != size_of_value(v2))
                return "visible-size string '" + decl.name + "' differs in size";
        }
    }
    return std::nullopt;
}

inline bool mem_equiv(const ProgramContext& ctx, Level adv, const Memory& m1, const Memory& m2) {
    return !mem_equiv_explain(ctx, adv, m1, m2).has_value();
}

// Hidden channels must be network-indistinguishable: same number of packets
// with pairwise equal timestamps (sizes and contents are protected).
inline std::optional<std::string> input_equiv_explain(const ProgramContext& ctx, Level adv,
                                                      const InputEnv& i1, const InputEnv& i2) {
    const auto& lat = *ctx.lattice;
    for (std::uint16_t idx = 0; idx < ctx.channels->size(); ++idx) {
        ChannelId ch{idx};
        const auto& a = i1.at(ch);
        const auto& b = i2.at(ch);
        const std::string& name = ctx.channels->name(ch);
        if (lat.leq(ctx.channels->level(ch), adv)) {
            if (a != b) return "visible channel '" + name + "' differs";
        } else {
            if (a.size() != b.size())
                return "hidden channel '" + name + "' differs in packet count";
            for (std::size_t k = 0; k < a.size(); ++k)
                if (a[k].t != b[k].t)
                    return "hidden channel '" + name + "' differs in packet timestamps";
        }
    }
    return std::nullopt;
}

inline bool input_equiv(const ProgramContext& ctx, Level adv, const InputEnv& i1,
                        const InputEnv& i2) {
    return !input_equiv_explain(ctx, adv, i1, i2).has_value();
}

// The internal attacker sees its own receives, so hidden-channel traffic
// carries no additional information for it: only visible channels constrain.
inline std::optional<std::string> input_equiv_internal_explain(const ProgramContext& ctx,
                                                               Level adv, const InputEnv& i1,
                                                               const InputEnv& i2) {
    const auto& lat = *ctx.lattice;
    for (std::uint16_t idx = 0; idx < ctx.channels->size(); ++idx) {
        ChannelId ch{idx};
        if (!lat.leq(ctx.channels->level(ch), adv)) continue;
        if (i1.at(ch) != i2.at(ch))
            return "visible channel '" + ctx.channels->name(ch) + "' differs";
    }
    return std::nullopt;
}

inline bool input_equiv_internal(const ProgramContext& ctx, Level adv, const InputEnv& i1,
                                 const InputEnv& i2) {
    return !input_equiv_internal_explain(ctx, adv, i1, i2).has_value();
}

inline std::optional<std::string> output_equiv_explain(const ProgramContext& ctx, Level adv,
                                                       const OutputEnv& o1, const OutputEnv& o2) {
    const auto& lat = *ctx.lattice;
    for (std::uint16_t idx = 0; idx < ctx.channels->size(); ++idx) {
        ChannelId ch{idx};
        if (!lat.leq(ctx.channels->level(ch), adv)) continue;
        if (o1.at(ch) != o2.at(ch))
            return "visible channel '" + ctx.channels->name(ch) + "' queue differs";
    }
    return std::nullopt;
}

inline bool output_equiv(const ProgramContext& ctx, Level adv, const OutputEnv& o1,
                         const OutputEnv& o2) {
    return !output_equiv_explain(ctx, adv, o1, o2).has_value();
}

inline std::optional<std::string> config_equiv_explain(const ProgramContext& ctx, Level adv,
                                                       const ProgramConfig& p1,
                                                       const ProgramConfig& p2) {
    if (!command_equal(p1.command, p2.command)) return std::string("commands differ");
    if (auto why = mem_equiv_explain(ctx, adv, p1.memory, p2.memory))
        return "memory equivalence: " + *why;
    if (auto why = input_equiv_explain(ctx, adv, p1.input, p2.input))
        return "input equivalence: " + *why;
    return std::nullopt;
}

inline bool config_equiv(const ProgramContext& ctx, Level adv, const ProgramConfig& p1,
                         const ProgramConfig& p2) {
    return !config_equiv_explain(ctx, adv, p1, p2).has_value();
}

}  // namespace selene
