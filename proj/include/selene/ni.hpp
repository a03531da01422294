#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "selene/env.hpp"
#include "selene/events.hpp"
#include "selene/observe.hpp"
#include "selene/program.hpp"
#include "selene/runtime.hpp"

namespace selene {

enum class AttackerMode { External, Internal };

// A bounded noninterference experiment: a program, an adversary level, a base
// configuration, and finite variation carriers for the secrets (initial
// values of variables, and alternative payloads for hidden-channel input).
struct NIExperiment {
    SourceProgram program;
    TypingEnv gamma;
    Level adversary{};
    Memory base_memory;
    InputEnv base_input;
    std::vector<std::pair<std::string, std::vector<Value>>> vary_vars;
    std::vector<std::pair<ChannelId, std::vector<std::vector<TimedPacket>>>> vary_channels;
    std::uint64_t bound = 1000;
    AttackerMode mode = AttackerMode::External;
    std::uint32_t eta = 1;

    ProgramContext context() const { return ProgramContext(program.lattice, program.channels, gamma); }
};

struct NIVariant {
    Memory memory;
    InputEnv input;
    std::string description;
};

namespace detail {

inline std::optional<std::string> carrier_equiv_violation(const ProgramContext& ctx, Level adv,
                                                          AttackerMode mode,
                                                          const NIVariant& base,
                                                          const NIVariant& variant) {
    if (auto why = mem_equiv_explain(ctx, adv, base.memory, variant.memory))
        return "memory equivalence: " + *why;
    auto input_why = mode == AttackerMode::Internal
                         ? input_equiv_internal_explain(ctx, adv, base.input, variant.input)
                         : input_equiv_explain(ctx, adv, base.input, variant.input);
    if (input_why) return "input equivalence: " + *input_why;
    return std::nullopt;
}

}  // namespace detail

// The finite carrier: the base configuration plus the Cartesian product of
// all variations applied to it, deduplicated. Every element is validated to
// be equivalent to the base at the adversary level (all runs share the
// program body, so configuration equivalence reduces to memory and input);
// a violation is a configuration error naming the failed clause.
inline std::vector<NIVariant> enumerate_equiv_configs(const NIExperiment& exp) {
    ProgramContext ctx = exp.context();
    if (!exp.base_memory.well_formed(exp.gamma))
        throw ConfigError("base memory does not match the declared variables");
    for (const auto& [var, values] : exp.vary_vars) {
        const auto* t = exp.gamma.find(var);
        if (!t) throw ConfigError("variation names undeclared variable '" + var + "'");
        if (values.empty()) throw ConfigError("empty variation carrier for '" + var + "'");
        for (const auto& v : values)
            if ((v.kind() == ValueKind::Int) != (t->type.kind == ValueKind::Int))
                throw ConfigError("variation value for '" + var + "' has the wrong kind");
    }
    for (const auto& [ch, alternatives] : exp.vary_channels)
        if (alternatives.empty())
            throw ConfigError("empty variation carrier for channel '" +
                              exp.program.channels.name(ch) + "'");

    std::vector<NIVariant> out;
    out.push_back(NIVariant{exp.base_memory, exp.base_input, "base"});

    std::vector<std::size_t> dims;
    for (const auto& [_, values] : exp.vary_vars) dims.push_back(values.size());
    for (const auto& [_, alts] : exp.vary_channels) dims.push_back(alts.size());
    if (dims.empty()) return out;

    std::vector<std::size_t> odometer(dims.size(), 0);
    for (;;) {
        NIVariant variant{exp.base_memory, exp.base_input, ""};
        std::string desc;
        std::size_t d = 0;
        for (const auto& [var, values] : exp.vary_vars) {
            const Value& v = values[odometer[d++]];
            variant.memory.set(var, v);
            if (!desc.empty()) desc += ", ";
            desc += var + "=" +
                    (v.is_int() ? std::to_string(v.as_int()) : "\"" + v.as_string() + "\"");
        }
        for (const auto& [ch, alts] : exp.vary_channels) {
            std::size_t pick = odometer[d++];
            variant.input.set(ch, alts[pick]);
            if (!desc.empty()) desc += ", ";
            desc += exp.program.channels.name(ch) + "#" + std::to_string(pick + 1);
        }
        variant.description = std::move(desc);

        bool duplicate = false;
        for (const auto& existing : out)
            if (existing.memory == variant.memory && existing.input == variant.input) {
                duplicate = true;
                break;
            }
        if (!duplicate) {
            if (auto why = detail::carrier_equiv_violation(ctx, exp.adversary, exp.mode,
                                                           out.front(), variant))
                throw ConfigError("variant '" + variant.description +
                                  "' is not equivalent to the base: " + *why);
            out.push_back(std::move(variant));
        }

        std::size_t i = 0;
        for (; i < odometer.size(); ++i) {
            if (++odometer[i] < dims[i]) break;
            odometer[i] = 0;
        }
        if (i == odometer.size()) break;
    }
    return out;
}

struct NIRun {
    RunOutcome outcome;
    Trace filtered;
    // Timestamps at or beyond the horizon were never explored: the run hit
    // its budget there. Absent horizon means the run ended on its own.
    std::optional<Timestamp> horizon;
};

inline NIRun run_variant(const NIExperiment& exp, const NIVariant& variant, AttackerMode mode) {
    GlobalConfig g;
    g.program = ProgramConfig{exp.program.body, variant.memory, variant.input};
    RunParams params;
    params.max_steps = exp.bound;
    params.eta = exp.eta;
    NIRun r;
    r.outcome = run(std::move(g), params);
    ProgramContext ctx = exp.context();
    r.filtered = mode == AttackerMode::Internal
                     ? filter_trace_internal(ctx, exp.adversary, r.outcome.trace)
                     : filter_trace(ctx, exp.adversary, r.outcome.trace);
    if (r.outcome.status == RunStatus::BudgetExhausted) r.horizon = r.outcome.final.ts;
    return r;
}

namespace detail {

inline Trace truncate_before(const Trace& t, std::optional<Timestamp> horizon) {
    if (!horizon) return t;
    Trace out;
    for (const auto& ev : t)
        if (ev.ts < *horizon) out.push_back(ev);
    return out;
}

// Earliest timestamp at which the two filtered traces differ, or nullopt if
// equal. Both are timestamp-ordered, so the first differing index decides.
inline std::optional<Timestamp> first_divergence(const Trace& a, const Trace& b) {
    std::size_t k = 0;
    while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
    if (k == a.size() && k == b.size()) return std::nullopt;
    if (k < a.size() && k < b.size()) return std::min(a[k].ts, b[k].ts);
    return k < a.size() ? a[k].ts : b[k].ts;
}

}  // namespace detail

struct NIVerdict {
    bool pass = true;
    // True when some run exhausted the step budget: the verdict only covers
    // behavior up to the explored horizon.
    bool bounded = false;
    AttackerMode mode = AttackerMode::External;
    std::vector<std::string> variant_descriptions;
    std::vector<RunStatus> statuses;
    std::vector<Trace> filtered;

    // Counterexample fields, meaningful when !pass: the lexicographically
    // first pair attaining the earliest divergence. The two filtered traces
    // agree strictly before divergence_ts and differ at it.
    std::size_t counter_a = 0;
    std::size_t counter_b = 0;
    Timestamp divergence_ts = 0;
};

namespace detail {

inline NIVerdict check_ni_impl(const NIExperiment& exp, AttackerMode mode) {
    NIVerdict verdict;
    verdict.mode = mode;
    auto variants = enumerate_equiv_configs(exp);
    std::vector<NIRun> runs;
    runs.reserve(variants.size());
    for (const auto& v : variants) {
        runs.push_back(run_variant(exp, v, mode));
        verdict.variant_descriptions.push_back(v.description);
        verdict.statuses.push_back(runs.back().outcome.status);
        verdict.filtered.push_back(runs.back().filtered);
        if (runs.back().horizon) verdict.bounded = true;
    }

    std::optional<Timestamp> earliest;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        for (std::size_t j = i + 1; j < runs.size(); ++j) {
            std::optional<Timestamp> horizon = runs[i].horizon;
            if (runs[j].horizon && (!horizon || *runs[j].horizon < *horizon))
                horizon = runs[j].horizon;
            auto d = first_divergence(truncate_before(runs[i].filtered, horizon),
                                      truncate_before(runs[j].filtered, horizon));
            if (d && (!earliest || *d < *earliest)) {
                earliest = d;
                verdict.counter_a = i;
                verdict.counter_b = j;
            }
        }
    }
    if (earliest) {
        verdict.pass = false;
        verdict.divergence_ts = *earliest;
    }
    return verdict;
}

}  // namespace detail

// Bounded noninterference against the external attacker: all runs over the
// carrier must produce identical filtered traces within the explored horizon.
inline NIVerdict check_ni(const NIExperiment& exp) {
    return detail::check_ni_impl(exp, AttackerMode::External);
}

// Bounded noninterference against the internal attacker. A pass here must
// imply an external pass (the internal view refines the external one); that
// implication is revalidated on every passing internal verdict.
inline NIVerdict check_ni_internal(const NIExperiment& exp) {
    NIVerdict verdict = detail::check_ni_impl(exp, AttackerMode::Internal);
    if (verdict.pass) {
        NIVerdict external = detail::check_ni_impl(exp, AttackerMode::External);
        if (!external.pass)
            throw std::logic_error(
                "internal verdict passed but the external filtering diverges");
    }
    return verdict;
}

// Attacker knowledge restricted to the finite carrier: the variants whose
// bounded runs are consistent with the observation so far, i.e. whose
// filtered traces extend the filtered image of `observed`. Knowledge can
// only shrink as the observed trace grows.
inline std::vector<std::size_t> knowledge(const NIExperiment& exp, const Trace& observed) {
    ProgramContext ctx = exp.context();
    Trace target = exp.mode == AttackerMode::Internal
                       ? filter_trace_internal(ctx, exp.adversary, observed)
                       : filter_trace(ctx, exp.adversary, observed);
    auto variants = enumerate_equiv_configs(exp);
    std::vector<std::size_t> consistent;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        NIRun r = run_variant(exp, variants[i], exp.mode);
        if (r.filtered.size() < target.size()) continue;
        if (std::equal(target.begin(), target.end(), r.filtered.begin()))
            consistent.push_back(i);
    }
    return consistent;
}

}  // namespace selene
