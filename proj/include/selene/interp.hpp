#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "selene/ast.hpp"
#include "selene/env.hpp"
#include "selene/events.hpp"
#include "selene/value.hpp"

namespace selene {

// Dynamic evaluation failure: operator applied to a string, string guard,
// and similar. Unreachable from well-typed programs; reachable when the
// checker is skipped.
class EvalError : public std::runtime_error {
public:
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) +
                                     static_cast<std::uint64_t>(b));
}
inline std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) -
                                     static_cast<std::uint64_t>(b));
}
inline std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) *
                                     static_cast<std::uint64_t>(b));
}

}  // namespace detail

// Big-step expression evaluation. Expressions are pure; operators are total
// over ints (arithmetic wraps) and undefined over strings.
inline Value eval_expr(const Memory& m, const Expr& e) {
    if (const auto* lit = std::get_if<IntLit>(&e.node)) return Value::integer(lit->value);
    if (const auto* lit = std::get_if<StrLit>(&e.node)) return Value::string(lit->value);
    if (const auto* var = std::get_if<VarRef>(&e.node)) {
        if (!m.has(var->name)) throw EvalError("unbound variable '" + var->name + "'");
        return m.at(var->name);
    }
    const auto& b = std::get<BinExpr>(e.node);
    Value lhs = eval_expr(m, *b.lhs);
    Value rhs = eval_expr(m, *b.rhs);
    if (!lhs.is_int() || !rhs.is_int())
        throw EvalError(std::string("operator '") + binop_text(b.op) +
                        "' applied to a string value");
    std::int64_t a = lhs.as_int();
    std::int64_t c = rhs.as_int();
    switch (b.op) {
        case BinOp::Add: return Value::integer(detail::wrap_add(a, c));
        case BinOp::Sub: return Value::integer(detail::wrap_sub(a, c));
        case BinOp::Mul: return Value::integer(detail::wrap_mul(a, c));
        case BinOp::Eq: return Value::integer(a == c ? 1 : 0);
        case BinOp::Ne: return Value::integer(a != c ? 1 : 0);
        case BinOp::Lt: return Value::integer(a < c ? 1 : 0);
        case BinOp::Le: return Value::integer(a <= c ? 1 : 0);
        case BinOp::Gt: return Value::integer(a > c ? 1 : 0);
        case BinOp::Ge: return Value::integer(a >= c ? 1 : 0);
        case BinOp::And: return Value::integer(a != 0 && c != 0 ? 1 : 0);
        case BinOp::Or: return Value::integer(a != 0 || c != 0 ? 1 : 0);
        case BinOp::Min: return Value::integer(std::min(a, c));
        case BinOp::Max: return Value::integer(std::max(a, c));
    }
    throw EvalError("unknown operator");
}

// Decode one value of kind `want` from the packet stream, consuming at most
// the packets with timestamp <= now. Fragments of other kinds are retained
// (in order) for a later receive; dummies are discarded. Absent means the
// receive blocks at this instant.
//
// The accumulator is complete when it holds fragments 1..N of one value, in
// order.  Decoding is intentionally literal: out-of-order or interleaved
// fragments of distinct values make the accumulator permanently incomplete.
inline std::optional<std::pair<Value, std::vector<TimedPacket>>> choose(
    const std::vector<TimedPacket>& packets, ValueKind want, Timestamp now,
    std::vector<Fragment> acc = {}) {
    auto complete = [&]() -> bool {
        if (acc.empty()) return false;
        if (acc.size() != acc.front().count) return false;
        for (std::size_t i = 0; i < acc.size(); ++i) {
            if (acc[i].index != i + 1) return false;
            if (acc[i].count != acc.front().count) return false;
            if (acc[i].value != acc.front().value) return false;
        }
        return true;
    };

    std::vector<TimedPacket> remainder;
    std::size_t i = 0;
    for (;;) {
        if (complete()) {
            remainder.insert(remainder.end(), packets.begin() + i, packets.end());
            return std::make_pair(acc.front().value, std::move(remainder));
        }
        if (i >= packets.size() || packets[i].t > now) return std::nullopt;
        const TimedPacket& head = packets[i++];
        if (head.packet.is_dummy()) continue;
        if (head.packet.frag->value.kind() == want)
            acc.push_back(*head.packet.frag);
        else
            remainder.push_back(head);
    }
}

enum class BlockReason {
    Input,             // receive cannot decode a value yet
    Awaiting,          // sleeping until a resume timestamp
    NegativeDuration,  // sleep or schedule evaluated a negative delay
    EvalFault,         // dynamic type error while evaluating an expression
};

inline const char* block_reason_text(BlockReason r) {
    switch (r) {
        case BlockReason::Input: return "blocked-on-input";
        case BlockReason::Awaiting: return "blocked-on-await";
        case BlockReason::NegativeDuration: return "stuck-negative-duration";
        case BlockReason::EvalFault: return "stuck-eval-fault";
    }
    return "?";
}

struct Stepped {
    ProgramConfig next;
    ProgramEvent event;
};
struct Blocked {
    BlockReason reason = BlockReason::Input;
    std::string detail;
};
struct AlreadyStopped {};

using LocalStepResult = std::variant<Stepped, Blocked, AlreadyStopped>;

// One local step of the program at timestamp now. Deterministic: commands
// select at most one rule, and every rule's premises are functions of the
// configuration and the clock.
inline LocalStepResult step_program(const ProgramConfig& p, Timestamp now, std::uint32_t eta) {
    const Command& c = *p.command;

    auto eval = [&](const Expr& e) { return eval_expr(p.memory, e); };

    try {
        if (std::holds_alternative<CStop>(c.node)) return AlreadyStopped{};

        if (std::holds_alternative<CSkip>(c.node))
            return Stepped{ProgramConfig{make_stop(), p.memory, p.input}, ProgramEvent::eps()};

        if (const auto* a = std::get_if<CAssign>(&c.node)) {
            Value v = eval(*a->expr);
            ProgramConfig next{make_stop(), p.memory, p.input};
            next.memory.set(a->var, v);
            return Stepped{std::move(next), ProgramEvent{AssignEv{a->var, v}}};
        }

        if (const auto* s = std::get_if<CSizeOf>(&c.node)) {
            Value v = eval(*s->expr);
            auto n = static_cast<std::int64_t>(packet_count(v, eta));
            ProgramConfig next{make_stop(), p.memory, p.input};
            next.memory.set(s->var, Value::integer(n));
            return Stepped{std::move(next), ProgramEvent{AssignEv{s->var, Value::integer(n)}}};
        }

        if (const auto* s = std::get_if<CSeq>(&c.node)) {
            ProgramConfig sub{s->first, p.memory, p.input};
            LocalStepResult r = step_program(sub, now, eta);
            if (auto* stepped = std::get_if<Stepped>(&r)) {
                CommandPtr rest = is_stop(stepped->next.command)
                                      ? s->rest
                                      : make_seq(stepped->next.command, s->rest);
                return Stepped{ProgramConfig{rest, std::move(stepped->next.memory),
                                             std::move(stepped->next.input)},
                               stepped->event};
            }
            return r;  // Blocked propagates; AlreadyStopped cannot occur here
        }

        if (const auto* s = std::get_if<CSleep>(&c.node)) {
            Value w = eval(*s->duration);
            if (!w.is_int()) throw EvalError("sleep duration must be an int");
            if (w.as_int() < 0)
                return Blocked{BlockReason::NegativeDuration,
                               "sleep(" + std::to_string(w.as_int()) + ")"};
            ProgramConfig next{make_await(now + static_cast<Timestamp>(w.as_int())), p.memory,
                               p.input};
            return Stepped{std::move(next), ProgramEvent::eps()};
        }

        if (const auto* a = std::get_if<CAwait>(&c.node)) {
            if (now >= a->resume_at)
                return Stepped{ProgramConfig{make_stop(), p.memory, p.input},
                               ProgramEvent::eps()};
            return Blocked{BlockReason::Awaiting,
                           "await(" + std::to_string(a->resume_at) + ")"};
        }

        if (const auto* i = std::get_if<CIf>(&c.node)) {
            Value v = eval(*i->guard);
            if (!v.is_int()) throw EvalError("guard must be an int");
            CommandPtr branch = v.as_int() != 0 ? i->then_branch : i->else_branch;
            return Stepped{ProgramConfig{branch, p.memory, p.input}, ProgramEvent::eps()};
        }

        if (const auto* w = std::get_if<CWhile>(&c.node)) {
            // while e do c unfolds to if e then { c; while e do c } else skip.
            CommandPtr unfolded =
                make_if(w->guard, make_seq(w->body, p.command), make_skip());
            return Stepped{ProgramConfig{unfolded, p.memory, p.input}, ProgramEvent::eps()};
        }

        if (const auto* in = std::get_if<CIn>(&c.node)) {
            if (!p.memory.has(in->var)) throw EvalError("unbound variable '" + in->var + "'");
            ValueKind want = p.memory.at(in->var).kind();
            auto decoded = choose(p.input.at(in->channel), want, now);
            if (!decoded) return Blocked{BlockReason::Input, "in"};
            ProgramConfig next{make_stop(), p.memory, p.input};
            next.memory.set(in->var, decoded->first);
            next.input.set(in->channel, std::move(decoded->second));
            return Stepped{std::move(next),
                           ProgramEvent{InputEv{in->channel, in->var, decoded->first}}};
        }

        if (const auto* sc = std::get_if<CSchedule>(&c.node)) {
            Value n = eval(*sc->count);
            Value w = eval(*sc->delay);
            if (!n.is_int() || !w.is_int())
                throw EvalError("schedule arguments must be ints");
            if (w.as_int() < 0)
                return Blocked{BlockReason::NegativeDuration,
                               "schedule(..., " + std::to_string(w.as_int()) + ")"};
            Timestamp slot = now + static_cast<Timestamp>(w.as_int());
            return Stepped{ProgramConfig{make_stop(), p.memory, p.input},
                           ProgramEvent{ScheduleEv{sc->channel, n.as_int(), slot}}};
        }

        const auto& q = std::get<CQueue>(c.node);
        Value v = eval(*q.expr);
        return Stepped{ProgramConfig{make_stop(), p.memory, p.input},
                       ProgramEvent{QueueEv{q.channel, v}}};
    } catch (const EvalError& e) {
        return Blocked{BlockReason::EvalFault, e.what()};
    }
}

// Whether a blocked receive could unblock if the clock ran forever: decoding
// with every pending packet eligible. Used to distinguish a transient input
// wait from a permanent one.
inline bool input_can_ever_unblock(const ProgramConfig& p) {
    const Command* c = p.command.get();
    while (const auto* s = std::get_if<CSeq>(&c->node)) c = s->first.get();
    const auto* in = std::get_if<CIn>(&c->node);
    if (!in) return false;
    if (!p.memory.has(in->var)) return false;
    ValueKind want = p.memory.at(in->var).kind();
    return choose(p.input.at(in->channel), want, std::numeric_limits<Timestamp>::max())
        .has_value();
}

}  // namespace selene
