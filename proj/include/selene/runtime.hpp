#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "selene/env.hpp"
#include "selene/events.hpp"
#include "selene/interp.hpp"
#include "selene/program.hpp"

namespace selene {

// Fragment a value into its wire packets: ceil(size/eta) fragments, each
// carrying the value and its position.
inline std::vector<Packet> split(const Value& v, std::uint32_t eta) {
    std::uint64_t n = packet_count(v, eta);
    std::vector<Packet> out;
    out.reserve(n);
    for (std::uint64_t j = 1; j <= n; ++j) out.push_back(Packet::fragment(Fragment{v, j, n}));
    return out;
}

// Reserve n slots for ch starting at t, skipping slots already booked.
// Non-positive n reserves nothing.
inline void rsv(Schedule& pi, ChannelId ch, std::int64_t n, Timestamp t) {
    while (n > 0) {
        if (!pi.count(t)) {
            pi.emplace(t, ch);
            --n;
        }
        ++t;
    }
}

// Apply a program event to the runtime state: queued values are fragmented
// onto their channel's queue, schedules book slots, everything else leaves
// the runtime untouched.
inline void upd(OutputEnv& out, Schedule& pi, const ProgramEvent& alpha, std::uint32_t eta) {
    if (const auto* q = std::get_if<QueueEv>(&alpha.node)) {
        for (auto& p : split(q->value, eta)) out.push_back(q->channel, std::move(p));
        return;
    }
    if (const auto* s = std::get_if<ScheduleEv>(&alpha.node)) {
        rsv(pi, s->channel, s->count, s->slot);
        return;
    }
}

// Emit one packet on ch: the queue's head, or a dummy if the queue is empty.
// A booked slot always transmits.
inline RuntimeEvent send(OutputEnv& out, ChannelId ch) {
    if (!out.empty(ch)) return RuntimeEvent::output(ch, out.pop_front(ch));
    return RuntimeEvent::output(ch, Packet::dummy());
}

struct GlobalStep {
    GlobalConfig next;
    GlobalEvent event;
    std::optional<Blocked> blocked;  // set when the program itself did not step
};

// One step of the global clock. Absent exactly when the program has stopped
// and no booked slot lies at or after the current instant: the system is
// quiescent and the trace is over.
//
// A schedule takes effect within its own step: the send decision at ts reads
// the updated reservations, so a zero-delay schedule transmits immediately.
inline std::optional<GlobalStep> step_global(const GlobalConfig& g, std::uint32_t eta) {
    LocalStepResult local = step_program(g.program, g.ts, eta);

    if (auto* stepped = std::get_if<Stepped>(&local)) {
        GlobalStep out{GlobalConfig{std::move(stepped->next), g.output, g.schedule, g.ts + 1},
                       GlobalEvent{g.ts, stepped->event, RuntimeEvent::eps()}, std::nullopt};
        upd(out.next.output, out.next.schedule, stepped->event, eta);
        auto slot = out.next.schedule.find(g.ts);
        if (slot != out.next.schedule.end())
            out.event.beta = send(out.next.output, slot->second);
        return out;
    }

    bool stopped = std::holds_alternative<AlreadyStopped>(local);
    if (stopped) {
        auto upcoming = g.schedule.lower_bound(g.ts);
        if (upcoming == g.schedule.end()) return std::nullopt;
    }

    // The program blocked (or has stopped with sends pending): the clock
    // still advances and booked slots still transmit.
    GlobalStep out{GlobalConfig{g.program, g.output, g.schedule, g.ts + 1},
                   GlobalEvent{g.ts, ProgramEvent::eps(), RuntimeEvent::eps()}, std::nullopt};
    if (!stopped) out.blocked = std::get<Blocked>(local);
    auto slot = g.schedule.find(g.ts);
    if (slot != g.schedule.end()) out.event.beta = send(out.next.output, slot->second);
    return out;
}

enum class RunStatus {
    Terminated,       // program stopped, all booked slots already sent
    BlockedQuiescent, // receive can never decode and nothing is booked
    StuckDiagnostic,  // negative duration or dynamic evaluation fault
    BudgetExhausted,  // step budget ran out first
};

inline const char* run_status_text(RunStatus s) {
    switch (s) {
        case RunStatus::Terminated: return "terminated";
        case RunStatus::BlockedQuiescent: return "blocked-quiescent";
        case RunStatus::StuckDiagnostic: return "stuck-diagnostic";
        case RunStatus::BudgetExhausted: return "budget-exhausted";
    }
    return "?";
}

struct RunParams {
    std::uint64_t max_steps = 10000;
    std::uint32_t eta = 1;
    // When set, memory well-formedness is revalidated after every step.
    const TypingEnv* debug_gamma = nullptr;
};

struct RunOutcome {
    GlobalConfig final;
    Trace trace;
    RunStatus status = RunStatus::Terminated;
    std::string diagnostic;
};

// Drive the global clock until quiescence, a permanent silence, or the step
// budget. The silence check is conservative: it only halts when provably no
// future event can occur (the program is permanently blocked or faulted and
// no booked slot remains), so the truncated infinite tail is all (eps, eps).
inline RunOutcome run(GlobalConfig g, const RunParams& params = {}) {
    RunOutcome outcome;
    Timestamp start = g.ts;
    for (;;) {
        if (outcome.trace.size() >= params.max_steps) {
            outcome.status = RunStatus::BudgetExhausted;
            break;
        }
        auto step = step_global(g, params.eta);
        if (!step) {
            outcome.status = RunStatus::Terminated;
            break;
        }
        if (step->blocked) {
            bool permanent = false;
            switch (step->blocked->reason) {
                case BlockReason::Input:
                    permanent = !input_can_ever_unblock(g.program);
                    break;
                case BlockReason::NegativeDuration:
                case BlockReason::EvalFault:
                    permanent = true;
                    break;
                case BlockReason::Awaiting:
                    break;
            }
            if (permanent && g.schedule.lower_bound(g.ts) == g.schedule.end()) {
                outcome.status = step->blocked->reason == BlockReason::Input
                                     ? RunStatus::BlockedQuiescent
                                     : RunStatus::StuckDiagnostic;
                outcome.diagnostic = std::string(block_reason_text(step->blocked->reason)) +
                                     ": " + step->blocked->detail;
                break;
            }
        }
        // Clock discipline: the i-th recorded event carries timestamp
        // start + i, and each step advances the clock by one.
        if (step->event.ts != start + outcome.trace.size() || step->next.ts != step->event.ts + 1)
            throw std::logic_error("clock discipline violated");
        outcome.trace.push_back(step->event);
        g = std::move(step->next);
        if (params.debug_gamma && !g.program.memory.well_formed(*params.debug_gamma))
            throw std::logic_error("memory well-formedness violated during run");
    }
    outcome.final = std::move(g);
    return outcome;
}

inline GlobalConfig make_initial_config(const SourceProgram& program, const TypingEnv& gamma,
                                        InputEnv input = {}) {
    GlobalConfig g;
    g.program = ProgramConfig{program.body, Memory::initial(gamma), std::move(input)};
    g.ts = 0;
    return g;
}

}  // namespace selene
