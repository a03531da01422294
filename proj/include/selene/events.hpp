#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "selene/ast.hpp"
#include "selene/value.hpp"

namespace selene {

// Program events: what a single program step did. AssignSizeEv appears only
// in projected traces, where a hidden string assignment reveals its size.
struct EpsEv {
    friend bool operator==(EpsEv, EpsEv) { return true; }
};
struct AssignEv {
    std::string var;
    Value value;
    friend bool operator==(const AssignEv& a, const AssignEv& b) {
        return a.var == b.var && a.value == b.value;
    }
};
struct AssignSizeEv {
    std::string var;
    std::uint64_t size = 0;
    friend bool operator==(const AssignSizeEv& a, const AssignSizeEv& b) {
        return a.var == b.var && a.size == b.size;
    }
};
struct QueueEv {
    ChannelId channel;
    Value value;
    friend bool operator==(const QueueEv& a, const QueueEv& b) {
        return a.channel == b.channel && a.value == b.value;
    }
};
struct ScheduleEv {
    ChannelId channel;
    std::int64_t count = 0;
    Timestamp slot = 0;  // absolute first slot being reserved
    friend bool operator==(const ScheduleEv& a, const ScheduleEv& b) {
        return a.channel == b.channel && a.count == b.count && a.slot == b.slot;
    }
};
struct InputEv {
    ChannelId channel;
    std::string var;
    Value value;
    friend bool operator==(const InputEv& a, const InputEv& b) {
        return a.channel == b.channel && a.var == b.var && a.value == b.value;
    }
};

struct ProgramEvent {
    std::variant<EpsEv, AssignEv, AssignSizeEv, QueueEv, ScheduleEv, InputEv> node;

    static ProgramEvent eps() { return {EpsEv{}}; }
    bool is_eps() const { return std::holds_alternative<EpsEv>(node); }

    friend bool operator==(const ProgramEvent& a, const ProgramEvent& b) {
        return a.node == b.node;
    }
    friend bool operator!=(const ProgramEvent& a, const ProgramEvent& b) { return !(a == b); }
};

// Runtime events: what the send step emitted. OutputHiddenEv appears only in
// projected traces: the packet left on a channel above the observer, so only
// the fact of transmission is visible.
struct OutputEv {
    ChannelId channel;
    Packet packet;
    friend bool operator==(const OutputEv& a, const OutputEv& b) {
        return a.channel == b.channel && a.packet == b.packet;
    }
};
struct OutputHiddenEv {
    ChannelId channel;
    friend bool operator==(const OutputHiddenEv& a, const OutputHiddenEv& b) {
        return a.channel == b.channel;
    }
};

struct RuntimeEvent {
    std::variant<EpsEv, OutputEv, OutputHiddenEv> node;

    static RuntimeEvent eps() { return {EpsEv{}}; }
    static RuntimeEvent output(ChannelId ch, Packet p) {
        return {OutputEv{ch, std::move(p)}};
    }
    bool is_eps() const { return std::holds_alternative<EpsEv>(node); }

    friend bool operator==(const RuntimeEvent& a, const RuntimeEvent& b) {
        return a.node == b.node;
    }
    friend bool operator!=(const RuntimeEvent& a, const RuntimeEvent& b) { return !(a == b); }
};

// One global step: at timestamp ts the program emitted alpha and the runtime
// emitted beta. A step where nothing observable happened carries (eps, eps).
struct GlobalEvent {
    Timestamp ts = 0;
    ProgramEvent alpha = ProgramEvent::eps();
    RuntimeEvent beta = RuntimeEvent::eps();

    friend bool operator==(const GlobalEvent& a, const GlobalEvent& b) {
        return a.ts == b.ts && a.alpha == b.alpha && a.beta == b.beta;
    }
    friend bool operator!=(const GlobalEvent& a, const GlobalEvent& b) { return !(a == b); }
};

using Trace = std::vector<GlobalEvent>;

}  // namespace selene
