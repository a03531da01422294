#pragma once

#include <deque>
#include <map>
#include <string>
#include <vector>

#include "selene/ast.hpp"
#include "selene/program.hpp"
#include "selene/value.hpp"

namespace selene {

// Memory: total over the declared variables. Declarations initialize int
// variables to 0 and string variables to "".
class Memory {
public:
    Memory() = default;

    static Memory initial(const TypingEnv& gamma) {
        Memory m;
        for (const auto& decl : gamma.decls()) {
            m.values_[decl.name] = decl.type.type.kind == ValueKind::Int
                                       ? Value::integer(0)
                                       : Value::string("");
        }
        return m;
    }

    const Value& at(const std::string& name) const {
        auto it = values_.find(name);
        if (it == values_.end()) throw ConfigError("memory has no variable '" + name + "'");
        return it->second;
    }

    void set(const std::string& name, Value v) { values_[name] = std::move(v); }

    bool has(const std::string& name) const { return values_.count(name) != 0; }

    const std::map<std::string, Value>& values() const { return values_; }

    // Every declared variable present with a value of its declared kind.
    bool well_formed(const TypingEnv& gamma) const {
        if (values_.size() != gamma.size()) return false;
        for (const auto& decl : gamma.decls()) {
            auto it = values_.find(decl.name);
            if (it == values_.end()) return false;
            if ((it->second.kind() == ValueKind::Int) !=
                (decl.type.type.kind == ValueKind::Int))
                return false;
        }
        return true;
    }

    friend bool operator==(const Memory& a, const Memory& b) { return a.values_ == b.values_; }
    friend bool operator!=(const Memory& a, const Memory& b) { return !(a == b); }

private:
    std::map<std::string, Value> values_;
};

// Pending input per channel, in arrival order. Timestamps within a channel
// list are non-decreasing; loaders validate this.
class InputEnv {
public:
    InputEnv() = default;

    const std::vector<TimedPacket>& at(ChannelId ch) const {
        static const std::vector<TimedPacket> empty;
        auto it = lists_.find(ch);
        return it == lists_.end() ? empty : it->second;
    }

    void set(ChannelId ch, std::vector<TimedPacket> packets) {
        for (std::size_t i = 1; i < packets.size(); ++i)
            if (packets[i].t < packets[i - 1].t)
                throw ConfigError("input timestamps must be non-decreasing per channel");
        if (packets.empty())
            lists_.erase(ch);
        else
            lists_[ch] = std::move(packets);
    }

    const std::map<ChannelId, std::vector<TimedPacket>>& lists() const { return lists_; }

    friend bool operator==(const InputEnv& a, const InputEnv& b) { return a.lists_ == b.lists_; }
    friend bool operator!=(const InputEnv& a, const InputEnv& b) { return !(a == b); }

private:
    std::map<ChannelId, std::vector<TimedPacket>> lists_;
};

// Outbound FIFO queue per channel. Only the runtime's send step removes
// packets; dummies are never queued, they are synthesized at send time.
class OutputEnv {
public:
    const std::deque<Packet>& at(ChannelId ch) const {
        static const std::deque<Packet> empty;
        auto it = queues_.find(ch);
        return it == queues_.end() ? empty : it->second;
    }

    void push_back(ChannelId ch, Packet p) { queues_[ch].push_back(std::move(p)); }

    Packet pop_front(ChannelId ch) {
        auto& q = queues_.at(ch);
        Packet p = q.front();
        q.pop_front();
        if (q.empty()) queues_.erase(ch);
        return p;
    }

    bool empty(ChannelId ch) const { return at(ch).empty(); }

    const std::map<ChannelId, std::deque<Packet>>& queues() const { return queues_; }

    friend bool operator==(const OutputEnv& a, const OutputEnv& b) {
        return a.queues_ == b.queues_;
    }
    friend bool operator!=(const OutputEnv& a, const OutputEnv& b) { return !(a == b); }

private:
    std::map<ChannelId, std::deque<Packet>> queues_;
};

// π: reserved send slots. Entries are never removed; a slot stays booked
// after its send fires.
using Schedule = std::map<Timestamp, ChannelId>;

struct ProgramConfig {
    CommandPtr command;
    Memory memory;
    InputEnv input;
};

inline bool config_structurally_equal(const ProgramConfig& a, const ProgramConfig& b) {
    return command_equal(a.command, b.command) && a.memory == b.memory && a.input == b.input;
}

struct GlobalConfig {
    ProgramConfig program;
    OutputEnv output;
    Schedule schedule;
    Timestamp ts = 0;
};

}  // namespace selene
