#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace selene {

enum class ValueKind { Int, String };

// Runtime values: 64-bit integers and byte strings. Booleans are integers
// with 0 as false and anything else as true.
class Value {
public:
    Value() : rep_(std::int64_t{0}) {}
    explicit Value(std::int64_t v) : rep_(v) {}
    explicit Value(std::string s) : rep_(std::move(s)) {}

    static Value integer(std::int64_t v) { return Value(v); }
    static Value string(std::string s) { return Value(std::move(s)); }

    ValueKind kind() const {
        return std::holds_alternative<std::int64_t>(rep_) ? ValueKind::Int : ValueKind::String;
    }
    bool is_int() const { return kind() == ValueKind::Int; }
    bool is_string() const { return kind() == ValueKind::String; }

    std::int64_t as_int() const { return std::get<std::int64_t>(rep_); }
    const std::string& as_string() const { return std::get<std::string>(rep_); }

    // Abstract size in pre-fragmentation units: integers occupy one unit,
    // strings one unit per byte plus a terminator unit.
    std::uint64_t size_units() const {
        if (is_int()) return 1;
        return static_cast<std::uint64_t>(as_string().size()) + 1;
    }

    friend bool operator==(const Value& a, const Value& b) { return a.rep_ == b.rep_; }
    friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }
    friend bool operator<(const Value& a, const Value& b) { return a.rep_ < b.rep_; }

private:
    std::variant<std::int64_t, std::string> rep_;
};

inline std::uint64_t size_of_value(const Value& v) { return v.size_units(); }

// Number of packets a value occupies at fragment capacity eta: ceil(size/eta).
inline std::uint64_t packet_count(const Value& v, std::uint32_t eta) {
    return (v.size_units() + eta - 1) / eta;
}

// The j-th of count packets carrying value `value`. Fragments are opaque to
// observers below the channel's level; carrying the whole value in each
// fragment models encrypted payloads without modeling an encoding.
struct Fragment {
    Value value;
    std::uint64_t index = 1;  // 1-based
    std::uint64_t count = 1;

    friend bool operator==(const Fragment& a, const Fragment& b) {
        return a.index == b.index && a.count == b.count && a.value == b.value;
    }
    friend bool operator!=(const Fragment& a, const Fragment& b) { return !(a == b); }
};

// A packet is either a value fragment or a dummy indistinguishable from one
// on the wire.
struct Packet {
    std::optional<Fragment> frag;

    static Packet dummy() { return Packet{}; }
    static Packet fragment(Fragment f) { return Packet{std::move(f)}; }

    bool is_dummy() const { return !frag.has_value(); }

    friend bool operator==(const Packet& a, const Packet& b) { return a.frag == b.frag; }
    friend bool operator!=(const Packet& a, const Packet& b) { return !(a == b); }
};

using Timestamp = std::uint64_t;

struct TimedPacket {
    Timestamp t = 0;
    Packet packet;

    friend bool operator==(const TimedPacket& a, const TimedPacket& b) {
        return a.t == b.t && a.packet == b.packet;
    }
    friend bool operator!=(const TimedPacket& a, const TimedPacket& b) { return !(a == b); }
};

}  // namespace selene
