#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "selene/ast.hpp"
#include "selene/lattice.hpp"
#include "selene/value.hpp"

namespace selene {

// Value types: int, or string with a size level. The size level bounds what
// the byte length of the string may reveal; integers have a fixed size, so
// they carry none.
struct ValueType {
    ValueKind kind = ValueKind::Int;
    Level size_level{};  // meaningful only when kind == String

    static ValueType integer() { return ValueType{ValueKind::Int, Level{}}; }
    static ValueType string(Level size) { return ValueType{ValueKind::String, size}; }

    friend bool operator==(const ValueType& a, const ValueType& b) {
        if (a.kind != b.kind) return false;
        if (a.kind == ValueKind::Int) return true;
        return a.size_level == b.size_level;
    }
    friend bool operator!=(const ValueType& a, const ValueType& b) { return !(a == b); }
};

struct LabeledType {
    ValueType type;
    Level level{};

    friend bool operator==(const LabeledType& a, const LabeledType& b) {
        return a.type == b.type && a.level == b.level;
    }
};

struct ChannelDecl {
    std::string name;
    Level level{};
    SourcePos pos;
};

struct VarDecl {
    std::string name;
    LabeledType type;
    SourcePos pos;
};

class ChannelTable {
public:
    ChannelId add(ChannelDecl decl) {
        if (index_.count(decl.name))
            throw ConfigError("duplicate channel '" + decl.name + "'");
        ChannelId id{static_cast<std::uint16_t>(decls_.size())};
        index_.emplace(decl.name, id);
        decls_.push_back(std::move(decl));
        return id;
    }

    std::optional<ChannelId> find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& name(ChannelId id) const { return decls_.at(id.idx).name; }
    Level level(ChannelId id) const { return decls_.at(id.idx).level; }
    std::size_t size() const { return decls_.size(); }
    const std::vector<ChannelDecl>& decls() const { return decls_; }

private:
    std::vector<ChannelDecl> decls_;
    std::map<std::string, ChannelId> index_;
};

// Γ: the typing environment, mapping each declared variable to its labeled
// type. Iteration order is declaration order.
class TypingEnv {
public:
    void add(VarDecl decl) {
        if (index_.count(decl.name))
            throw ConfigError("duplicate variable '" + decl.name + "'");
        index_.emplace(decl.name, decls_.size());
        decls_.push_back(std::move(decl));
    }

    const LabeledType* find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return nullptr;
        return &decls_[it->second].type;
    }

    const LabeledType& at(const std::string& name) const {
        const auto* t = find(name);
        if (!t) throw ConfigError("unknown variable '" + name + "'");
        return *t;
    }

    std::size_t size() const { return decls_.size(); }
    const std::vector<VarDecl>& decls() const { return decls_; }

private:
    std::vector<VarDecl> decls_;
    std::map<std::string, std::size_t> index_;
};

// A parsed program: its lattice, declarations and body. The body references
// channels by id into `channels`.
struct SourceProgram {
    SecurityLattice lattice = SecurityLattice::two_point();
    ChannelTable channels;
    std::vector<VarDecl> vars;
    CommandPtr body;
};

inline TypingEnv build_gamma(const SourceProgram& program) {
    TypingEnv gamma;
    for (const auto& decl : program.vars) gamma.add(decl);
    return gamma;
}

// Everything observation and checking need to interpret identifiers: levels
// come from the lattice, channel levels from the table, variable types from Γ.
struct ProgramContext {
    const SecurityLattice* lattice = nullptr;
    const ChannelTable* channels = nullptr;
    const TypingEnv* gamma = nullptr;

    ProgramContext() = default;
    ProgramContext(const SecurityLattice& lat, const ChannelTable& chans, const TypingEnv& g)
        : lattice(&lat), channels(&chans), gamma(&g) {}
};

}  // namespace selene
