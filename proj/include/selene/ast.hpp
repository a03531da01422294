#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "selene/lattice.hpp"
#include "selene/value.hpp"

namespace selene {

struct SourcePos {
    std::uint32_t line = 0;  // 1-based; 0 means synthesized during execution
    std::uint32_t col = 0;

    friend bool operator==(SourcePos a, SourcePos b) { return a.line == b.line && a.col == b.col; }
};

// Channels are named endpoints with a fixed security level. Runtime
// structures refer to them by table index.
struct ChannelId {
    std::uint16_t idx = 0;

    friend bool operator==(ChannelId a, ChannelId b) { return a.idx == b.idx; }
    friend bool operator!=(ChannelId a, ChannelId b) { return a.idx != b.idx; }
    friend bool operator<(ChannelId a, ChannelId b) { return a.idx < b.idx; }
};

enum class BinOp {
    Add, Sub, Mul,
    Eq, Ne, Lt, Le, Gt, Ge,
    And, Or,
    Min, Max,
};

inline const char* binop_text(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Eq: return "==";
        case BinOp::Ne: return "!=";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::And: return "&&";
        case BinOp::Or: return "||";
        case BinOp::Min: return "min";
        case BinOp::Max: return "max";
    }
    return "?";
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct IntLit { std::int64_t value = 0; };
struct StrLit { std::string value; };
struct VarRef { std::string name; };
struct BinExpr {
    BinOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};

struct Expr {
    std::variant<IntLit, StrLit, VarRef, BinExpr> node;
    SourcePos pos;
};

inline ExprPtr make_int(std::int64_t v, SourcePos p = {}) {
    return std::make_shared<Expr>(Expr{IntLit{v}, p});
}
inline ExprPtr make_str(std::string s, SourcePos p = {}) {
    return std::make_shared<Expr>(Expr{StrLit{std::move(s)}, p});
}
inline ExprPtr make_var(std::string name, SourcePos p = {}) {
    return std::make_shared<Expr>(Expr{VarRef{std::move(name)}, p});
}
inline ExprPtr make_binop(BinOp op, ExprPtr l, ExprPtr r, SourcePos p = {}) {
    return std::make_shared<Expr>(Expr{BinExpr{op, std::move(l), std::move(r)}, p});
}

inline bool expr_equal(const Expr& a, const Expr& b);
inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return expr_equal(*a, *b);
}
inline bool expr_equal(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    if (const auto* ai = std::get_if<IntLit>(&a.node))
        return ai->value == std::get<IntLit>(b.node).value;
    if (const auto* as = std::get_if<StrLit>(&a.node))
        return as->value == std::get<StrLit>(b.node).value;
    if (const auto* av = std::get_if<VarRef>(&a.node))
        return av->name == std::get<VarRef>(b.node).name;
    const auto& ab = std::get<BinExpr>(a.node);
    const auto& bb = std::get<BinExpr>(b.node);
    return ab.op == bb.op && expr_equal(ab.lhs, bb.lhs) && expr_equal(ab.rhs, bb.rhs);
}

struct Command;
using CommandPtr = std::shared_ptr<const Command>;

struct CSkip {};
struct CStop {};
struct CAssign { std::string var; ExprPtr expr; };
struct CSizeOf { std::string var; ExprPtr expr; };
struct CSeq { CommandPtr first; CommandPtr rest; };
struct CSleep { ExprPtr duration; };
struct CAwait { Timestamp resume_at = 0; };  // internal only, produced by sleep
struct CIf { ExprPtr guard; CommandPtr then_branch; CommandPtr else_branch; };
struct CWhile { ExprPtr guard; CommandPtr body; };
struct CIn { std::string var; ChannelId channel; };
struct CSchedule { ChannelId channel; ExprPtr count; ExprPtr delay; };
struct CQueue { ChannelId channel; ExprPtr expr; };

struct Command {
    std::variant<CSkip, CStop, CAssign, CSizeOf, CSeq, CSleep, CAwait, CIf, CWhile,
                 CIn, CSchedule, CQueue>
        node;
    SourcePos pos;
};

inline CommandPtr make_skip(SourcePos p = {}) {
    return std::make_shared<Command>(Command{CSkip{}, p});
}
inline CommandPtr make_stop() {
    return std::make_shared<Command>(Command{CStop{}, SourcePos{}});
}
inline CommandPtr make_assign(std::string var, ExprPtr e, SourcePos p = {}) {
    return std::make_shared<Command>(Command{CAssign{std::move(var), std::move(e)}, p});
}
inline CommandPtr make_sizeof(std::string var, ExprPtr e, SourcePos p = {}) {
    return std::make_shared<Command>(Command{CSizeOf{std::move(var), std::move(e)}, p});
}
inline CommandPtr make_seq(CommandPtr a, CommandPtr b, SourcePos p = {}) {
    return std::make_shared<Command>(Command{CSeq{std::move(a), std::move(b)}, p});
}
inline CommandPtr make_sleep(ExprPtr e, SourcePos p = {}) {
    return std::make_shared<Command>(Command{CSleep{std::move(e)}, p});
}
inline CommandPtr make_await(Timestamp resume_at) {
    return std::make_shared<Command>(Command{CAwait{resume_at}, SourcePos{}});
}
inline CommandPtr make_if(ExprPtr g, CommandPtr t, CommandPtr e, SourcePos p = {}) {
    return std::make_shared<Command>(Command{CIf{std::move(g), std::move(t), std::move(e)}, p});
}
inline CommandPtr make_while(ExprPtr g, CommandPtr body, SourcePos p = {}) {
    return std::make_shared<Command>(Command{CWhile{std::move(g), std::move(body)}, p});
}
inline CommandPtr make_in(std::string var, ChannelId ch, SourcePos p = {}) {
    return std::make_shared<Command>(Command{CIn{std::move(var), ch}, p});
}
inline CommandPtr make_schedule(ChannelId ch, ExprPtr count, ExprPtr delay, SourcePos p = {}) {
    return std::make_shared<Command>(
        Command{CSchedule{ch, std::move(count), std::move(delay)}, p});
}
inline CommandPtr make_queue(ChannelId ch, ExprPtr e, SourcePos p = {}) {
    return std::make_shared<Command>(Command{CQueue{ch, std::move(e)}, p});
}

inline bool is_stop(const Command& c) { return std::holds_alternative<CStop>(c.node); }
inline bool is_stop(const CommandPtr& c) { return c && is_stop(*c); }

// Structural equality, ignoring source positions. Configurations compare
// commands with this; residuals synthesized while stepping carry no positions.
inline bool command_equal(const CommandPtr& a, const CommandPtr& b);
inline bool command_equal(const Command& a, const Command& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& an) -> bool {
            using T = std::decay_t<decltype(an)>;
            const auto& bn = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, CSkip> || std::is_same_v<T, CStop>) {
                return true;
            } else if constexpr (std::is_same_v<T, CAssign>) {
                return an.var == bn.var && expr_equal(an.expr, bn.expr);
            } else if constexpr (std::is_same_v<T, CSizeOf>) {
                return an.var == bn.var && expr_equal(an.expr, bn.expr);
            } else if constexpr (std::is_same_v<T, CSeq>) {
                return command_equal(an.first, bn.first) && command_equal(an.rest, bn.rest);
            } else if constexpr (std::is_same_v<T, CSleep>) {
                return expr_equal(an.duration, bn.duration);
            } else if constexpr (std::is_same_v<T, CAwait>) {
                return an.resume_at == bn.resume_at;
            } else if constexpr (std::is_same_v<T, CIf>) {
                return expr_equal(an.guard, bn.guard) &&
                       command_equal(an.then_branch, bn.then_branch) &&
                       command_equal(an.else_branch, bn.else_branch);
            } else if constexpr (std::is_same_v<T, CWhile>) {
                return expr_equal(an.guard, bn.guard) && command_equal(an.body, bn.body);
            } else if constexpr (std::is_same_v<T, CIn>) {
                return an.var == bn.var && an.channel == bn.channel;
            } else if constexpr (std::is_same_v<T, CSchedule>) {
                return an.channel == bn.channel && expr_equal(an.count, bn.count) &&
                       expr_equal(an.delay, bn.delay);
            } else {
                static_assert(std::is_same_v<T, CQueue>);
                return an.channel == bn.channel && expr_equal(an.expr, bn.expr);
            }
        },
        a.node);
}
inline bool command_equal(const CommandPtr& a, const CommandPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return command_equal(*a, *b);
}

}  // namespace selene
