#pragma once

#include <sstream>
#include <string>

#include "selene/ast.hpp"
#include "selene/program.hpp"

namespace selene {

namespace detail {

inline int binop_precedence(BinOp op) {
    switch (op) {
        case BinOp::Or: return 1;
        case BinOp::And: return 2;
        case BinOp::Eq: case BinOp::Ne:
        case BinOp::Lt: case BinOp::Le:
        case BinOp::Gt: case BinOp::Ge: return 3;
        case BinOp::Add: case BinOp::Sub: return 4;
        case BinOp::Mul: return 5;
        case BinOp::Min: case BinOp::Max: return 7;  // call syntax, binds like a primary
    }
    return 7;
}

inline void escape_string_into(std::ostream& os, const std::string& s) {
    os << '"';
    for (char c : s) {
        switch (c) {
            case '\\': os << "\\\\"; break;
            case '"': os << "\\\""; break;
            case '\n': os << "\\n"; break;
            case '\t': os << "\\t"; break;
            case '\r': os << "\\r"; break;
            default: os << c;
        }
    }
    os << '"';
}

inline void print_expr(std::ostream& os, const Expr& e, int parent_prec) {
    if (const auto* lit = std::get_if<IntLit>(&e.node)) {
        os << lit->value;
        return;
    }
    if (const auto* lit = std::get_if<StrLit>(&e.node)) {
        escape_string_into(os, lit->value);
        return;
    }
    if (const auto* var = std::get_if<VarRef>(&e.node)) {
        os << var->name;
        return;
    }
    const auto& b = std::get<BinExpr>(e.node);
    if (b.op == BinOp::Min || b.op == BinOp::Max) {
        os << binop_text(b.op) << '(';
        print_expr(os, *b.lhs, 0);
        os << ", ";
        print_expr(os, *b.rhs, 0);
        os << ')';
        return;
    }
    int prec = binop_precedence(b.op);
    bool parens = prec < parent_prec;
    if (parens) os << '(';
    print_expr(os, *b.lhs, prec);
    os << ' ' << binop_text(b.op) << ' ';
    // Operators associate to the left, so a right child at equal precedence
    // must keep its parentheses.
    print_expr(os, *b.rhs, prec + 1);
    if (parens) os << ')';
}

inline std::string expr_text(const Expr& e) {
    std::ostringstream os;
    print_expr(os, e, 0);
    return os.str();
}

// Statement printer. Channel ids are spelled through the table when one is
// given; otherwise as the raw index (debug prints of synthesized residuals).
struct CommandPrinter {
    const ChannelTable* channels = nullptr;

    std::string channel_text(ChannelId ch) const {
        if (channels && ch.idx < channels->size()) return channels->name(ch);
        return "#" + std::to_string(ch.idx);
    }

    void indent(std::ostream& os, int depth) const {
        for (int i = 0; i < depth; ++i) os << "    ";
    }

    void block(std::ostream& os, const Command& body, int depth) const {
        os << "{\n";
        command(os, body, depth + 1);
        indent(os, depth);
        os << "}";
    }

    void if_tail(std::ostream& os, const CIf& node, int depth) const {
        os << '(' << expr_text(*node.guard) << ") then ";
        block(os, *node.then_branch, depth);
        if (const auto* chained = std::get_if<CIf>(&node.else_branch->node)) {
            os << " else if ";
            if_tail(os, *chained, depth);
        } else {
            os << " else ";
            block(os, *node.else_branch, depth);
            os << "\n";
        }
    }

    void command(std::ostream& os, const Command& c, int depth) const {
        if (const auto* seq = std::get_if<CSeq>(&c.node)) {
            command(os, *seq->first, depth);
            command(os, *seq->rest, depth);
            return;
        }
        indent(os, depth);
        if (std::holds_alternative<CSkip>(c.node)) {
            os << "skip;\n";
        } else if (std::holds_alternative<CStop>(c.node)) {
            os << "stop;\n";
        } else if (const auto* a = std::get_if<CAssign>(&c.node)) {
            os << a->var << " = " << expr_text(*a->expr) << ";\n";
        } else if (const auto* s = std::get_if<CSizeOf>(&c.node)) {
            os << s->var << " = sizeof(" << expr_text(*s->expr) << ");\n";
        } else if (const auto* s = std::get_if<CSleep>(&c.node)) {
            os << "sleep(" << expr_text(*s->duration) << ");\n";
        } else if (const auto* a = std::get_if<CAwait>(&c.node)) {
            os << "await(" << a->resume_at << ");\n";
        } else if (const auto* i = std::get_if<CIf>(&c.node)) {
            os << "if ";
            if_tail(os, *i, depth);
        } else if (const auto* w = std::get_if<CWhile>(&c.node)) {
            os << "while (" << expr_text(*w->guard) << ") do ";
            block(os, *w->body, depth);
            os << "\n";
        } else if (const auto* in = std::get_if<CIn>(&c.node)) {
            os << in->var << " = in(" << channel_text(in->channel) << ");\n";
        } else if (const auto* sc = std::get_if<CSchedule>(&c.node)) {
            os << "schedule(" << channel_text(sc->channel) << ", " << expr_text(*sc->count)
               << ", " << expr_text(*sc->delay) << ");\n";
        } else if (const auto* q = std::get_if<CQueue>(&c.node)) {
            os << "queue(" << channel_text(q->channel) << ", " << expr_text(*q->expr) << ");\n";
        }
    }
};

}  // namespace detail

inline std::string pretty_expr(const Expr& e) { return detail::expr_text(e); }

inline std::string pretty_command(const Command& c, const ChannelTable* channels = nullptr) {
    std::ostringstream os;
    detail::CommandPrinter{channels}.command(os, c, 0);
    return os.str();
}

// Canonical program text. Parsing the result yields the same program, and on
// sources written in this style the round trip preserves the token stream.
inline std::string pretty_program(const SourceProgram& program, bool print_lattice) {
    std::ostringstream os;
    if (print_lattice) {
        os << "lattice { ";
        auto edges = program.lattice.cover_edges();
        if (edges.empty()) {
            // Degenerate one-point lattice: list the levels themselves.
            for (std::size_t i = 0; i < program.lattice.size(); ++i) {
                if (i) os << ", ";
                os << program.lattice.name(Level{static_cast<std::uint8_t>(i)});
            }
        } else {
            for (std::size_t i = 0; i < edges.size(); ++i) {
                if (i) os << ", ";
                os << edges[i].first << " < " << edges[i].second;
            }
        }
        os << " }\n";
    }
    for (const auto& decl : program.channels.decls())
        os << "channel " << decl.name << " : " << program.lattice.name(decl.level) << ";\n";
    for (const auto& decl : program.vars) {
        os << "var " << decl.name << " : ";
        if (decl.type.type.kind == ValueKind::Int) {
            os << "int";
        } else {
            os << "string";
            if (decl.type.type.size_level != decl.type.level)
                os << "[" << program.lattice.name(decl.type.type.size_level) << "]";
        }
        os << " @ " << program.lattice.name(decl.type.level) << ";\n";
    }
    os << "\n";
    detail::CommandPrinter{&program.channels}.command(os, *program.body, 0);
    return os.str();
}

}  // namespace selene
