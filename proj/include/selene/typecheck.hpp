#pragma once

#include <optional>
#include <string>
#include <vector>

#include "selene/ast.hpp"
#include "selene/program.hpp"

namespace selene {

// string<l'> @ l is well formed iff l' flows to l: a string's byte length
// can never be more public than the string itself.
inline bool wf_type(const SecurityLattice& lat, const LabeledType& t) {
    if (t.type.kind == ValueKind::Int) return true;
    return lat.leq(t.type.size_level, t.level);
}

// int <: int; string<l1> <: string<l2> iff l1 flows to l2.
inline bool subtype(const SecurityLattice& lat, const ValueType& a, const ValueType& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == ValueKind::Int) return true;
    return lat.leq(a.size_level, b.size_level);
}

// Raising taints what a value's observable footprint may reveal: ints are
// fixed-size and unchanged, a string's size level absorbs the context.
inline ValueType raise_type(const SecurityLattice& lat, const ValueType& t, Level l) {
    if (t.kind == ValueKind::Int) return t;
    return ValueType::string(lat.join(t.size_level, l));
}

struct TypeIssue {
    std::string rule;  // name of the violated typing rule
    SourcePos pos;
    std::string message;
};

struct TypecheckReport {
    std::vector<TypeIssue> issues;
    std::optional<Level> final_pc;

    bool ok() const { return issues.empty() && final_pc.has_value(); }
};

namespace detail {

class Checker {
public:
    Checker(const SecurityLattice& lat, const TypingEnv& gamma, const ChannelTable& channels)
        : lat_(lat), gamma_(gamma), channels_(channels) {}

    TypecheckReport check(const Command& body) {
        for (const auto& decl : gamma_.decls()) {
            if (!wf_type(lat_, decl.type))
                issue("WF", decl.pos,
                      "ill-formed type for '" + decl.name + "': size level " +
                          lat_.name(decl.type.type.size_level) + " does not flow to " +
                          lat_.name(decl.type.level));
        }
        auto pc = type_cmd(body, lat_.bottom());
        TypecheckReport report;
        report.issues = std::move(issues_);
        if (report.issues.empty()) report.final_pc = pc;
        return report;
    }

    // Flow-sensitive command typing: under context level pc the command types
    // with outgoing context pc', and pc always flows to pc'.
    std::optional<Level> type_cmd(const Command& c, Level pc) {
        if (std::holds_alternative<CSkip>(c.node)) return pc;
        if (std::holds_alternative<CAwait>(c.node)) return pc;
        if (std::holds_alternative<CStop>(c.node)) {
            issue("T-Stop", c.pos, "internal command cannot appear in a program");
            return std::nullopt;
        }
        if (const auto* a = std::get_if<CAssign>(&c.node)) return type_assign(*a, c.pos, pc);
        if (const auto* s = std::get_if<CSizeOf>(&c.node)) return type_sizeof(*s, c.pos, pc);
        if (const auto* s = std::get_if<CSeq>(&c.node)) {
            auto pc1 = type_cmd(*s->first, pc);
            if (!pc1) {
                // Recover at the sequence point so later statements still get
                // checked; the program is already rejected.
                type_cmd(*s->rest, pc);
                return std::nullopt;
            }
            return type_cmd(*s->rest, *pc1);
        }
        if (const auto* s = std::get_if<CSleep>(&c.node)) {
            auto t = type_expr(*s->duration);
            if (!t) return std::nullopt;
            if (t->type.kind != ValueKind::Int) {
                issue("T-Sleep", c.pos, "sleep duration must be an int");
                return std::nullopt;
            }
            return lat_.join(pc, t->level);
        }
        if (const auto* i = std::get_if<CIf>(&c.node)) {
            auto g = type_expr(*i->guard);
            std::optional<Level> taken;
            if (g && g->type.kind != ValueKind::Int)
                issue("T-If", c.pos, "guard must be an int");
            else if (g)
                taken = g->level;
            Level branch_pc = taken ? lat_.join(pc, *taken) : pc;
            auto pc1 = type_cmd(*i->then_branch, branch_pc);
            auto pc2 = type_cmd(*i->else_branch, branch_pc);
            if (!taken || !pc1 || !pc2) return std::nullopt;
            return lat_.join(*pc1, *pc2);
        }
        if (const auto* w = std::get_if<CWhile>(&c.node)) {
            auto g = type_expr(*w->guard);
            std::optional<Level> taken;
            if (g && g->type.kind != ValueKind::Int)
                issue("T-While", c.pos, "guard must be an int");
            else if (g)
                taken = g->level;
            auto body_pc = type_cmd(*w->body, taken ? lat_.join(pc, *taken) : pc);
            if (!taken || !body_pc) return std::nullopt;
            return *body_pc;
        }
        if (const auto* in = std::get_if<CIn>(&c.node)) return type_in(*in, c.pos, pc);
        if (const auto* sc = std::get_if<CSchedule>(&c.node)) return type_schedule(*sc, c.pos, pc);
        const auto& q = std::get<CQueue>(c.node);
        return type_queue(q, c.pos, pc);
    }

    // Expression typing is syntax-directed and total on well-formed programs;
    // the first error aborts the subtree.
    std::optional<LabeledType> type_expr(const Expr& e) {
        if (std::holds_alternative<IntLit>(e.node))
            return LabeledType{ValueType::integer(), lat_.bottom()};
        if (std::holds_alternative<StrLit>(e.node))
            return LabeledType{ValueType::string(lat_.bottom()), lat_.bottom()};
        if (const auto* v = std::get_if<VarRef>(&e.node)) {
            const auto* t = gamma_.find(v->name);
            if (!t) {
                issue("T-Var", e.pos, "unknown variable '" + v->name + "'");
                return std::nullopt;
            }
            return *t;
        }
        const auto& b = std::get<BinExpr>(e.node);
        auto lhs = type_expr(*b.lhs);
        if (!lhs) return std::nullopt;
        auto rhs = type_expr(*b.rhs);
        if (!rhs) return std::nullopt;
        if (lhs->type.kind != ValueKind::Int || rhs->type.kind != ValueKind::Int) {
            issue("T-Op", e.pos,
                  std::string("operator '") + binop_text(b.op) + "' requires int operands");
            return std::nullopt;
        }
        return LabeledType{ValueType::integer(), lat_.join(lhs->level, rhs->level)};
    }

private:
    void issue(const char* rule, SourcePos pos, std::string message) {
        issues_.push_back(TypeIssue{rule, pos, std::move(message)});
    }

    std::optional<Level> type_assign(const CAssign& a, SourcePos pos, Level pc) {
        auto e = type_expr(*a.expr);
        const auto* xt = gamma_.find(a.var);
        if (!xt) {
            issue("T-Assign", pos, "unknown variable '" + a.var + "'");
            return std::nullopt;
        }
        if (!e) return std::nullopt;
        bool ok = true;
        if (!subtype(lat_, raise_type(lat_, e->type, pc), xt->type)) {
            ok = false;
            if (e->type.kind != xt->type.kind)
                issue("T-Assign", pos, "value kind mismatch in assignment to '" + a.var + "'");
            else
                issue("T-Assign", pos,
                      "string size may leak into '" + a.var + "': size level " +
                          lat_.name(lat_.join(e->type.size_level, pc)) + " does not flow to " +
                          lat_.name(xt->type.size_level));
        }
        if (!lat_.leq(lat_.join(e->level, pc), xt->level)) {
            ok = false;
            issue("T-Assign", pos,
                  "assignment to lower level: " + lat_.name(lat_.join(e->level, pc)) +
                      " does not flow to " + lat_.name(xt->level));
        }
        return ok ? std::optional<Level>(pc) : std::nullopt;
    }

    std::optional<Level> type_sizeof(const CSizeOf& s, SourcePos pos, Level pc) {
        auto e = type_expr(*s.expr);
        const auto* xt = gamma_.find(s.var);
        if (!xt) {
            issue("T-SizeOf", pos, "unknown variable '" + s.var + "'");
            return std::nullopt;
        }
        bool ok = true;
        if (xt->type.kind != ValueKind::Int) {
            ok = false;
            issue("T-SizeOf", pos, "sizeof result must be stored in an int variable");
        }
        if (!lat_.leq(pc, xt->level)) {
            ok = false;
            issue("T-SizeOf", pos,
                  "sizeof under tainted context: " + lat_.name(pc) + " does not flow to " +
                      lat_.name(xt->level));
        }
        if (!e) return std::nullopt;
        if (e->type.kind == ValueKind::String && !lat_.leq(e->type.size_level, xt->level)) {
            ok = false;
            issue("T-SizeOf", pos,
                  "string size leak in sizeof: size level " + lat_.name(e->type.size_level) +
                      " does not flow to " + lat_.name(xt->level));
        }
        return ok ? std::optional<Level>(pc) : std::nullopt;
    }

    std::optional<Level> type_in(const CIn& in, SourcePos pos, Level pc) {
        Level ch = channels_.level(in.channel);
        const auto* xt = gamma_.find(in.var);
        if (!xt) {
            issue("T-In", pos, "unknown variable '" + in.var + "'");
            return std::nullopt;
        }
        bool ok = true;
        if (!lat_.leq(pc, ch)) {
            ok = false;
            issue("T-In", pos,
                  "receive under tainted context: " + lat_.name(pc) + " does not flow to channel "
                      + channels_.name(in.channel));
        }
        if (!subtype(lat_, raise_type(lat_, xt->type, ch), xt->type)) {
            ok = false;
            issue("T-In", pos,
                  "received size not covered: channel level " + lat_.name(ch) +
                      " does not flow to size level " + lat_.name(xt->type.size_level));
        }
        if (!lat_.leq(ch, xt->level)) {
            ok = false;
            issue("T-In", pos,
                  "channel level " + lat_.name(ch) + " does not flow to variable level " +
                      lat_.name(xt->level));
        }
        return ok ? std::optional<Level>(ch) : std::nullopt;
    }

    std::optional<Level> type_schedule(const CSchedule& sc, SourcePos pos, Level pc) {
        bool ok = true;
        if (pc != lat_.bottom()) {
            ok = false;
            issue("T-Schedule", pos, "schedule under tainted pc: pc = " + lat_.name(pc));
        }
        for (const ExprPtr& arg : {sc.count, sc.delay}) {
            auto t = type_expr(*arg);
            if (!t) {
                ok = false;
                continue;
            }
            if (t->type.kind != ValueKind::Int) {
                ok = false;
                issue("T-Schedule", pos, "schedule arguments must be ints");
            } else if (t->level != lat_.bottom()) {
                ok = false;
                issue("T-Schedule", pos,
                      "schedule arguments must be public: argument level is " +
                          lat_.name(t->level));
            }
        }
        return ok ? std::optional<Level>(pc) : std::nullopt;
    }

    std::optional<Level> type_queue(const CQueue& q, SourcePos pos, Level pc) {
        auto e = type_expr(*q.expr);
        if (!e) return std::nullopt;
        Level ch = channels_.level(q.channel);
        Level need = lat_.join(e->level, pc);
        if (!lat_.leq(need, ch)) {
            issue("T-Queue", pos,
                  "queued data may exceed channel level: " + lat_.name(need) +
                      " does not flow to " + lat_.name(ch));
            return std::nullopt;
        }
        return pc;
    }

    const SecurityLattice& lat_;
    const TypingEnv& gamma_;
    const ChannelTable& channels_;
    std::vector<TypeIssue> issues_;
};

}  // namespace detail

inline std::optional<LabeledType> type_expr(const SecurityLattice& lat, const TypingEnv& gamma,
                                            const ChannelTable& channels, const Expr& e) {
    return detail::Checker(lat, gamma, channels).type_expr(e);
}

// Γ, pc ⊢ c : pc'. Returns the outgoing context level, or nullopt if the
// command does not type; issues are discarded (use check_program for reports).
inline std::optional<Level> type_cmd(const SecurityLattice& lat, const TypingEnv& gamma,
                                     const ChannelTable& channels, const Command& c, Level pc) {
    return detail::Checker(lat, gamma, channels).type_cmd(c, pc);
}

inline TypecheckReport check_program(const SourceProgram& program, const TypingEnv& gamma) {
    return detail::Checker(program.lattice, gamma, program.channels).check(*program.body);
}

}  // namespace selene
