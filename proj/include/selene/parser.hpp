#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "selene/ast.hpp"
#include "selene/program.hpp"

namespace selene {

class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, SourcePos pos)
        : std::runtime_error(message + " at line " + std::to_string(pos.line) + ", column " +
                             std::to_string(pos.col)),
          pos_(pos),
          message_(std::move(message)) {}

    SourcePos pos() const { return pos_; }
    const std::string& bare_message() const { return message_; }

private:
    SourcePos pos_;
    std::string message_;
};

namespace detail {

enum class Tok {
    Ident, Int, Str,
    KwLattice, KwChannel, KwVar, KwInt, KwString,
    KwSkip, KwSleep, KwSizeof, KwIf, KwThen, KwElse, KwWhile, KwDo,
    KwIn, KwSchedule, KwQueue, KwMin, KwMax, KwAwait, KwStop,
    LBrace, RBrace, LParen, RParen, LBracket, RBracket,
    Semi, Comma, Colon, At, Assign, Bang,
    Plus, Minus, Star,
    Eq, Ne, Lt, Le, Gt, Ge, AndAnd, OrOr,
    Eof,
};

struct Token {
    Tok kind = Tok::Eof;
    std::string text;       // identifier or string payload
    std::int64_t number = 0;
    SourcePos pos;
};

inline const char* tok_name(Tok k) {
    switch (k) {
        case Tok::Ident: return "identifier";
        case Tok::Int: return "integer literal";
        case Tok::Str: return "string literal";
        case Tok::KwLattice: return "'lattice'";
        case Tok::KwChannel: return "'channel'";
        case Tok::KwVar: return "'var'";
        case Tok::KwInt: return "'int'";
        case Tok::KwString: return "'string'";
        case Tok::KwSkip: return "'skip'";
        case Tok::KwSleep: return "'sleep'";
        case Tok::KwSizeof: return "'sizeof'";
        case Tok::KwIf: return "'if'";
        case Tok::KwThen: return "'then'";
        case Tok::KwElse: return "'else'";
        case Tok::KwWhile: return "'while'";
        case Tok::KwDo: return "'do'";
        case Tok::KwIn: return "'in'";
        case Tok::KwSchedule: return "'schedule'";
        case Tok::KwQueue: return "'queue'";
        case Tok::KwMin: return "'min'";
        case Tok::KwMax: return "'max'";
        case Tok::KwAwait: return "'await'";
        case Tok::KwStop: return "'stop'";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::Semi: return "';'";
        case Tok::Comma: return "','";
        case Tok::Colon: return "':'";
        case Tok::At: return "'@'";
        case Tok::Assign: return "'='";
        case Tok::Bang: return "'!'";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Star: return "'*'";
        case Tok::Eq: return "'=='";
        case Tok::Ne: return "'!='";
        case Tok::Lt: return "'<'";
        case Tok::Le: return "'<='";
        case Tok::Gt: return "'>'";
        case Tok::Ge: return "'>='";
        case Tok::AndAnd: return "'&&'";
        case Tok::OrOr: return "'||'";
        case Tok::Eof: return "end of input";
    }
    return "?";
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> lex() {
        std::vector<Token> out;
        for (;;) {
            skip_trivia();
            Token t = next_token();
            bool eof = t.kind == Tok::Eof;
            out.push_back(std::move(t));
            if (eof) return out;
        }
    }

private:
    [[noreturn]] void fail(std::string msg, SourcePos at) { throw ParseError(std::move(msg), at); }

    SourcePos here() const { return SourcePos{line_, col_}; }
    bool done() const { return pos_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }
    char advance() {
        char c = src_[pos_++];
        if (c == '\n') { ++line_; col_ = 1; } else { ++col_; }
        return c;
    }

    void skip_trivia() {
        for (;;) {
            while (!done() && (peek() == ' ' || peek() == '\t' || peek() == '\r' || peek() == '\n'))
                advance();
            if (peek() == '/' && peek(1) == '/') {
                while (!done() && peek() != '\n') advance();
                continue;
            }
            if (peek() == '/' && peek(1) == '*') {
                SourcePos start = here();
                advance(); advance();
                while (!(peek() == '*' && peek(1) == '/')) {
                    if (done()) fail("unterminated block comment", start);
                    advance();
                }
                advance(); advance();
                continue;
            }
            return;
        }
    }

    Token next_token() {
        SourcePos at = here();
        if (done()) return Token{Tok::Eof, "", 0, at};
        char c = peek();
        if (is_ident_start(c)) return lex_word(at);
        if (c >= '0' && c <= '9') return lex_number(at);
        if (c == '"') return lex_string(at);
        advance();
        switch (c) {
            case '{': return Token{Tok::LBrace, "", 0, at};
            case '}': return Token{Tok::RBrace, "", 0, at};
            case '(': return Token{Tok::LParen, "", 0, at};
            case ')': return Token{Tok::RParen, "", 0, at};
            case '[': return Token{Tok::LBracket, "", 0, at};
            case ']': return Token{Tok::RBracket, "", 0, at};
            case ';': return Token{Tok::Semi, "", 0, at};
            case ',': return Token{Tok::Comma, "", 0, at};
            case ':': return Token{Tok::Colon, "", 0, at};
            case '@': return Token{Tok::At, "", 0, at};
            case '+': return Token{Tok::Plus, "", 0, at};
            case '-': return Token{Tok::Minus, "", 0, at};
            case '*': return Token{Tok::Star, "", 0, at};
            case '=':
                if (peek() == '=') { advance(); return Token{Tok::Eq, "", 0, at}; }
                return Token{Tok::Assign, "", 0, at};
            case '!':
                if (peek() == '=') { advance(); return Token{Tok::Ne, "", 0, at}; }
                return Token{Tok::Bang, "", 0, at};
            case '<':
                if (peek() == '=') { advance(); return Token{Tok::Le, "", 0, at}; }
                return Token{Tok::Lt, "", 0, at};
            case '>':
                if (peek() == '=') { advance(); return Token{Tok::Ge, "", 0, at}; }
                return Token{Tok::Gt, "", 0, at};
            case '&':
                if (peek() == '&') { advance(); return Token{Tok::AndAnd, "", 0, at}; }
                fail("stray '&'", at);
            case '|':
                if (peek() == '|') { advance(); return Token{Tok::OrOr, "", 0, at}; }
                fail("stray '|'", at);
            default:
                fail(std::string("unexpected character '") + c + "'", at);
        }
    }

    static bool is_ident_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

    Token lex_word(SourcePos at) {
        std::string word;
        while (!done() && is_ident_char(peek())) word.push_back(advance());
        static const std::pair<std::string_view, Tok> keywords[] = {
            {"lattice", Tok::KwLattice}, {"channel", Tok::KwChannel}, {"var", Tok::KwVar},
            {"int", Tok::KwInt},         {"string", Tok::KwString},   {"skip", Tok::KwSkip},
            {"sleep", Tok::KwSleep},     {"sizeof", Tok::KwSizeof},   {"if", Tok::KwIf},
            {"then", Tok::KwThen},       {"else", Tok::KwElse},       {"while", Tok::KwWhile},
            {"do", Tok::KwDo},           {"in", Tok::KwIn},           {"schedule", Tok::KwSchedule},
            {"queue", Tok::KwQueue},     {"min", Tok::KwMin},         {"max", Tok::KwMax},
            {"await", Tok::KwAwait},     {"stop", Tok::KwStop},
        };
        for (const auto& [text, kind] : keywords)
            if (word == text) return Token{kind, std::move(word), 0, at};
        return Token{Tok::Ident, std::move(word), 0, at};
    }

    Token lex_number(SourcePos at) {
        std::uint64_t acc = 0;
        while (!done() && peek() >= '0' && peek() <= '9') {
            acc = acc * 10 + static_cast<std::uint64_t>(advance() - '0');
            if (acc > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
                fail("integer literal out of range", at);
        }
        if (!done() && is_ident_start(peek())) fail("malformed number", at);
        return Token{Tok::Int, "", static_cast<std::int64_t>(acc), at};
    }

    Token lex_string(SourcePos at) {
        advance();  // opening quote
        std::string value;
        for (;;) {
            if (done()) fail("unterminated string literal", at);
            char c = advance();
            if (c == '"') break;
            if (c == '\n') fail("newline in string literal", at);
            if (c == '\\') {
                if (done()) fail("unterminated string literal", at);
                char e = advance();
                switch (e) {
                    case '\\': value.push_back('\\'); break;
                    case '"': value.push_back('"'); break;
                    case 'n': value.push_back('\n'); break;
                    case 't': value.push_back('\t'); break;
                    case 'r': value.push_back('\r'); break;
                    default: fail(std::string("unknown escape '\\") + e + "'", at);
                }
                continue;
            }
            value.push_back(c);
        }
        return Token{Tok::Str, std::move(value), 0, at};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::uint32_t line_ = 1;
    std::uint32_t col_ = 1;
};

class Parser {
public:
    explicit Parser(std::string_view src) : tokens_(Lexer(src).lex()) {}

    SourceProgram parse_program() {
        SourceProgram program;
        if (check(Tok::KwLattice)) {
            program.lattice = parse_lattice();
            lattice_declared_ = true;
        }
        while (check(Tok::KwChannel) || check(Tok::KwVar)) {
            if (check(Tok::KwChannel))
                parse_channel_decl(program);
            else
                parse_var_decl(program);
        }
        program.body = parse_stmt_sequence(Tok::Eof);
        expect(Tok::Eof, "expected end of input");
        return program;
    }

    bool lattice_declared() const { return lattice_declared_; }

private:
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }
    bool check(Tok k) const { return peek().kind == k; }
    Token advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }
    bool match(Tok k) {
        if (!check(k)) return false;
        advance();
        return true;
    }
    Token expect(Tok k, const std::string& what) {
        if (!check(k))
            throw ParseError(what + " (got " + tok_name(peek().kind) + ")", peek().pos);
        return advance();
    }

    std::string expect_ident(const std::string& what) {
        if (check(Tok::KwAwait) || check(Tok::KwStop))
            throw ParseError("'" + peek().text + "' is reserved for internal use", peek().pos);
        return expect(Tok::Ident, what).text;
    }

    SecurityLattice parse_lattice() {
        expect(Tok::KwLattice, "expected 'lattice'");
        expect(Tok::LBrace, "expected '{' after 'lattice'");
        std::vector<std::string> names;
        std::set<std::string> seen;
        std::vector<std::pair<std::string, std::string>> edges;
        auto note = [&](const std::string& n) {
            if (seen.insert(n).second) names.push_back(n);
        };
        for (;;) {
            std::string lo = expect_ident("expected level name");
            note(lo);
            if (match(Tok::Lt)) {
                std::string hi = expect_ident("expected level name after '<'");
                note(hi);
                edges.emplace_back(lo, hi);
            }
            if (match(Tok::Comma)) continue;
            break;
        }
        SourcePos brace = peek().pos;
        expect(Tok::RBrace, "expected '}' closing lattice block");
        try {
            return SecurityLattice(std::move(names), edges);
        } catch (const ConfigError& e) {
            throw ParseError(e.what(), brace);
        }
    }

    Level lookup_level(const SecurityLattice& lat, const std::string& name, SourcePos at) {
        auto l = lat.find(name);
        if (!l) throw ParseError("unknown security level '" + name + "'", at);
        return *l;
    }

    void parse_channel_decl(SourceProgram& program) {
        expect(Tok::KwChannel, "expected 'channel'");
        SourcePos at = peek().pos;
        std::string name = expect_ident("expected channel name");
        expect(Tok::Colon, "expected ':' in channel declaration");
        SourcePos level_at = peek().pos;
        std::string level = expect_ident("expected security level");
        expect(Tok::Semi, "expected ';' after channel declaration");
        if (channels_.count(name))
            throw ParseError("duplicate channel '" + name + "'", at);
        Level l = lookup_level(program.lattice, level, level_at);
        channels_[name] = program.channels.add(ChannelDecl{name, l, at});
    }

    void parse_var_decl(SourceProgram& program) {
        expect(Tok::KwVar, "expected 'var'");
        SourcePos at = peek().pos;
        std::string name = expect_ident("expected variable name");
        expect(Tok::Colon, "expected ':' in variable declaration");
        bool is_string = false;
        std::optional<std::string> size_level_name;
        SourcePos size_level_at;
        if (match(Tok::KwInt)) {
            is_string = false;
        } else if (match(Tok::KwString)) {
            is_string = true;
            if (match(Tok::LBracket)) {
                size_level_at = peek().pos;
                size_level_name = expect_ident("expected size level");
                expect(Tok::RBracket, "expected ']' after size level");
            }
        } else {
            throw ParseError("expected type 'int' or 'string'", peek().pos);
        }
        expect(Tok::At, "expected '@' before variable level");
        SourcePos level_at = peek().pos;
        std::string level_name = expect_ident("expected security level");
        expect(Tok::Semi, "expected ';' after variable declaration");
        if (vars_.count(name)) throw ParseError("duplicate variable '" + name + "'", at);
        Level level = lookup_level(program.lattice, level_name, level_at);
        ValueType vt = ValueType::integer();
        if (is_string) {
            // A string's size level defaults to the variable's own level.
            Level size = size_level_name
                             ? lookup_level(program.lattice, *size_level_name, size_level_at)
                             : level;
            vt = ValueType::string(size);
        }
        vars_.insert(name);
        program.vars.push_back(VarDecl{name, LabeledType{vt, level}, at});
    }

    // Statements fold right-associatively: a; b; c parses as a; (b; c).
    CommandPtr parse_stmt_sequence(Tok terminator) {
        std::vector<CommandPtr> stmts;
        while (!check(terminator)) {
            if (check(Tok::Eof))
                throw ParseError(std::string("expected ") + tok_name(terminator), peek().pos);
            stmts.push_back(parse_statement());
        }
        if (stmts.empty()) throw ParseError("expected at least one statement", peek().pos);
        CommandPtr out = stmts.back();
        for (std::size_t i = stmts.size() - 1; i-- > 0;) out = make_seq(stmts[i], out, stmts[i]->pos);
        return out;
    }

    CommandPtr parse_block() {
        expect(Tok::LBrace, "expected '{'");
        CommandPtr body = parse_stmt_sequence(Tok::RBrace);
        expect(Tok::RBrace, "expected '}'");
        return body;
    }

    CommandPtr parse_statement() {
        SourcePos at = peek().pos;
        switch (peek().kind) {
            case Tok::KwSkip: {
                advance();
                expect(Tok::Semi, "expected ';' after 'skip'");
                return make_skip(at);
            }
            case Tok::KwSleep: {
                advance();
                expect(Tok::LParen, "expected '(' after 'sleep'");
                ExprPtr e = parse_expr();
                expect(Tok::RParen, "expected ')'");
                expect(Tok::Semi, "expected ';' after sleep statement");
                return make_sleep(e, at);
            }
            case Tok::KwIf: {
                advance();
                ExprPtr guard = parse_expr();
                expect(Tok::KwThen, "expected 'then' after if guard");
                CommandPtr then_branch = parse_block();
                expect(Tok::KwElse, "expected 'else'");
                CommandPtr else_branch = check(Tok::KwIf) ? parse_statement() : parse_block();
                match(Tok::Semi);
                return make_if(guard, then_branch, else_branch, at);
            }
            case Tok::KwWhile: {
                advance();
                ExprPtr guard = parse_expr();
                expect(Tok::KwDo, "expected 'do' after while guard");
                CommandPtr body = parse_block();
                match(Tok::Semi);
                return make_while(guard, body, at);
            }
            case Tok::KwSchedule: {
                advance();
                expect(Tok::LParen, "expected '(' after 'schedule'");
                ChannelId ch = parse_channel_ref();
                expect(Tok::Comma, "expected ',' after channel");
                ExprPtr count = parse_expr();
                expect(Tok::Comma, "expected ',' after packet count");
                ExprPtr delay = parse_expr();
                expect(Tok::RParen, "expected ')'");
                expect(Tok::Semi, "expected ';' after schedule statement");
                return make_schedule(ch, count, delay, at);
            }
            case Tok::KwQueue: {
                advance();
                expect(Tok::LParen, "expected '(' after 'queue'");
                ChannelId ch = parse_channel_ref();
                expect(Tok::Comma, "expected ',' after channel");
                ExprPtr e = parse_expr();
                expect(Tok::RParen, "expected ')'");
                expect(Tok::Semi, "expected ';' after queue statement");
                return make_queue(ch, e, at);
            }
            case Tok::KwAwait:
            case Tok::KwStop:
                throw ParseError("'" + peek().text + "' is reserved for internal use", at);
            case Tok::Ident: {
                std::string name = peek().text;
                if (name == "out" && peek(1).kind == Tok::LParen)
                    throw ParseError(
                        "'out' is not a primitive; queue the value and schedule its slots", at);
                advance();
                if (!vars_.count(name))
                    throw ParseError("use of undeclared variable '" + name + "'", at);
                expect(Tok::Assign, "expected '=' in assignment");
                if (check(Tok::KwSizeof)) {
                    advance();
                    expect(Tok::LParen, "expected '(' after 'sizeof'");
                    ExprPtr e = parse_expr();
                    expect(Tok::RParen, "expected ')'");
                    expect(Tok::Semi, "expected ';' after assignment");
                    return make_sizeof(name, e, at);
                }
                if (check(Tok::KwIn) && peek(1).kind == Tok::LParen) {
                    advance();
                    advance();
                    ChannelId ch = parse_channel_ref();
                    expect(Tok::RParen, "expected ')'");
                    expect(Tok::Semi, "expected ';' after assignment");
                    return make_in(name, ch, at);
                }
                ExprPtr e = parse_expr();
                expect(Tok::Semi, "expected ';' after assignment");
                return make_assign(name, e, at);
            }
            default:
                throw ParseError(std::string("expected a statement, got ") + tok_name(peek().kind),
                                 at);
        }
    }

    ChannelId parse_channel_ref() {
        SourcePos at = peek().pos;
        std::string name = expect_ident("expected channel name");
        auto it = channels_.find(name);
        if (it == channels_.end())
            throw ParseError("use of undeclared channel '" + name + "'", at);
        return it->second;
    }

    // Precedence, loosest first: || < && < comparisons < additive < multiplicative < unary.
    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        ExprPtr lhs = parse_and();
        while (check(Tok::OrOr)) {
            SourcePos at = advance().pos;
            lhs = make_binop(BinOp::Or, lhs, parse_and(), at);
        }
        return lhs;
    }

    ExprPtr parse_and() {
        ExprPtr lhs = parse_cmp();
        while (check(Tok::AndAnd)) {
            SourcePos at = advance().pos;
            lhs = make_binop(BinOp::And, lhs, parse_cmp(), at);
        }
        return lhs;
    }

    ExprPtr parse_cmp() {
        ExprPtr lhs = parse_add();
        for (;;) {
            BinOp op;
            switch (peek().kind) {
                case Tok::Eq: op = BinOp::Eq; break;
                case Tok::Ne: op = BinOp::Ne; break;
                case Tok::Lt: op = BinOp::Lt; break;
                case Tok::Le: op = BinOp::Le; break;
                case Tok::Gt: op = BinOp::Gt; break;
                case Tok::Ge: op = BinOp::Ge; break;
                default: return lhs;
            }
            SourcePos at = advance().pos;
            lhs = make_binop(op, lhs, parse_add(), at);
        }
    }

    ExprPtr parse_add() {
        ExprPtr lhs = parse_mul();
        for (;;) {
            if (check(Tok::Plus)) {
                SourcePos at = advance().pos;
                lhs = make_binop(BinOp::Add, lhs, parse_mul(), at);
            } else if (check(Tok::Minus)) {
                SourcePos at = advance().pos;
                lhs = make_binop(BinOp::Sub, lhs, parse_mul(), at);
            } else {
                return lhs;
            }
        }
    }

    ExprPtr parse_mul() {
        ExprPtr lhs = parse_unary();
        while (check(Tok::Star)) {
            SourcePos at = advance().pos;
            lhs = make_binop(BinOp::Mul, lhs, parse_unary(), at);
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (check(Tok::Bang)) {
            // Logical negation desugars to a comparison with false.
            SourcePos at = advance().pos;
            return make_binop(BinOp::Eq, parse_unary(), make_int(0, at), at);
        }
        if (check(Tok::Minus)) {
            SourcePos at = advance().pos;
            ExprPtr operand = parse_unary();
            if (const auto* lit = std::get_if<IntLit>(&operand->node))
                return make_int(-lit->value, at);
            return make_binop(BinOp::Sub, make_int(0, at), operand, at);
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        SourcePos at = peek().pos;
        switch (peek().kind) {
            case Tok::Int: return make_int(advance().number, at);
            case Tok::Str: return make_str(advance().text, at);
            case Tok::Ident: {
                std::string name = advance().text;
                if (!vars_.count(name))
                    throw ParseError("use of undeclared variable '" + name + "'", at);
                return make_var(std::move(name), at);
            }
            case Tok::LParen: {
                advance();
                ExprPtr e = parse_expr();
                expect(Tok::RParen, "expected ')'");
                return e;
            }
            case Tok::KwMin:
            case Tok::KwMax: {
                BinOp op = check(Tok::KwMin) ? BinOp::Min : BinOp::Max;
                advance();
                expect(Tok::LParen, "expected '(' after min/max");
                ExprPtr a = parse_expr();
                expect(Tok::Comma, "expected ','");
                ExprPtr b = parse_expr();
                expect(Tok::RParen, "expected ')'");
                return make_binop(op, a, b, at);
            }
            case Tok::KwAwait:
            case Tok::KwStop:
                throw ParseError("'" + peek().text + "' is reserved for internal use", at);
            default:
                throw ParseError(std::string("expected an expression, got ") +
                                     tok_name(peek().kind),
                                 at);
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::map<std::string, ChannelId> channels_;
    std::set<std::string> vars_;
    bool lattice_declared_ = false;
};

}  // namespace detail

struct ParsedProgram {
    SourceProgram program;
    bool lattice_declared = false;
};

inline ParsedProgram parse_program(std::string_view source) {
    detail::Parser parser(source);
    ParsedProgram out;
    out.program = parser.parse_program();
    out.lattice_declared = parser.lattice_declared();
    return out;
}

// Token stream of a source text with comments stripped; two sources are the
// same program text "up to whitespace" exactly when these agree.
inline std::vector<std::string> lex_token_spellings(std::string_view source) {
    std::vector<std::string> out;
    for (const auto& t : detail::Lexer(source).lex()) {
        if (t.kind == detail::Tok::Eof) break;
        switch (t.kind) {
            case detail::Tok::Ident: out.push_back(t.text); break;
            case detail::Tok::Int: out.push_back(std::to_string(t.number)); break;
            case detail::Tok::Str: out.push_back("\"" + t.text + "\""); break;
            default: {
                std::string name = detail::tok_name(t.kind);
                if (!t.text.empty())
                    out.push_back(t.text);
                else
                    out.push_back(name.substr(1, name.size() - 2));  // strip quotes
            }
        }
    }
    return out;
}

}  // namespace selene
