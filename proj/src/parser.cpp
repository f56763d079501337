#include "coex/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <optional>
#include <vector>

namespace coex::datalog {

namespace {

enum class Tok {
    Ident,     // lowercase-initial identifier (predicate names, keywords)
    Var,       // uppercase-initial identifier
    Int,
    String,
    LParen,
    RParen,
    Comma,
    Dot,
    Slash,
    Implies,   // :-
    Plus,
    Minus,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    std::int64_t int_value = 0;
    int line = 1;
    int column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        skip_ws();
        int line = line_, col = col_;
        if (pos_ >= text_.size()) return {Tok::End, "", 0, line, col};
        char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                word += advance();
            }
            bool upper = std::isupper(static_cast<unsigned char>(word[0]));
            return {upper ? Tok::Var : Tok::Ident, word, 0, line, col};
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            return lex_int(line, col);
        }
        switch (c) {
            case '\'':
            case '"': {
                char quote = advance();
                std::string s;
                while (pos_ < text_.size() && text_[pos_] != quote && text_[pos_] != '\n') {
                    s += advance();
                }
                if (pos_ >= text_.size() || text_[pos_] != quote) {
                    throw ParseError(line, col, "unterminated string literal");
                }
                advance();
                return {Tok::String, s, 0, line, col};
            }
            case '(': advance(); return {Tok::LParen, "(", 0, line, col};
            case ')': advance(); return {Tok::RParen, ")", 0, line, col};
            case ',': advance(); return {Tok::Comma, ",", 0, line, col};
            case '.': advance(); return {Tok::Dot, ".", 0, line, col};
            case '/': advance(); return {Tok::Slash, "/", 0, line, col};
            case '+': advance(); return {Tok::Plus, "+", 0, line, col};
            case '-': advance(); return {Tok::Minus, "-", 0, line, col};
            case ':':
                advance();
                if (pos_ < text_.size() && text_[pos_] == '-') {
                    advance();
                    return {Tok::Implies, ":-", 0, line, col};
                }
                throw ParseError(line, col, "expected ':-'");
            case '<':
                advance();
                if (pos_ < text_.size() && text_[pos_] == '=') {
                    advance();
                    return {Tok::Le, "<=", 0, line, col};
                }
                if (pos_ < text_.size() && text_[pos_] == '>') {
                    advance();
                    return {Tok::Ne, "<>", 0, line, col};
                }
                return {Tok::Lt, "<", 0, line, col};
            case '>':
                advance();
                if (pos_ < text_.size() && text_[pos_] == '=') {
                    advance();
                    return {Tok::Ge, ">=", 0, line, col};
                }
                return {Tok::Gt, ">", 0, line, col};
            case '=': advance(); return {Tok::Eq, "=", 0, line, col};
            default:
                throw ParseError(line, col, std::string("unexpected character '") + c + "'");
        }
    }

    Token lex_int(int line, int col) {
        std::string digits;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            digits += advance();
        }
        return {Tok::Int, digits, std::strtoll(digits.c_str(), nullptr, 10), line, col};
    }

private:
    char advance() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

bool plain_name_ok(const std::string& name) {
    if (name.empty()) return false;
    if (!std::islower(static_cast<unsigned char>(name[0]))) return false;
    if (name.size() >= 3 && name.compare(0, 3, "pm_") == 0) return false;
    if (name.size() >= 4 && name.compare(name.size() - 4, 4, "_cur") == 0) return false;
    if (name.size() >= 3 && name.compare(name.size() - 3, 3, "_ud") == 0) return false;
    return true;
}

}  // namespace

PredicateRef classify_predicate(const std::string& token, bool plus_prefix, bool minus_prefix) {
    std::string base = token;
    Flavor flavor = Flavor::Base;
    if (base.size() > 3 && base.compare(0, 3, "pm_") == 0) {
        base = base.substr(3);
        flavor = Flavor::PlusMinus;
    } else if (base.size() > 4 && base.compare(base.size() - 4, 4, "_cur") == 0) {
        base = base.substr(0, base.size() - 4);
        flavor = Flavor::Current;
    } else if (base.size() > 3 && base.compare(base.size() - 3, 3, "_ud") == 0) {
        base = base.substr(0, base.size() - 3);
        flavor = Flavor::Aux;
    }
    if (plus_prefix || minus_prefix) {
        if (flavor == Flavor::Base) {
            flavor = plus_prefix ? Flavor::Insert : Flavor::Delete;
        } else if (flavor == Flavor::Aux) {
            flavor = plus_prefix ? Flavor::AuxInsert : Flavor::AuxDelete;
        } else {
            throw ValidationError("predicate '" + std::string(plus_prefix ? "+" : "-") + token +
                                  "' combines a delta prefix with an unsupported flavor");
        }
    }
    if (!plain_name_ok(base)) {
        throw ValidationError("predicate '" + token + "' has no valid base name");
    }
    return {base, flavor};
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : lexer_(text) { shift(); }

    Program parse() {
        Program program;
        while (cur_.kind != Tok::End) {
            if (cur_.kind == Tok::Ident &&
                (cur_.text == "source" || cur_.text == "view" || cur_.text == "derived")) {
                parse_declaration(program);
            } else {
                parse_rule(program);
            }
        }
        return program;
    }

private:
    void shift() { cur_ = lexer_.next(); }

    [[noreturn]] void fail(const std::string& message) {
        throw ParseError(cur_.line, cur_.column, message);
    }

    void expect(Tok kind, const char* what) {
        if (cur_.kind != kind) fail(std::string("expected ") + what);
        shift();
    }

    PredicateRef parse_predicate_ref() {
        bool plus = false, minus = false;
        if (cur_.kind == Tok::Plus) {
            plus = true;
            shift();
        } else if (cur_.kind == Tok::Minus) {
            minus = true;
            shift();
        }
        if (cur_.kind != Tok::Ident) fail("expected predicate name");
        int line = cur_.line, col = cur_.column;
        std::string token = cur_.text;
        shift();
        try {
            return classify_predicate(token, plus, minus);
        } catch (const ValidationError& e) {
            throw ParseError(line, col, e.what());
        }
    }

    void parse_declaration(Program& program) {
        Role role = cur_.text == "source" ? Role::Source
                    : cur_.text == "view" ? Role::View
                                          : Role::Derived;
        shift();
        PredicateRef pred = parse_predicate_ref();
        expect(Tok::Slash, "'/' and arity");
        if (cur_.kind != Tok::Int || cur_.int_value < 0) fail("expected nonnegative arity");
        std::size_t arity = static_cast<std::size_t>(cur_.int_value);
        shift();
        expect(Tok::Dot, "'.'");
        try {
            program.declare(pred, arity, role);
        } catch (const ValidationError& e) {
            throw ParseError(cur_.line, cur_.column, e.what());
        }
    }

    Term parse_term() {
        switch (cur_.kind) {
            case Tok::Var: {
                Variable v{cur_.text};
                shift();
                return v;
            }
            case Tok::Int: {
                Constant c{cur_.int_value};
                shift();
                return c;
            }
            case Tok::Minus: {
                shift();
                if (cur_.kind != Tok::Int) fail("expected integer after '-'");
                Constant c{-cur_.int_value};
                shift();
                return c;
            }
            case Tok::String: {
                Constant c{cur_.text};
                shift();
                return c;
            }
            default:
                fail("expected term");
        }
    }

    Atom parse_atom() {
        PredicateRef pred = parse_predicate_ref();
        expect(Tok::LParen, "'('");
        std::vector<Term> args;
        if (cur_.kind != Tok::RParen) {
            args.push_back(parse_term());
            while (cur_.kind == Tok::Comma) {
                shift();
                args.push_back(parse_term());
            }
        }
        expect(Tok::RParen, "')'");
        return {pred, std::move(args)};
    }

    std::optional<CmpOp> comparison_op() {
        switch (cur_.kind) {
            case Tok::Lt: return CmpOp::Lt;
            case Tok::Gt: return CmpOp::Gt;
            case Tok::Le: return CmpOp::Le;
            case Tok::Ge: return CmpOp::Ge;
            case Tok::Eq: return CmpOp::Eq;
            case Tok::Ne: return CmpOp::Ne;
            default: return std::nullopt;
        }
    }

    Literal parse_literal() {
        bool negated = false;
        if (cur_.kind == Tok::Ident && cur_.text == "not") {
            negated = true;
            shift();
        }
        // A leading +/- starts an atom when followed by an identifier and a
        // number when followed by digits.
        if (cur_.kind == Tok::Ident || cur_.kind == Tok::Plus) {
            Atom atom = parse_atom();
            return RelLiteral{std::move(atom), negated};
        }
        if (cur_.kind == Tok::Minus) {
            Token saved = cur_;
            shift();
            if (cur_.kind == Tok::Ident) {
                // Re-run atom parsing with the consumed minus.
                PredicateRef pred = [&] {
                    int line = cur_.line, col = cur_.column;
                    std::string token = cur_.text;
                    shift();
                    try {
                        return classify_predicate(token, false, true);
                    } catch (const ValidationError& e) {
                        throw ParseError(line, col, e.what());
                    }
                }();
                expect(Tok::LParen, "'('");
                std::vector<Term> args;
                if (cur_.kind != Tok::RParen) {
                    args.push_back(parse_term());
                    while (cur_.kind == Tok::Comma) {
                        shift();
                        args.push_back(parse_term());
                    }
                }
                expect(Tok::RParen, "')'");
                return RelLiteral{{std::move(pred), std::move(args)}, negated};
            }
            if (cur_.kind != Tok::Int) {
                throw ParseError(saved.line, saved.column, "expected predicate or integer after '-'");
            }
            Term lhs = Constant{-cur_.int_value};
            shift();
            auto op = comparison_op();
            if (!op) fail("expected comparison operator");
            shift();
            Term rhs = parse_term();
            return Comparison{std::move(lhs), *op, std::move(rhs), negated};
        }
        Term lhs = parse_term();
        auto op = comparison_op();
        if (!op) fail("expected comparison operator");
        shift();
        Term rhs = parse_term();
        return Comparison{std::move(lhs), *op, std::move(rhs), negated};
    }

    void parse_rule(Program& program) {
        int line = cur_.line, col = cur_.column;
        Atom head = parse_atom();
        if (cur_.kind == Tok::Dot) {
            throw ParseError(cur_.line, cur_.column,
                             "facts are not supported; rules need a nonempty body");
        }
        expect(Tok::Implies, "':-'");
        std::vector<Literal> body;
        body.push_back(parse_literal());
        while (cur_.kind == Tok::Comma) {
            shift();
            body.push_back(parse_literal());
        }
        expect(Tok::Dot, "'.'");
        try {
            program.add_rule({std::move(head), std::move(body)});
        } catch (const ValidationError& e) {
            throw ParseError(line, col, e.what());
        }
    }

    Lexer lexer_;
    Token cur_;
};

}  // namespace

Program parse_program(std::string_view text) { return Parser(text).parse(); }

}  // namespace coex::datalog
