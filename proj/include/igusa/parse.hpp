#pragma once

// Text grammar for integer polynomials:
//   expr    := ['+'|'-'] term (('+'|'-') term)*
//   term    := power ('*' power)*
//   power   := primary ['^' exponent]
//   primary := integer | variable | '(' expr ')'
//   exponent:= integer | '(' ['+'|'-'] integer ')'
// Variables are x1, x2, ... or the aliases x, y, z, w for x1..x4.
// Implicit multiplication is rejected.

#include "igusa/multipoly.hpp"

#include <gmpxx.h>

#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace igusa {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), pos_(pos) {}
    std::size_t position() const noexcept { return pos_; }

private:
    std::size_t pos_;
};

struct ParseOptions {
    /// Declared number of variables; must cover the highest index used.
    std::optional<unsigned> nvars;
};

namespace detail {

struct Token {
    enum Kind { integer, variable, plus, minus, star, caret, lparen, rparen, end } kind;
    std::size_t pos;
    std::string text;   // integer digits
    unsigned var = 0;   // 0-based variable index
};

inline std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            out.push_back({Token::integer, start, std::string(s.substr(start, i - start))});
            continue;
        }
        if (c == 'x' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
            ++i;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            const unsigned long idx = std::stoul(std::string(s.substr(start + 1, i - start - 1)));
            if (idx == 0 || idx > 64) throw ParseError("variable index out of range", start);
            out.push_back({Token::variable, start, {}, static_cast<unsigned>(idx - 1)});
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            while (i < s.size() && std::isalnum(static_cast<unsigned char>(s[i]))) ++i;
            const std::string_view name = s.substr(start, i - start);
            static constexpr std::string_view aliases[] = {"x", "y", "z", "w"};
            unsigned var = 4;
            for (unsigned k = 0; k < 4; ++k)
                if (name == aliases[k]) var = k;
            if (var == 4) throw ParseError("unknown identifier '" + std::string(name) + "'", start);
            out.push_back({Token::variable, start, {}, var});
            continue;
        }
        Token::Kind k;
        switch (c) {
            case '+': k = Token::plus; break;
            case '-': k = Token::minus; break;
            case '*': k = Token::star; break;
            case '^': k = Token::caret; break;
            case '(': k = Token::lparen; break;
            case ')': k = Token::rparen; break;
            default: throw ParseError(std::string("unexpected character '") + c + "'", start);
        }
        out.push_back({k, start, {}});
        ++i;
    }
    out.push_back({Token::end, s.size(), {}});
    return out;
}

class Parser {
public:
    Parser(std::vector<Token> toks, unsigned nvars) : toks_(std::move(toks)), n_(nvars) {}

    MultiPoly parse() {
        MultiPoly f = expr();
        if (peek().kind != Token::end) throw ParseError("unexpected token", peek().pos);
        return f;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& take() { return toks_[pos_++]; }

    MultiPoly expr() {
        bool negate = false;
        if (peek().kind == Token::plus || peek().kind == Token::minus) negate = take().kind == Token::minus;
        MultiPoly acc = term();
        if (negate) acc = -acc;
        while (peek().kind == Token::plus || peek().kind == Token::minus) {
            const bool minus = take().kind == Token::minus;
            MultiPoly t = term();
            acc = minus ? acc - t : acc + t;
        }
        return acc;
    }

    MultiPoly term() {
        MultiPoly acc = power();
        while (peek().kind == Token::star) {
            take();
            acc = acc * power();
        }
        return acc;
    }

    MultiPoly power() {
        MultiPoly base = primary();
        if (peek().kind != Token::caret) return base;
        take();
        const std::size_t at = peek().pos;
        bool negative = false;
        std::string digits;
        if (peek().kind == Token::integer) {
            digits = take().text;
        } else if (peek().kind == Token::lparen) {
            take();
            if (peek().kind == Token::plus || peek().kind == Token::minus) negative = take().kind == Token::minus;
            if (peek().kind != Token::integer) throw ParseError("exponent must be an integer literal", peek().pos);
            digits = take().text;
            if (peek().kind != Token::rparen) throw ParseError("expected ')'", peek().pos);
            take();
        } else {
            throw ParseError("exponent must be a nonnegative integer literal", at);
        }
        if (negative && digits.find_first_not_of('0') != std::string::npos)
            throw ParseError("negative exponent", at);
        if (digits.size() > 6) throw ParseError("exponent too large", at);
        return base.pow(static_cast<unsigned>(std::stoul(digits)));
    }

    MultiPoly primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Token::integer: {
                take();
                return MultiPoly::constant(n_, mpz_class(t.text));
            }
            case Token::variable: {
                take();
                return MultiPoly::variable(n_, t.var);
            }
            case Token::lparen: {
                take();
                MultiPoly inner = expr();
                if (peek().kind != Token::rparen) throw ParseError("expected ')'", peek().pos);
                take();
                return inner;
            }
            case Token::end: throw ParseError("unexpected end of input", t.pos);
            default: throw ParseError("unexpected token", t.pos);
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    unsigned n_;
};

}  // namespace detail

/// Parses an integer polynomial. The variable count is the highest index
/// used (at least 1) unless opts.nvars declares more.
inline MultiPoly parse_poly(std::string_view text, const ParseOptions& opts = {}) {
    auto toks = detail::tokenize(text);
    unsigned used = 0;
    for (const auto& t : toks)
        if (t.kind == detail::Token::variable) used = std::max(used, t.var + 1);
    unsigned n = std::max(used, 1u);
    if (opts.nvars) {
        if (*opts.nvars < used)
            throw ParseError("declared " + std::to_string(*opts.nvars) + " variables but x" + std::to_string(used) +
                                 " is used",
                             0);
        n = std::max(n, *opts.nvars);
    }
    return detail::Parser(std::move(toks), n).parse();
}

}  // namespace igusa
