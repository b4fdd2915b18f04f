#include "solidsql/sql_parser.hpp"

#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "sql_keywords.hpp"

namespace solidsql {

namespace {

enum class TokenKind { Ident, Keyword, Number, String, Punct, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;  // identifier spelling, upper-case keyword, punctuation, number text or string value
    std::size_t offset = 0;
    bool quoted = false;
};

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = src.size();
    auto quoted_run = [&](char close, std::size_t start) {
        // Reads up to the closing delimiter; a doubled delimiter is an escaped one.
        std::string value;
        std::size_t j = start + 1;
        while (true) {
            if (j >= n) throw ParseError(start, "unterminated quoted token");
            if (src[j] == close) {
                if (close != ']' && j + 1 < n && src[j + 1] == close) {
                    value += close;
                    j += 2;
                    continue;
                }
                break;
            }
            value += src[j++];
        }
        i = j + 1;
        return value;
    };

    while (i < n) {
        const auto c = static_cast<unsigned char>(src[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (c == '-' && i + 1 < n && src[i + 1] == '-') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            const auto end = src.find("*/", i + 2);
            if (end == std::string_view::npos) throw ParseError(i, "unterminated comment");
            i = end + 2;
            continue;
        }
        const std::size_t start = i;
        if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            while (i < n && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            if (i < n && src[i] == '.') {
                ++i;
                while (i < n && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            }
            if (i < n && (src[i] == 'e' || src[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < n && (src[j] == '+' || src[j] == '-')) ++j;
                if (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) {
                    i = j;
                    while (i < n && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
                }
            }
            if (i < n && is_ident_start(static_cast<unsigned char>(src[i]))) {
                throw ParseError(start, "malformed number");
            }
            out.push_back({TokenKind::Number, std::string(src.substr(start, i - start)), start});
            continue;
        }
        if (c == '\'' || c == '"') {
            auto value = quoted_run(static_cast<char>(c), start);
            out.push_back({TokenKind::String, std::move(value), start, true});
            continue;
        }
        if (c == '`' || c == '[') {
            auto value = quoted_run(c == '`' ? '`' : ']', start);
            if (value.empty()) throw ParseError(start, "empty quoted identifier");
            out.push_back({TokenKind::Ident, std::move(value), start, true});
            continue;
        }
        if (is_ident_start(c)) {
            while (i < n && is_ident_char(static_cast<unsigned char>(src[i]))) ++i;
            std::string word(src.substr(start, i - start));
            auto upper = to_upper(word);
            if (is_reserved_keyword(upper)) {
                out.push_back({TokenKind::Keyword, std::move(upper), start});
            } else {
                out.push_back({TokenKind::Ident, std::move(word), start});
            }
            continue;
        }
        static constexpr std::string_view two_char[] = {"<=", ">=", "<>", "!=", "==", "||"};
        bool matched = false;
        for (auto op : two_char) {
            if (src.substr(i, 2) == op) {
                out.push_back({TokenKind::Punct, std::string(op), start});
                i += 2;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (std::string_view("(),.;*+-/%<>=").find(static_cast<char>(c)) != std::string_view::npos) {
            out.push_back({TokenKind::Punct, std::string(1, static_cast<char>(c)), start});
            ++i;
            continue;
        }
        throw ParseError(start, std::string("unexpected character '") + static_cast<char>(c) + "'");
    }
    out.push_back({TokenKind::End, "", n});
    return out;
}

std::string quote_string_literal(const std::string& value) {
    std::string out = "'";
    for (char c : value) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

Node make(NodeKind kind, std::string text, std::size_t offset, std::vector<Node> children = {}) {
    Node n;
    n.kind = kind;
    n.text = std::move(text);
    n.offset = offset;
    n.children = std::move(children);
    return n;
}

Node make_ident(NodeKind kind, const Token& tok) {
    Node n = make(kind, tok.text, tok.offset);
    n.name = to_lower(tok.text);
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view src) : tokens_(tokenize(src)) {}

    SqlAst parse_statement() {
        SqlAst ast{compound()};
        accept_punct(";");
        if (peek().kind != TokenKind::End) fail("unexpected trailing input '" + peek().text + "'");
        return ast;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        const auto idx = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[idx];
    }
    const Token& advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(const std::string& message) const { throw ParseError(peek().offset, message); }

    bool is_keyword(std::string_view kw, std::size_t ahead = 0) const {
        return peek(ahead).kind == TokenKind::Keyword && peek(ahead).text == kw;
    }
    bool is_punct(std::string_view p, std::size_t ahead = 0) const {
        return peek(ahead).kind == TokenKind::Punct && peek(ahead).text == p;
    }
    bool accept_keyword(std::string_view kw) {
        if (!is_keyword(kw)) return false;
        advance();
        return true;
    }
    bool accept_punct(std::string_view p) {
        if (!is_punct(p)) return false;
        advance();
        return true;
    }
    const Token& expect_keyword(std::string_view kw) {
        if (!is_keyword(kw)) fail("expected " + std::string(kw));
        return advance();
    }
    const Token& expect_punct(std::string_view p) {
        if (!is_punct(p)) fail("expected '" + std::string(p) + "'");
        return advance();
    }
    const Token& expect_ident(const char* what) {
        if (peek().kind != TokenKind::Ident) fail(std::string("expected ") + what);
        return advance();
    }

    Node compound() {
        Node lhs = query();
        while (is_keyword("UNION") || is_keyword("INTERSECT") || is_keyword("EXCEPT")) {
            const auto& tok = advance();
            std::string text = tok.text;
            if (text == "UNION" && accept_keyword("ALL")) text = "UNION ALL";
            Node rhs = query();
            lhs = make(NodeKind::SetOperation, text, tok.offset, {std::move(lhs), std::move(rhs)});
        }
        return lhs;
    }

    Node query() {
        const auto& select_tok = expect_keyword("SELECT");
        Node q = make(NodeKind::Query, "", select_tok.offset);

        std::string select_text = "SELECT";
        if (accept_keyword("DISTINCT")) {
            select_text = "SELECT DISTINCT";
        } else {
            accept_keyword("ALL");
        }
        Node select = make(NodeKind::Clause, select_text, select_tok.offset);
        do {
            select.children.push_back(select_item());
        } while (accept_punct(","));
        q.children.push_back(std::move(select));

        if (is_keyword("FROM")) q.children.push_back(from_clause());
        if (is_keyword("WHERE")) {
            const auto off = advance().offset;
            q.children.push_back(make(NodeKind::Clause, "WHERE", off, {expr()}));
        }
        if (is_keyword("GROUP")) {
            const auto off = advance().offset;
            expect_keyword("BY");
            Node group = make(NodeKind::Clause, "GROUP BY", off);
            do {
                group.children.push_back(expr());
            } while (accept_punct(","));
            q.children.push_back(std::move(group));
        }
        if (is_keyword("HAVING")) {
            const auto off = advance().offset;
            q.children.push_back(make(NodeKind::Clause, "HAVING", off, {expr()}));
        }
        if (is_keyword("ORDER")) {
            const auto off = advance().offset;
            expect_keyword("BY");
            Node order = make(NodeKind::Clause, "ORDER BY", off);
            do {
                Node key = expr();
                if (is_keyword("ASC") || is_keyword("DESC")) {
                    const auto& dir = advance();
                    key = make(NodeKind::Keyword, dir.text, dir.offset, {std::move(key)});
                }
                order.children.push_back(std::move(key));
            } while (accept_punct(","));
            q.children.push_back(std::move(order));
        }
        if (is_keyword("LIMIT")) {
            const auto off = advance().offset;
            Node first = expr();
            Node limit = make(NodeKind::Clause, "LIMIT", off);
            if (is_keyword("OFFSET")) {
                const auto off2 = advance().offset;
                limit.children.push_back(std::move(first));
                limit.children.push_back(make(NodeKind::Clause, "OFFSET", off2, {expr()}));
            } else if (is_punct(",")) {
                // LIMIT offset, count
                const auto off2 = advance().offset;
                limit.children.push_back(expr());
                limit.children.push_back(make(NodeKind::Clause, "OFFSET", off2, {std::move(first)}));
            } else {
                limit.children.push_back(std::move(first));
            }
            q.children.push_back(std::move(limit));
        }
        return q;
    }

    std::optional<Node> alias_name(bool allow_string) {
        if (accept_keyword("AS")) {
            if (peek().kind == TokenKind::Ident || (allow_string && peek().kind == TokenKind::String)) {
                return make_ident(NodeKind::AliasName, advance());
            }
            fail("expected alias name after AS");
        }
        if (peek().kind == TokenKind::Ident) return make_ident(NodeKind::AliasName, advance());
        return std::nullopt;
    }

    Node with_alias(Node target, bool allow_string) {
        if (auto a = alias_name(allow_string)) {
            const auto off = target.offset;
            return make(NodeKind::Alias, "AS", off, {std::move(target), std::move(*a)});
        }
        return target;
    }

    Node select_item() {
        if (is_punct("*")) return make(NodeKind::Star, "*", advance().offset);
        if (peek().kind == TokenKind::Ident && is_punct(".", 1) && is_punct("*", 2)) {
            const auto& q = advance();
            advance();
            advance();
            Node star = make(NodeKind::Star, "*", q.offset);
            star.qualifier = q.text;
            return star;
        }
        return with_alias(expr(), true);
    }

    Node from_item() {
        if (is_punct("(")) {
            const auto off = advance().offset;
            if (!is_keyword("SELECT")) fail("expected subquery in FROM");
            Node sub = make(NodeKind::Subquery, "", off, {compound()});
            expect_punct(")");
            return with_alias(std::move(sub), false);
        }
        const auto& tok = expect_ident("table name");
        return with_alias(make_ident(NodeKind::TableRef, tok), false);
    }

    std::optional<std::string> join_keyword() {
        std::string text;
        const auto save = pos_;
        if (accept_keyword("NATURAL")) text = "NATURAL ";
        if (accept_keyword("LEFT")) {
            text += "LEFT ";
            accept_keyword("OUTER");
        } else if (accept_keyword("RIGHT")) {
            text += "RIGHT ";
            accept_keyword("OUTER");
        } else if (accept_keyword("FULL")) {
            text += "FULL ";
            accept_keyword("OUTER");
        } else if (accept_keyword("CROSS")) {
            text += "CROSS ";
        } else {
            accept_keyword("INNER");
        }
        if (accept_keyword("JOIN")) return text + "JOIN";
        if (pos_ != save) fail("expected JOIN");
        return std::nullopt;
    }

    Node from_clause() {
        const auto off = advance().offset;
        Node from = make(NodeKind::Clause, "FROM", off, {from_item()});
        while (true) {
            if (accept_punct(",")) {
                from.children.push_back(from_item());
                continue;
            }
            const auto join_off = peek().offset;
            auto kw = join_keyword();
            if (!kw) break;
            Node join = make(NodeKind::Clause, *kw, join_off, {from_item()});
            if (is_keyword("ON")) {
                const auto on_off = advance().offset;
                join.children.push_back(make(NodeKind::Clause, "ON", on_off, {expr()}));
            }
            from.children.push_back(std::move(join));
        }
        return from;
    }

    // Expression grammar, lowest precedence first.
    Node expr() { return or_expr(); }

    Node binary(std::string op, std::size_t off, Node lhs, Node rhs) {
        return make(NodeKind::Operator, std::move(op), off, {std::move(lhs), std::move(rhs)});
    }

    Node or_expr() {
        Node lhs = and_expr();
        while (is_keyword("OR")) {
            const auto off = advance().offset;
            lhs = binary("OR", off, std::move(lhs), and_expr());
        }
        return lhs;
    }

    Node and_expr() {
        Node lhs = not_expr();
        while (is_keyword("AND")) {
            const auto off = advance().offset;
            lhs = binary("AND", off, std::move(lhs), not_expr());
        }
        return lhs;
    }

    Node not_expr() {
        if (is_keyword("NOT")) {
            const auto off = advance().offset;
            return make(NodeKind::Operator, "NOT", off, {not_expr()});
        }
        return equality_expr();
    }

    Node in_rhs() {
        const auto off = expect_punct("(").offset;
        if (is_keyword("SELECT")) {
            Node sub = make(NodeKind::Subquery, "", off, {compound()});
            expect_punct(")");
            return sub;
        }
        Node list = make(NodeKind::List, "", off);
        do {
            list.children.push_back(expr());
        } while (accept_punct(","));
        expect_punct(")");
        return list;
    }

    Node equality_expr() {
        Node lhs = relational_expr();
        while (true) {
            const auto& tok = peek();
            const auto off = tok.offset;
            if (tok.kind == TokenKind::Punct && (tok.text == "=" || tok.text == "==" || tok.text == "!=" || tok.text == "<>")) {
                const std::string op = (tok.text == "==") ? "=" : (tok.text == "<>" ? "!=" : tok.text);
                advance();
                lhs = binary(op, off, std::move(lhs), relational_expr());
                continue;
            }
            if (is_keyword("IS")) {
                advance();
                const std::string op = accept_keyword("NOT") ? "IS NOT" : "IS";
                lhs = binary(op, off, std::move(lhs), relational_expr());
                continue;
            }
            bool negated = false;
            if (is_keyword("NOT") &&
                (is_keyword("IN", 1) || is_keyword("LIKE", 1) || is_keyword("GLOB", 1) || is_keyword("BETWEEN", 1))) {
                advance();
                negated = true;
            }
            const std::string prefix = negated ? "NOT " : "";
            if (accept_keyword("IN")) {
                lhs = binary(prefix + "IN", off, std::move(lhs), in_rhs());
            } else if (is_keyword("LIKE") || is_keyword("GLOB")) {
                const auto op = advance().text;
                lhs = binary(prefix + op, off, std::move(lhs), relational_expr());
            } else if (accept_keyword("BETWEEN")) {
                Node lo = relational_expr();
                expect_keyword("AND");
                Node hi = relational_expr();
                lhs = make(NodeKind::Operator, prefix + "BETWEEN", off, {std::move(lhs), std::move(lo), std::move(hi)});
            } else {
                break;
            }
        }
        return lhs;
    }

    Node left_assoc(Node (Parser::*next)(), std::initializer_list<std::string_view> ops) {
        Node lhs = (this->*next)();
        while (true) {
            const auto& tok = peek();
            bool hit = false;
            if (tok.kind == TokenKind::Punct) {
                for (auto op : ops) hit = hit || tok.text == op;
            }
            if (!hit) break;
            const std::string op = tok.text;
            const auto off = advance().offset;
            lhs = binary(op, off, std::move(lhs), (this->*next)());
        }
        return lhs;
    }

    Node relational_expr() { return left_assoc(&Parser::additive_expr, {"<", "<=", ">", ">="}); }
    Node additive_expr() { return left_assoc(&Parser::multiplicative_expr, {"+", "-"}); }
    Node multiplicative_expr() { return left_assoc(&Parser::concat_expr, {"*", "/", "%"}); }
    Node concat_expr() { return left_assoc(&Parser::unary_expr, {"||"}); }

    Node unary_expr() {
        if (is_punct("-") || is_punct("+")) {
            const auto& tok = advance();
            if (peek().kind == TokenKind::Number && peek().offset == tok.offset + 1) {
                const auto& num = advance();
                Node lit = make(NodeKind::Literal, tok.text + num.text, tok.offset);
                lit.name = lit.text;
                return lit;
            }
            return make(NodeKind::Operator, tok.text, tok.offset, {unary_expr()});
        }
        return primary();
    }

    Node function_call(const Token& name_tok) {
        expect_punct("(");
        Node fn = make(NodeKind::Function, to_upper(name_tok.text), name_tok.offset);
        if (fn.text == "CAST") {
            fn.children.push_back(expr());
            expect_keyword("AS");
            const auto& type = expect_ident("type name");
            fn.children.push_back(make(NodeKind::Keyword, to_upper(type.text), type.offset));
            expect_punct(")");
            return fn;
        }
        if (accept_punct(")")) return fn;
        if (is_keyword("DISTINCT")) fn.children.push_back(make(NodeKind::Keyword, "DISTINCT", advance().offset));
        do {
            if (is_punct("*")) {
                fn.children.push_back(make(NodeKind::Star, "*", advance().offset));
            } else {
                fn.children.push_back(expr());
            }
        } while (accept_punct(","));
        expect_punct(")");
        return fn;
    }

    Node case_expr(std::size_t off) {
        Node node = make(NodeKind::Operator, "CASE", off);
        if (!is_keyword("WHEN")) node.children.push_back(expr());
        if (!is_keyword("WHEN")) fail("expected WHEN");
        while (is_keyword("WHEN")) {
            const auto when_off = advance().offset;
            Node cond = expr();
            expect_keyword("THEN");
            node.children.push_back(make(NodeKind::Clause, "WHEN", when_off, {std::move(cond), expr()}));
        }
        if (is_keyword("ELSE")) {
            const auto else_off = advance().offset;
            node.children.push_back(make(NodeKind::Clause, "ELSE", else_off, {expr()}));
        }
        expect_keyword("END");
        return node;
    }

    Node primary() {
        const Token& tok = peek();
        switch (tok.kind) {
            case TokenKind::Number: {
                advance();
                Node lit = make(NodeKind::Literal, tok.text, tok.offset);
                lit.name = lit.text;
                return lit;
            }
            case TokenKind::String: {
                advance();
                Node lit = make(NodeKind::Literal, quote_string_literal(tok.text), tok.offset);
                lit.name = lit.text;
                return lit;
            }
            case TokenKind::Keyword: {
                if (tok.text == "NULL") return make(NodeKind::Keyword, "NULL", advance().offset);
                if (tok.text == "EXISTS") {
                    const auto off = advance().offset;
                    const auto sub_off = expect_punct("(").offset;
                    Node sub = make(NodeKind::Subquery, "", sub_off, {compound()});
                    expect_punct(")");
                    return make(NodeKind::Operator, "EXISTS", off, {std::move(sub)});
                }
                if (tok.text == "CASE") return case_expr(advance().offset);
                if (tok.text == "CAST") {
                    const auto& cast_tok = advance();
                    return function_call(cast_tok);
                }
                fail("unexpected keyword " + tok.text);
            }
            case TokenKind::Punct: {
                if (tok.text != "(") fail("unexpected '" + tok.text + "'");
                const auto off = advance().offset;
                if (is_keyword("SELECT")) {
                    Node sub = make(NodeKind::Subquery, "", off, {compound()});
                    expect_punct(")");
                    return sub;
                }
                Node first = expr();
                if (is_punct(",")) {
                    Node list = make(NodeKind::List, "", off, {std::move(first)});
                    while (accept_punct(",")) list.children.push_back(expr());
                    expect_punct(")");
                    return list;
                }
                expect_punct(")");
                return first;
            }
            case TokenKind::Ident: {
                const Token& name = advance();
                if (is_punct("(")) return function_call(name);
                if (is_punct(".")) {
                    advance();
                    if (is_punct("*")) {
                        advance();
                        Node star = make(NodeKind::Star, "*", name.offset);
                        star.qualifier = name.text;
                        return star;
                    }
                    const auto& col = expect_ident("column name");
                    Node ref = make_ident(NodeKind::ColumnRef, col);
                    ref.qualifier = name.text;
                    ref.offset = name.offset;
                    return ref;
                }
                if (!name.quoted && name.text == "_V_") {
                    Node lit = make(NodeKind::Literal, "_V_", name.offset);
                    lit.name = "_V_";
                    return lit;
                }
                return make_ident(NodeKind::ColumnRef, name);
            }
            case TokenKind::End: fail("unexpected end of input");
        }
        fail("unexpected token");
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

}  // namespace

SqlAst parse_sql(std::string_view text, Dialect /*dialect*/) {
    std::size_t first = 0;
    while (first < text.size() && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
    if (first == text.size()) throw ParseError(0, "empty statement");
    return Parser(text).parse_statement();
}

}  // namespace solidsql
