#include "solidsql/sql_ast.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "sql_keywords.hpp"

namespace solidsql {

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::SetOperation: return "setop";
        case NodeKind::Query: return "query";
        case NodeKind::Clause: return "clause";
        case NodeKind::Keyword: return "keyword";
        case NodeKind::TableRef: return "table";
        case NodeKind::ColumnRef: return "column";
        case NodeKind::Star: return "star";
        case NodeKind::Literal: return "literal";
        case NodeKind::Operator: return "op";
        case NodeKind::Function: return "func";
        case NodeKind::Subquery: return "subquery";
        case NodeKind::Alias: return "alias";
        case NodeKind::AliasName: return "aliasname";
        case NodeKind::List: return "list";
    }
    return "?";
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string to_upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::string Node::label() const {
    std::string key;
    switch (kind) {
        case NodeKind::ColumnRef:
            key = qualifier.empty() ? name : to_lower(qualifier) + "." + name;
            break;
        case NodeKind::TableRef:
        case NodeKind::AliasName:
        case NodeKind::Literal:
            key = name;
            break;
        case NodeKind::Star:
            key = qualifier.empty() ? "*" : to_lower(qualifier) + ".*";
            break;
        default:
            key = text;
    }
    std::string out(to_string(kind));
    out += ':';
    out += key;
    return out;
}

bool structurally_equal(const Node& a, const Node& b) {
    if (a.kind != b.kind || a.children.size() != b.children.size() || a.label() != b.label()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (!structurally_equal(a.children[i], b.children[i])) return false;
    }
    return true;
}

std::size_t node_count(const Node& node) {
    std::size_t n = 1;
    for (const auto& c : node.children) n += node_count(c);
    return n;
}

namespace {

void visit_impl(const Node& node, const Node* parent, const std::function<void(const Node&, const Node*)>& fn) {
    fn(node, parent);
    for (const auto& c : node.children) visit_impl(c, &node, fn);
}

}  // namespace

void visit(const Node& node, const std::function<void(const Node&, const Node*)>& fn) {
    visit_impl(node, nullptr, fn);
}

std::string quote_identifier(std::string_view s) {
    bool plain = !s.empty() && (std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_');
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') plain = false;
    }
    if (plain && !is_reserved_keyword(to_upper(s))) return std::string(s);
    std::string out = "`";
    for (char c : s) {
        if (c == '`') out += '`';
        out += c;
    }
    return out + "`";
}

namespace {

constexpr int kAtomPrecedence = 100;

int precedence(const Node& n) {
    if (n.kind != NodeKind::Operator) return kAtomPrecedence;
    const auto& op = n.text;
    if (n.children.size() == 1) {
        if (op == "NOT") return 3;
        if (op == "-" || op == "+") return 9;
        return kAtomPrecedence;  // EXISTS
    }
    if (op == "OR") return 1;
    if (op == "AND") return 2;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 5;
    if (op == "+" || op == "-") return 6;
    if (op == "*" || op == "/" || op == "%") return 7;
    if (op == "||") return 8;
    if (op == "CASE") return kAtomPrecedence;
    return 4;  // =, !=, IS, IS NOT, IN, LIKE, GLOB, BETWEEN and their NOT forms
}

class Renderer {
public:
    explicit Renderer(const RenderOptions& options) : options_(options) {}

    std::string render(const Node& n) const {
        switch (n.kind) {
            case NodeKind::SetOperation:
                return render(n.children.at(0)) + " " + n.text + " " + render(n.children.at(1));
            case NodeKind::Query: return join(n.children, " ");
            case NodeKind::Clause: return clause(n);
            case NodeKind::Keyword:
                if (n.children.empty()) return n.text;
                return render(n.children.front()) + " " + n.text;
            case NodeKind::TableRef:
            case NodeKind::AliasName: return ident(n.text, n.name);
            case NodeKind::ColumnRef: {
                std::string out;
                if (!n.qualifier.empty()) out = ident(n.qualifier, to_lower(n.qualifier)) + ".";
                return out + ident(n.text, n.name);
            }
            case NodeKind::Star:
                return n.qualifier.empty() ? "*" : ident(n.qualifier, to_lower(n.qualifier)) + ".*";
            case NodeKind::Literal: return n.text;
            case NodeKind::Operator: return op(n);
            case NodeKind::Function: return function(n);
            case NodeKind::Subquery: return "(" + render(n.children.at(0)) + ")";
            case NodeKind::Alias: return render(n.children.at(0)) + " AS " + render(n.children.at(1));
            case NodeKind::List: return "(" + join(n.children, ", ") + ")";
        }
        return {};
    }

private:
    std::string join(const std::vector<Node>& nodes, std::string_view sep, std::size_t from = 0) const {
        std::string out;
        for (std::size_t i = from; i < nodes.size(); ++i) {
            if (i > from) out += sep;
            out += render(nodes[i]);
        }
        return out;
    }

    std::string ident(const std::string& raw, const std::string& normalized) const {
        return quote_identifier(options_.normalize_identifiers ? normalized : raw);
    }

    std::string wrap(const Node& n, int min_prec) const {
        auto s = render(n);
        return precedence(n) < min_prec ? "(" + s + ")" : s;
    }

    std::string clause(const Node& n) const {
        const auto& t = n.text;
        if (t == "FROM") {
            std::string out = "FROM " + render(n.children.at(0));
            for (std::size_t i = 1; i < n.children.size(); ++i) {
                const auto& c = n.children[i];
                out += (c.kind == NodeKind::Clause ? " " : ", ") + render(c);
            }
            return out;
        }
        if (t.size() >= 4 && t.compare(t.size() - 4, 4, "JOIN") == 0) {
            std::string out = t + " " + render(n.children.at(0));
            if (n.children.size() > 1) out += " " + render(n.children[1]);
            return out;
        }
        if (t == "LIMIT") {
            std::string out = "LIMIT " + render(n.children.at(0));
            if (n.children.size() > 1) out += " " + render(n.children[1]);
            return out;
        }
        if (t == "WHEN") return "WHEN " + render(n.children.at(0)) + " THEN " + render(n.children.at(1));
        return t + " " + join(n.children, ", ");
    }

    std::string op(const Node& n) const {
        const auto& t = n.text;
        const int p = precedence(n);
        if (t == "CASE") {
            std::string out = "CASE";
            for (const auto& c : n.children) out += " " + render(c);
            return out + " END";
        }
        if (n.children.size() == 1) {
            if (t == "EXISTS") return "EXISTS " + render(n.children[0]);
            if (t == "NOT") return "NOT " + wrap(n.children[0], p);
            auto operand = wrap(n.children[0], p);
            if (!operand.empty() && (operand[0] == '-' || operand[0] == '+')) return t + " " + operand;
            return t + operand;
        }
        if (t == "BETWEEN" || t == "NOT BETWEEN") {
            return wrap(n.children.at(0), p) + " " + t + " " + wrap(n.children.at(1), p + 1) + " AND " +
                   wrap(n.children.at(2), p + 1);
        }
        return wrap(n.children.at(0), p) + " " + t + " " + wrap(n.children.at(1), p + 1);
    }

    std::string function(const Node& n) const {
        if (n.text == "CAST") return "CAST(" + render(n.children.at(0)) + " AS " + render(n.children.at(1)) + ")";
        std::string out = n.text + "(";
        std::size_t from = 0;
        if (!n.children.empty() && n.children[0].kind == NodeKind::Keyword && n.children[0].text == "DISTINCT") {
            out += "DISTINCT ";
            from = 1;
        }
        return out + join(n.children, ", ", from) + ")";
    }

    const RenderOptions& options_;
};

}  // namespace

std::string render_sql(const Node& node, const RenderOptions& options) {
    return Renderer(options).render(node);
}

bool has_top_level_order_by(const SqlAst& ast) {
    const Node* n = &ast.root;
    while (n->kind == NodeKind::SetOperation) n = &n->children.at(1);
    return std::any_of(n->children.begin(), n->children.end(),
                       [](const Node& c) { return c.kind == NodeKind::Clause && c.text == "ORDER BY"; });
}

}  // namespace solidsql
