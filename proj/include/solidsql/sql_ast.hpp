#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace solidsql {

enum class NodeKind {
    SetOperation,  // UNION / UNION ALL / INTERSECT / EXCEPT; children = [lhs, rhs]
    Query,         // one SELECT core; children = clauses in source order
    Clause,        // SELECT, FROM, WHERE, GROUP BY, HAVING, ORDER BY, LIMIT, OFFSET, JOIN, ON, WHEN, ELSE
    Keyword,       // NULL, DISTINCT, type names inside CAST, ASC/DESC sort keys
    TableRef,
    ColumnRef,
    Star,          // `*` or `t.*`
    Literal,
    Operator,      // binary/unary/n-ary expression operators, CASE, EXISTS
    Function,
    Subquery,      // parenthesized query; children = [query]
    Alias,         // children = [target, AliasName]
    AliasName,
    List,          // parenthesized expression list, e.g. the right side of IN
};

std::string_view to_string(NodeKind kind);

/// One syntax-tree node. Keyword/operator/function text is stored in canonical
/// upper case; identifier nodes keep the raw spelling in `text` and the
/// lowercase unquoted form in `name`.
struct Node {
    NodeKind kind = NodeKind::Keyword;
    std::string text;
    std::string name;       // normalized identifier (refs, alias names) or canonical literal
    std::string qualifier;  // raw qualifier of a column ref or star (`T1` in `T1.name`)
    std::size_t offset = 0;
    std::vector<Node> children;

    /// Label used for structural comparison and tree edit distance.
    std::string label() const;
};

/// Parsed statement. Immutable after construction.
struct SqlAst {
    Node root;
};

bool structurally_equal(const Node& a, const Node& b);
inline bool structurally_equal(const SqlAst& a, const SqlAst& b) { return structurally_equal(a.root, b.root); }

std::size_t node_count(const Node& node);

/// Pre-order traversal; the callback receives each node with its parent (null for the root).
void visit(const Node& node, const std::function<void(const Node&, const Node*)>& fn);

struct RenderOptions {
    /// Emit identifiers in their normalized lowercase form instead of the raw spelling.
    bool normalize_identifiers = false;
};

/// Renders a tree back to SQL text. The output re-parses to a structurally equal tree.
std::string render_sql(const Node& node, const RenderOptions& options = {});
inline std::string render_sql(const SqlAst& ast, const RenderOptions& options = {}) {
    return render_sql(ast.root, options);
}

/// True iff the statement has an ORDER BY at top level (the last query of a set operation).
bool has_top_level_order_by(const SqlAst& ast);

/// Backtick-quotes an identifier unless it is a plain, non-reserved word.
std::string quote_identifier(std::string_view name);

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

}  // namespace solidsql
