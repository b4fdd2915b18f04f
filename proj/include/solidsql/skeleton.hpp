#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "solidsql/sql_ast.hpp"
#include "solidsql/tree_edit_distance.hpp"

namespace solidsql {

inline constexpr std::string_view kTablePlaceholder = "_T_";
inline constexpr std::string_view kColumnPlaceholder = "_C_";
inline constexpr std::string_view kValuePlaceholder = "_V_";

/// Structure-only form of a statement: identifiers and values replaced by
/// placeholders, keywords/operators/function names kept.
struct SqlSkeleton {
    SqlAst tree;
    std::string text;
    std::size_t node_count = 0;
    ted::PostorderTree<std::string> postorder;
};

/// Table refs and table aliases become `_T_`, column refs and column aliases
/// `_C_` (qualifiers dropped), literals `_V_`.
SqlSkeleton extract_sql_skeleton(const SqlAst& ast);

/// Parses then skeletonizes; throws ParseError.
SqlSkeleton skeleton_of(std::string_view sql);

/// Unit-cost ordered tree edit distance between skeleton trees.
std::size_t tree_edit_distance(const SqlSkeleton& a, const SqlSkeleton& b);

/// 1 - d(a, b) / (|a| + |b|).
double skeleton_similarity(const SqlSkeleton& a, const SqlSkeleton& b);

/// Post-order flattening of any SQL tree using node labels.
ted::PostorderTree<std::string> postorder_of(const Node& root);

}  // namespace solidsql
