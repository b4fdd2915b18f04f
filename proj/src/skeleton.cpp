#include "solidsql/skeleton.hpp"

#include "solidsql/sql_parser.hpp"

namespace solidsql {

namespace {

void set_placeholder(Node& n, std::string_view placeholder) {
    n.text = std::string(placeholder);
    n.name = to_lower(placeholder);
    n.qualifier.clear();
}

void mask(Node& n, bool from_item) {
    switch (n.kind) {
        case NodeKind::TableRef: set_placeholder(n, kTablePlaceholder); return;
        case NodeKind::ColumnRef: set_placeholder(n, kColumnPlaceholder); return;
        case NodeKind::Literal:
            n.text = std::string(kValuePlaceholder);
            n.name = n.text;
            return;
        case NodeKind::AliasName:
            set_placeholder(n, from_item ? kTablePlaceholder : kColumnPlaceholder);
            return;
        case NodeKind::Star: n.qualifier.clear(); return;
        case NodeKind::Clause:
            if (n.text == "FROM") {
                for (auto& item : n.children) {
                    if (item.kind == NodeKind::Clause) {
                        mask(item.children.at(0), true);
                        for (std::size_t i = 1; i < item.children.size(); ++i) mask(item.children[i], false);
                    } else {
                        mask(item, true);
                    }
                }
                return;
            }
            break;
        case NodeKind::Alias:
            mask(n.children.at(0), false);
            mask(n.children.at(1), from_item);
            return;
        default: break;
    }
    for (auto& c : n.children) mask(c, false);
}

}  // namespace

ted::PostorderTree<std::string> postorder_of(const Node& root) {
    return ted::make_postorder(
        root, [](const Node& n) -> const std::vector<Node>& { return n.children; },
        [](const Node& n) { return n.label(); });
}

SqlSkeleton extract_sql_skeleton(const SqlAst& ast) {
    SqlSkeleton out;
    out.tree = ast;
    mask(out.tree.root, false);
    out.text = render_sql(out.tree);
    out.node_count = node_count(out.tree.root);
    out.postorder = postorder_of(out.tree.root);
    return out;
}

SqlSkeleton skeleton_of(std::string_view sql) { return extract_sql_skeleton(parse_sql(sql)); }

std::size_t tree_edit_distance(const SqlSkeleton& a, const SqlSkeleton& b) {
    return ted::distance(a.postorder, b.postorder);
}

double skeleton_similarity(const SqlSkeleton& a, const SqlSkeleton& b) {
    const auto total = static_cast<double>(a.node_count + b.node_count);
    return 1.0 - static_cast<double>(tree_edit_distance(a, b)) / total;
}

}  // namespace solidsql
