#pragma once

// Ordered-tree edit distance (Zhang & Shasha, 1989).
//
// Trees are flattened into post-order arrays once; the distance computation
// then runs in O(|A| |B| min(depth, leaves)^2) over the key roots.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace solidsql::ted {

/// Minimal ordered labeled tree, convenient for tests and generators.
struct LabeledTree {
    std::string label;
    std::vector<LabeledTree> children;
};

template <typename Label>
struct PostorderTree {
    std::vector<Label> labels;        // post-order
    std::vector<std::size_t> leftmost;  // post-order index of each node's leftmost leaf
    std::vector<std::size_t> keyroots;  // ascending

    std::size_t size() const noexcept { return labels.size(); }
};

namespace detail {

template <typename Node, typename ChildrenFn, typename LabelFn, typename Label>
std::size_t flatten(const Node& node, ChildrenFn& children, LabelFn& label, PostorderTree<Label>& out) {
    std::size_t first_leaf = static_cast<std::size_t>(-1);
    for (const auto& child : children(node)) {
        const auto lm = flatten(child, children, label, out);
        if (first_leaf == static_cast<std::size_t>(-1)) first_leaf = lm;
    }
    const auto index = out.labels.size();
    out.labels.push_back(label(node));
    out.leftmost.push_back(first_leaf == static_cast<std::size_t>(-1) ? index : first_leaf);
    return out.leftmost.back();
}

}  // namespace detail

/// Flattens any tree given accessors for a node's children range and label.
template <typename Node, typename ChildrenFn, typename LabelFn>
auto make_postorder(const Node& root, ChildrenFn children, LabelFn label) {
    using Label = std::decay_t<decltype(label(root))>;
    PostorderTree<Label> out;
    detail::flatten(root, children, label, out);
    // A key root is the highest-numbered node for each distinct leftmost leaf.
    std::vector<bool> seen(out.size(), false);
    for (std::size_t i = out.size(); i-- > 0;) {
        if (!seen[out.leftmost[i]]) {
            seen[out.leftmost[i]] = true;
            out.keyroots.push_back(i);
        }
    }
    std::sort(out.keyroots.begin(), out.keyroots.end());
    return out;
}

inline PostorderTree<std::string> make_postorder(const LabeledTree& root) {
    return make_postorder(
        root, [](const LabeledTree& n) -> const std::vector<LabeledTree>& { return n.children; },
        [](const LabeledTree& n) { return n.label; });
}

struct UnitCost {
    template <typename Label>
    std::size_t relabel(const Label& a, const Label& b) const {
        return a == b ? 0 : 1;
    }
    std::size_t insert() const { return 1; }
    std::size_t remove() const { return 1; }
};

template <typename Label, typename Cost = UnitCost>
std::size_t distance(const PostorderTree<Label>& a, const PostorderTree<Label>& b, const Cost& cost = {}) {
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    if (na == 0) return nb * cost.insert();
    if (nb == 0) return na * cost.remove();

    std::vector<std::size_t> tree_dist(na * nb, 0);
    auto td = [&](std::size_t i, std::size_t j) -> std::size_t& { return tree_dist[i * nb + j]; };
    std::vector<std::size_t> forest((na + 1) * (nb + 1), 0);

    for (const auto i : a.keyroots) {
        for (const auto j : b.keyroots) {
            const std::size_t li = a.leftmost[i];
            const std::size_t lj = b.leftmost[j];
            const std::size_t rows = i - li + 2;
            const std::size_t cols = j - lj + 2;
            // fd(x, y): forest distance for a[li..li+x-1] and b[lj..lj+y-1].
            auto fd = [&](std::size_t x, std::size_t y) -> std::size_t& { return forest[x * cols + y]; };
            fd(0, 0) = 0;
            for (std::size_t x = 1; x < rows; ++x) fd(x, 0) = fd(x - 1, 0) + cost.remove();
            for (std::size_t y = 1; y < cols; ++y) fd(0, y) = fd(0, y - 1) + cost.insert();
            for (std::size_t x = 1; x < rows; ++x) {
                const std::size_t ax = li + x - 1;
                for (std::size_t y = 1; y < cols; ++y) {
                    const std::size_t by = lj + y - 1;
                    const std::size_t del = fd(x - 1, y) + cost.remove();
                    const std::size_t ins = fd(x, y - 1) + cost.insert();
                    if (a.leftmost[ax] == li && b.leftmost[by] == lj) {
                        const std::size_t rel = fd(x - 1, y - 1) + cost.relabel(a.labels[ax], b.labels[by]);
                        fd(x, y) = std::min({del, ins, rel});
                        td(ax, by) = fd(x, y);
                    } else {
                        const std::size_t px = a.leftmost[ax] - li;
                        const std::size_t py = b.leftmost[by] - lj;
                        fd(x, y) = std::min({del, ins, fd(px, py) + td(ax, by)});
                    }
                }
            }
        }
    }
    return td(na - 1, nb - 1);
}

inline std::size_t distance(const LabeledTree& a, const LabeledTree& b) {
    return distance(make_postorder(a), make_postorder(b));
}

}  // namespace solidsql::ted
