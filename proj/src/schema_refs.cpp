#include "solidsql/schema_refs.hpp"

#include <set>
#include <string>
#include <vector>

namespace solidsql {

namespace {

struct ScopeEntry {
    std::string key;                 // alias, or the table name when unaliased
    std::string base_key;            // base table name (lowercase), empty for derived tables
    const TableDef* table = nullptr;  // null for derived tables
    std::set<std::string> derived_columns;
};

struct Scope {
    std::vector<ScopeEntry> entries;
    std::set<std::string> select_aliases;
    const Scope* parent = nullptr;
};

class Extractor {
public:
    Extractor(const DatabaseSchema& schema, const ExtractOptions& options) : schema_(schema), options_(options) {}

    SchemaSubset run(const Node& root) {
        statement(root, nullptr);
        SchemaSubset out;
        out.tables = tables_;
        out.columns = columns_;
        if (options_.include_join_on) out.columns.insert(on_columns_.begin(), on_columns_.end());
        for (const auto& c : out.columns) out.tables.insert(column_table(c));
        return out;
    }

private:
    // Output column names of a query, used for derived-table lookups.
    static std::set<std::string> output_names(const Node& stmt) {
        const Node* q = &stmt;
        while (q->kind == NodeKind::SetOperation) q = &q->children.at(0);
        std::set<std::string> names;
        for (const auto& item : q->children.at(0).children) {
            if (item.kind == NodeKind::Alias) {
                names.insert(item.children.at(1).name);
            } else if (item.kind == NodeKind::ColumnRef) {
                names.insert(item.name);
            }
        }
        return names;
    }

    void statement(const Node& node, const Scope* parent) {
        if (node.kind == NodeKind::SetOperation) {
            for (const auto& c : node.children) statement(c, parent);
            return;
        }
        query(node, parent);
    }

    void add_from_item(const Node& item, Scope& scope) {
        const Node* target = &item;
        std::string alias;
        if (item.kind == NodeKind::Alias) {
            target = &item.children.at(0);
            alias = item.children.at(1).name;
        }
        if (target->kind == NodeKind::TableRef) {
            const auto* table = schema_.find_table(target->name);
            if (table == nullptr) throw ResolutionError("unknown table '" + target->text + "'");
            const auto base = to_lower(table->name);
            tables_.insert(base);
            scope.entries.push_back({alias.empty() ? base : alias, base, table, {}});
        } else if (target->kind == NodeKind::Subquery) {
            statement(target->children.at(0), scope.parent);
            scope.entries.push_back({alias, "", nullptr, output_names(target->children.at(0))});
        }
    }

    void query(const Node& q, const Scope* parent) {
        Scope scope;
        scope.parent = parent;
        const Node* from = nullptr;
        for (const auto& clause : q.children) {
            if (clause.kind == NodeKind::Clause && clause.text == "FROM") from = &clause;
        }
        if (from != nullptr) {
            for (const auto& item : from->children) {
                add_from_item(item.kind == NodeKind::Clause ? item.children.at(0) : item, scope);
            }
        }
        for (const auto& item : q.children.at(0).children) {
            if (item.kind == NodeKind::Alias) scope.select_aliases.insert(item.children.at(1).name);
        }
        for (const auto& clause : q.children) {
            if (&clause == from) {
                for (const auto& item : clause.children) {
                    if (item.kind == NodeKind::Clause && item.children.size() > 1) {
                        expression(item.children[1], scope, true);
                    }
                }
                continue;
            }
            expression(clause, scope, false);
        }
    }

    void expression(const Node& n, const Scope& scope, bool in_on) {
        switch (n.kind) {
            case NodeKind::Subquery: statement(n.children.at(0), &scope); return;
            case NodeKind::ColumnRef: column(n, scope, in_on); return;
            case NodeKind::Star: star(n, scope, in_on); return;
            case NodeKind::AliasName:
            case NodeKind::TableRef: return;
            default:
                for (const auto& c : n.children) expression(c, scope, in_on);
        }
    }

    void add_column(const ScopeEntry& entry, const std::string& column, bool in_on) {
        std::string name = column;
        if (column != "*") {
            for (const auto& c : entry.table->columns) {
                if (to_lower(c.name) == column) name = to_lower(c.name);
            }
        }
        (in_on ? on_columns_ : columns_).insert(entry.base_key + "." + name);
    }

    static const ScopeEntry* find_entry(const Scope& scope, const std::string& key) {
        for (const Scope* s = &scope; s != nullptr; s = s->parent) {
            for (const auto& e : s->entries) {
                if (e.key == key) return &e;
            }
            // An aliased base table is also reachable by its own name.
            for (const auto& e : s->entries) {
                if (!e.base_key.empty() && e.base_key == key) return &e;
            }
        }
        return nullptr;
    }

    void column(const Node& ref, const Scope& scope, bool in_on) {
        if (!ref.qualifier.empty()) {
            const auto* entry = find_entry(scope, to_lower(ref.qualifier));
            if (entry == nullptr) throw ResolutionError("unknown table or alias '" + ref.qualifier + "'");
            if (entry->table == nullptr) return;  // column of a derived table
            if (!schema_.has_column(entry->table->name, ref.name)) {
                throw ResolutionError("table '" + entry->table->name + "' has no column '" + ref.text + "'");
            }
            add_column(*entry, ref.name, in_on);
            return;
        }
        for (const Scope* s = &scope; s != nullptr; s = s->parent) {
            for (const auto& e : s->entries) {
                if (e.table != nullptr && schema_.has_column(e.table->name, ref.name)) {
                    add_column(e, ref.name, in_on);
                    return;
                }
            }
            for (const auto& e : s->entries) {
                if (e.table == nullptr && e.derived_columns.contains(ref.name)) return;
            }
            if (s->select_aliases.contains(ref.name)) return;
        }
        throw ResolutionError("column '" + ref.text + "' matches no table in scope");
    }

    void star(const Node& s, const Scope& scope, bool in_on) {
        if (!s.qualifier.empty()) {
            const auto* entry = find_entry(scope, to_lower(s.qualifier));
            if (entry == nullptr) throw ResolutionError("unknown table or alias '" + s.qualifier + "'");
            if (entry->table != nullptr) add_column(*entry, "*", in_on);
            return;
        }
        for (const auto& e : scope.entries) {
            if (e.table != nullptr) add_column(e, "*", in_on);
        }
    }

    const DatabaseSchema& schema_;
    const ExtractOptions& options_;
    std::set<std::string> tables_;
    std::set<std::string> columns_;
    std::set<std::string> on_columns_;
};

}  // namespace

SchemaSubset extract_schema_refs(const SqlAst& ast, const DatabaseSchema& schema, const ExtractOptions& options) {
    return Extractor(schema, options).run(ast.root);
}

}  // namespace solidsql
