#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "solidsql/errors.hpp"

namespace solidsql {

struct ColumnDef {
    std::string name;
    std::string type;
};

struct TableDef {
    std::string name;
    std::vector<ColumnDef> columns;
};

/// Reference to `table.column` by raw (declared) names.
struct ColumnKey {
    std::string table;
    std::string column;
};

struct ForeignKey {
    ColumnKey from;
    ColumnKey to;
};

/// Full database schema. Names are unique case-insensitively and every key
/// reference resolves; the constructor throws SchemaError otherwise.
class DatabaseSchema {
public:
    DatabaseSchema() = default;
    DatabaseSchema(std::string db_id, std::vector<TableDef> tables, std::vector<ColumnKey> primary_keys = {},
                   std::vector<ForeignKey> foreign_keys = {});

    const std::string& db_id() const noexcept { return db_id_; }
    const std::vector<TableDef>& tables() const noexcept { return tables_; }
    const std::vector<ColumnKey>& primary_keys() const noexcept { return primary_keys_; }
    const std::vector<ForeignKey>& foreign_keys() const noexcept { return foreign_keys_; }

    /// Lookup by any-case name.
    const TableDef* find_table(std::string_view name) const;
    bool has_column(std::string_view table, std::string_view column) const;

private:
    std::string db_id_;
    std::vector<TableDef> tables_;
    std::vector<ColumnKey> primary_keys_;
    std::vector<ForeignKey> foreign_keys_;
};

/// Deterministic CREATE TABLE statements, one line per table in declared order.
std::string render_ddl(const DatabaseSchema& schema);

/// Parses one record of the benchmark `tables.json` format.
DatabaseSchema schema_from_tables_json(const nlohmann::json& record);
nlohmann::json schema_to_tables_json(const DatabaseSchema& schema);

/// All schemas of a `tables.json` file, keyed by db_id.
class SchemaStore {
public:
    SchemaStore() = default;
    explicit SchemaStore(std::vector<DatabaseSchema> schemas);
    static SchemaStore load(const std::filesystem::path& tables_json);

    const DatabaseSchema& at(const std::string& db_id) const;
    const DatabaseSchema* find(const std::string& db_id) const;
    std::size_t size() const noexcept { return schemas_.size(); }

private:
    std::map<std::string, DatabaseSchema> schemas_;
};

/// Linking target: normalized table names and `table.column` names.
/// `table.*` is the star token for whole-row references.
struct SchemaSubset {
    std::set<std::string> tables;
    std::set<std::string> columns;

    bool empty() const noexcept { return tables.empty() && columns.empty(); }
    friend bool operator==(const SchemaSubset&, const SchemaSubset&) = default;
};

/// Canonical form: `tables: a, b | columns: a.x, b.y` with members sorted.
std::string serialize_subset(const SchemaSubset& subset);

/// Reads `tables:` and/or `columns:` sections, case-insensitively, in any order.
/// Throws std::invalid_argument when neither section is present.
SchemaSubset parse_subset(std::string_view text);

/// Table of a `table.column` member.
std::string column_table(std::string_view qualified);
std::string column_name(std::string_view qualified);

/// True iff every column's table is in `tables` and all members exist in `schema`.
bool subset_is_valid(const SchemaSubset& subset, const DatabaseSchema& schema);

}  // namespace solidsql
