#include "solidsql/schema.hpp"

#include <fstream>
#include <stdexcept>

#include "solidsql/sql_ast.hpp"

namespace solidsql {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

DatabaseSchema::DatabaseSchema(std::string db_id, std::vector<TableDef> tables, std::vector<ColumnKey> primary_keys,
                               std::vector<ForeignKey> foreign_keys)
    : db_id_(std::move(db_id)),
      tables_(std::move(tables)),
      primary_keys_(std::move(primary_keys)),
      foreign_keys_(std::move(foreign_keys)) {
    std::set<std::string> table_names;
    for (const auto& t : tables_) {
        if (!table_names.insert(to_lower(t.name)).second) {
            throw SchemaError(db_id_ + ": duplicate table name '" + t.name + "'");
        }
        std::set<std::string> column_names;
        for (const auto& c : t.columns) {
            if (!column_names.insert(to_lower(c.name)).second) {
                throw SchemaError(db_id_ + ": duplicate column '" + t.name + "." + c.name + "'");
            }
        }
    }
    auto check = [&](const ColumnKey& k) {
        if (!has_column(k.table, k.column)) {
            throw SchemaError(db_id_ + ": key references unknown column '" + k.table + "." + k.column + "'");
        }
    };
    for (const auto& k : primary_keys_) check(k);
    for (const auto& fk : foreign_keys_) {
        check(fk.from);
        check(fk.to);
    }
}

const TableDef* DatabaseSchema::find_table(std::string_view name) const {
    const auto key = to_lower(name);
    for (const auto& t : tables_) {
        if (to_lower(t.name) == key) return &t;
    }
    return nullptr;
}

bool DatabaseSchema::has_column(std::string_view table, std::string_view column) const {
    const auto* t = find_table(table);
    if (t == nullptr) return false;
    const auto key = to_lower(column);
    for (const auto& c : t->columns) {
        if (to_lower(c.name) == key) return true;
    }
    return false;
}

std::string render_ddl(const DatabaseSchema& schema) {
    std::string out;
    for (const auto& t : schema.tables()) {
        const auto table_key = to_lower(t.name);
        std::vector<std::string> parts;
        for (const auto& c : t.columns) {
            parts.push_back(c.type.empty() ? quote_identifier(c.name) : quote_identifier(c.name) + " " + c.type);
        }
        std::string pk;
        for (const auto& k : schema.primary_keys()) {
            if (to_lower(k.table) != table_key) continue;
            if (!pk.empty()) pk += ", ";
            pk += quote_identifier(k.column);
        }
        if (!pk.empty()) parts.push_back("PRIMARY KEY (" + pk + ")");
        for (const auto& fk : schema.foreign_keys()) {
            if (to_lower(fk.from.table) != table_key) continue;
            parts.push_back("FOREIGN KEY (" + quote_identifier(fk.from.column) + ") REFERENCES " +
                            quote_identifier(fk.to.table) + " (" + quote_identifier(fk.to.column) + ")");
        }
        if (!out.empty()) out += '\n';
        out += "CREATE TABLE " + quote_identifier(t.name) + " (";
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i > 0) out += ", ";
            out += parts[i];
        }
        out += ");";
    }
    return out;
}

DatabaseSchema schema_from_tables_json(const nlohmann::json& record) {
    const auto db_id = record.at("db_id").get<std::string>();
    const auto table_names = record.at("table_names_original").get<std::vector<std::string>>();
    const auto& columns = record.at("column_names_original");
    std::vector<std::string> types;
    if (record.contains("column_types")) types = record.at("column_types").get<std::vector<std::string>>();

    std::vector<TableDef> tables;
    tables.reserve(table_names.size());
    for (const auto& name : table_names) tables.push_back({name, {}});

    // Column index -> (table index, column name); index 0 is the global `*` with table -1.
    std::vector<ColumnKey> by_index;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        const auto table_idx = columns[i].at(0).get<int>();
        const auto name = columns[i].at(1).get<std::string>();
        if (table_idx < 0) {
            by_index.push_back({"", name});
            continue;
        }
        if (static_cast<std::size_t>(table_idx) >= tables.size()) {
            throw SchemaError(db_id + ": column '" + name + "' refers to missing table index");
        }
        tables[table_idx].columns.push_back({name, i < types.size() ? types[i] : std::string{}});
        by_index.push_back({tables[table_idx].name, name});
    }

    auto key_at = [&](const nlohmann::json& idx) {
        const auto i = idx.get<std::size_t>();
        if (i >= by_index.size() || by_index[i].table.empty()) {
            throw SchemaError(db_id + ": key references invalid column index " + std::to_string(i));
        }
        return by_index[i];
    };

    std::vector<ColumnKey> pks;
    if (record.contains("primary_keys")) {
        for (const auto& pk : record.at("primary_keys")) {
            if (pk.is_array()) {
                for (const auto& idx : pk) pks.push_back(key_at(idx));
            } else {
                pks.push_back(key_at(pk));
            }
        }
    }
    std::vector<ForeignKey> fks;
    if (record.contains("foreign_keys")) {
        for (const auto& fk : record.at("foreign_keys")) fks.push_back({key_at(fk.at(0)), key_at(fk.at(1))});
    }
    return DatabaseSchema(db_id, std::move(tables), std::move(pks), std::move(fks));
}

nlohmann::json schema_to_tables_json(const DatabaseSchema& schema) {
    nlohmann::json table_names = nlohmann::json::array();
    nlohmann::json columns = nlohmann::json::array({nlohmann::json::array({-1, "*"})});
    nlohmann::json types = nlohmann::json::array({"text"});
    std::map<std::string, std::size_t> index;
    for (std::size_t t = 0; t < schema.tables().size(); ++t) {
        const auto& table = schema.tables()[t];
        table_names.push_back(table.name);
        for (const auto& c : table.columns) {
            index[to_lower(table.name) + "." + to_lower(c.name)] = columns.size();
            columns.push_back(nlohmann::json::array({static_cast<int>(t), c.name}));
            types.push_back(c.type);
        }
    }
    auto idx = [&](const ColumnKey& k) { return index.at(to_lower(k.table) + "." + to_lower(k.column)); };
    nlohmann::json pks = nlohmann::json::array();
    for (const auto& k : schema.primary_keys()) pks.push_back(idx(k));
    nlohmann::json fks = nlohmann::json::array();
    for (const auto& fk : schema.foreign_keys()) fks.push_back(nlohmann::json::array({idx(fk.from), idx(fk.to)}));
    return {{"db_id", schema.db_id()},
            {"table_names_original", table_names},
            {"column_names_original", columns},
            {"column_types", types},
            {"primary_keys", pks},
            {"foreign_keys", fks}};
}

SchemaStore::SchemaStore(std::vector<DatabaseSchema> schemas) {
    for (auto& s : schemas) {
        const auto id = s.db_id();
        if (!schemas_.emplace(id, std::move(s)).second) throw SchemaError("duplicate db_id '" + id + "'");
    }
}

SchemaStore SchemaStore::load(const std::filesystem::path& tables_json) {
    std::ifstream in(tables_json);
    if (!in) throw ConfigError("cannot open tables file " + tables_json.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed tables file " + tables_json.string() + ": " + e.what());
    }
    std::vector<DatabaseSchema> schemas;
    for (const auto& record : doc) schemas.push_back(schema_from_tables_json(record));
    return SchemaStore(std::move(schemas));
}

const DatabaseSchema& SchemaStore::at(const std::string& db_id) const {
    const auto* s = find(db_id);
    if (s == nullptr) throw SchemaError("unknown db_id '" + db_id + "'");
    return *s;
}

const DatabaseSchema* SchemaStore::find(const std::string& db_id) const {
    auto it = schemas_.find(db_id);
    return it == schemas_.end() ? nullptr : &it->second;
}

std::string serialize_subset(const SchemaSubset& subset) {
    auto join = [](const std::set<std::string>& items) {
        std::string out;
        for (const auto& s : items) out += (out.empty() ? " " : ", ") + s;
        return out;
    };
    return "tables:" + join(subset.tables) + " | columns:" + join(subset.columns);
}

SchemaSubset parse_subset(std::string_view text) {
    const auto lower = to_lower(text);
    const auto tables_at = lower.find("tables:");
    const auto columns_at = lower.find("columns:");
    if (tables_at == std::string::npos && columns_at == std::string::npos) {
        throw std::invalid_argument("no tables/columns section in linking output");
    }
    // A section runs until the next section header, a '|' separator, or a line break.
    auto section = [&](std::size_t start, std::size_t header_len) {
        std::size_t end = lower.size();
        for (auto stop : {lower.find('|', start), lower.find('\n', start),
                          start < tables_at && tables_at != std::string::npos ? tables_at : std::string::npos,
                          start < columns_at && columns_at != std::string::npos ? columns_at : std::string::npos}) {
            if (stop != std::string::npos && stop >= start) end = std::min(end, stop);
        }
        std::set<std::string> items;
        std::string_view body(lower);
        body = body.substr(start + header_len, end - start - header_len);
        std::size_t pos = 0;
        while (pos <= body.size()) {
            const auto comma = body.find(',', pos);
            const auto piece = trim(body.substr(pos, comma == std::string_view::npos ? body.npos : comma - pos));
            if (!piece.empty()) items.insert(piece);
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        return items;
    };
    SchemaSubset out;
    if (tables_at != std::string::npos) out.tables = section(tables_at, 7);
    if (columns_at != std::string::npos) out.columns = section(columns_at, 8);
    return out;
}

std::string column_table(std::string_view qualified) {
    const auto dot = qualified.rfind('.');
    return dot == std::string_view::npos ? std::string{} : std::string(qualified.substr(0, dot));
}

std::string column_name(std::string_view qualified) {
    const auto dot = qualified.rfind('.');
    return std::string(dot == std::string_view::npos ? qualified : qualified.substr(dot + 1));
}

bool subset_is_valid(const SchemaSubset& subset, const DatabaseSchema& schema) {
    for (const auto& t : subset.tables) {
        if (schema.find_table(t) == nullptr) return false;
    }
    for (const auto& c : subset.columns) {
        const auto table = column_table(c);
        if (!subset.tables.contains(table)) return false;
        const auto col = column_name(c);
        if (col != "*" && !schema.has_column(table, col)) return false;
    }
    return true;
}

}  // namespace solidsql
