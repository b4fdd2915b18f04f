#pragma once

#include "solidsql/errors.hpp"
#include "solidsql/schema.hpp"
#include "solidsql/sql_ast.hpp"

namespace solidsql {

struct ExtractOptions {
    /// Count columns that appear only in JOIN ... ON conditions.
    bool include_join_on = true;
};

/// Tables and table-qualified columns a statement accesses, with aliases
/// resolved to base names. Unqualified columns resolve against the tables in
/// scope (inner query first, then enclosing queries); when several in-scope
/// tables carry the column the first one in FROM order wins. `*` and
/// `COUNT(*)` contribute `<table>.*` for every in-scope base table.
///
/// Throws ResolutionError for identifiers that match no schema element and
/// are not aliases.
SchemaSubset extract_schema_refs(const SqlAst& ast, const DatabaseSchema& schema, const ExtractOptions& options = {});

}  // namespace solidsql
