#pragma once

#include <string_view>

#include "solidsql/errors.hpp"
#include "solidsql/sql_ast.hpp"

namespace solidsql {

/// Only the SQLite-compatible subset used by Spider-style benchmarks is supported.
enum class Dialect { Sqlite };

/// Parses a single SELECT statement (optionally combined with set operations
/// and terminated by `;`). Throws ParseError on malformed input.
///
/// Double-quoted tokens are read as string literals, following benchmark gold
/// SQL usage; backticks and brackets quote identifiers. The bare identifier
/// `_V_` is read as a value placeholder so skeleton text re-parses.
SqlAst parse_sql(std::string_view text, Dialect dialect = Dialect::Sqlite);

}  // namespace solidsql
