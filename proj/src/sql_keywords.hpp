#pragma once

#include <algorithm>
#include <array>
#include <string_view>

namespace solidsql {

// Words that can never be bare identifiers in the supported dialect.
inline constexpr std::array<std::string_view, 42> kReservedKeywords = {
    "ALL",    "AND",   "AS",     "ASC",     "BETWEEN", "BY",     "CASE",  "CAST",  "CROSS",
    "DESC",   "DISTINCT", "ELSE", "END",    "EXCEPT",  "EXISTS", "FROM",  "FULL",  "GLOB",
    "GROUP",  "HAVING", "IN",    "INNER",   "INTERSECT", "IS",   "JOIN",  "LEFT",  "LIKE",
    "LIMIT",  "NATURAL", "NOT",  "NULL",    "OFFSET",  "ON",     "OR",    "ORDER", "OUTER",
    "RIGHT",  "SELECT", "THEN",  "UNION",   "WHEN",    "WHERE",
};

inline bool is_reserved_keyword(std::string_view upper) {
    return std::find(kReservedKeywords.begin(), kReservedKeywords.end(), upper) != kReservedKeywords.end();
}

}  // namespace solidsql
