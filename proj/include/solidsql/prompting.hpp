#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "solidsql/schema.hpp"

namespace solidsql {

/// A question/SQL demonstration shown to the model.
struct PromptExample {
    std::string question;
    std::string sql;
};

struct PromptOptions {
    int round = 1;
    bool focus_enabled = true;
};

struct PromptMeta {
    std::string db_id;
    int round = 1;
    std::size_t n_examples = 0;
    bool focus_enabled = true;
    std::string template_id;
};

struct PromptBundle {
    std::string system;
    std::string user;
    PromptMeta meta;
};

inline constexpr std::string_view kFocusMarker = "focus on";

/// "singer (singer.name, singer.age), song" - tables in sorted order, each
/// followed by its linked columns when there are any.
std::string focus_serialization(const SchemaSubset& linked);

/// Sections in order: instructions, examples (omitted when none, in the order
/// given), full DDL, focus line (when enabled and `linked` is non-empty), the
/// question, and the output directive.
PromptBundle build_prompt(const std::string& question, const DatabaseSchema& schema, const SchemaSubset& linked,
                          const std::vector<PromptExample>& examples, const PromptOptions& options = {});

/// First SQL statement in a completion: the first fenced block holding one,
/// otherwise the text from the first SELECT/WITH up to `;` (kept), a blank
/// line, or the end. Throws ExtractError when there is none.
std::string parse_sql_from_completion(const std::string& completion);

}  // namespace solidsql
