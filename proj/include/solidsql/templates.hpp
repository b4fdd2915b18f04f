#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace solidsql {

// Template families. Each has `.system`/`.user` (or `.instruction`/`.input`) parts
// stored under templates/ and embedded at build time.
inline constexpr std::string_view kSqlPromptTemplate = "sql_prompt_v1";
inline constexpr std::string_view kSftTemplate = "sft_v1";
inline constexpr std::string_view kRewriteTemplate = "rewrite_v1";
inline constexpr std::string_view kQuestionSkeletonTemplate = "question_skeleton_v1";

/// Embedded template text by name, e.g. "sql_prompt_v1.user". Throws std::out_of_range.
std::string_view template_text(std::string_view name);
std::vector<std::string> template_names();

/// Replaces `{{name}}` placeholders. A line consisting only of a placeholder
/// whose value is empty is removed together with its newline. Throws
/// std::invalid_argument for placeholders without a value.
std::string fill_template(std::string_view tpl, const std::map<std::string, std::string>& values);

}  // namespace solidsql
