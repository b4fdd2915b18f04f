#include "solidsql/prompting.hpp"

#include <cctype>
#include <map>
#include <optional>

#include "solidsql/errors.hpp"
#include "solidsql/templates.hpp"

namespace solidsql {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

bool word_boundary(std::string_view text, std::size_t pos, std::size_t len) {
    const auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    if (pos > 0 && is_word(text[pos - 1])) return false;
    return pos + len >= text.size() || !is_word(text[pos + len]);
}

std::optional<std::size_t> find_keyword(std::string_view text, bool case_sensitive) {
    std::optional<std::size_t> best;
    for (const std::string_view kw : {"SELECT", "WITH"}) {
        for (std::size_t pos = 0; pos + kw.size() <= text.size(); ++pos) {
            bool match = true;
            for (std::size_t k = 0; k < kw.size() && match; ++k) {
                const char c = text[pos + k];
                match = case_sensitive ? c == kw[k] : std::toupper(static_cast<unsigned char>(c)) == kw[k];
            }
            if (match && word_boundary(text, pos, kw.size())) {
                if (!best || pos < *best) best = pos;
                break;
            }
        }
    }
    return best;
}

// From `start` to the first `;` outside quotes (inclusive), a blank line, or the end.
std::string statement_from(std::string_view text, std::size_t start) {
    char quote = 0;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (quote) {
            if (c == quote) quote = 0;
            continue;
        }
        if (c == '\'' || c == '"' || c == '`') {
            quote = c;
        } else if (c == ';') {
            return trim(text.substr(start, i - start + 1));
        } else if (c == '\n') {
            auto j = i + 1;
            while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
            if (j < text.size() && text[j] == '\n') return trim(text.substr(start, i - start));
        }
    }
    return trim(text.substr(start));
}

std::optional<std::string> statement_in(std::string_view text) {
    auto pos = find_keyword(text, true);
    if (!pos) pos = find_keyword(text, false);
    if (!pos) return std::nullopt;
    return statement_from(text, *pos);
}

}  // namespace

std::string focus_serialization(const SchemaSubset& linked) {
    std::map<std::string, std::vector<std::string>> by_table;
    for (const auto& t : linked.tables) by_table[t];
    for (const auto& c : linked.columns) by_table[column_table(c)].push_back(c);
    std::string out;
    for (const auto& [table, columns] : by_table) {
        if (!out.empty()) out += ", ";
        out += table;
        if (columns.empty()) continue;
        out += " (";
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i > 0) out += ", ";
            out += columns[i];
        }
        out += ")";
    }
    return out;
}

PromptBundle build_prompt(const std::string& question, const DatabaseSchema& schema, const SchemaSubset& linked,
                          const std::vector<PromptExample>& examples, const PromptOptions& options) {
    const std::string family(kSqlPromptTemplate);
    std::string example_block;
    if (!examples.empty()) {
        example_block = "### Examples\n";
        for (std::size_t i = 0; i < examples.size(); ++i) {
            if (i > 0) example_block += "\n";
            example_block += "Question: " + examples[i].question + "\nSQL: " + examples[i].sql + "\n";
        }
    }
    std::string focus;
    if (options.focus_enabled && !linked.empty()) focus = std::string(kFocusMarker) + ": " + focus_serialization(linked);

    PromptBundle bundle;
    bundle.system = std::string(template_text(family + ".system"));
    bundle.user = fill_template(template_text(family + ".user"), {{"examples", example_block},
                                                                  {"ddl", render_ddl(schema)},
                                                                  {"focus", focus},
                                                                  {"question", question}});
    bundle.meta = {schema.db_id(), options.round, examples.size(), options.focus_enabled, family};
    return bundle;
}

std::string parse_sql_from_completion(const std::string& completion) {
    const std::string_view text(completion);
    for (auto open = text.find("```"); open != std::string_view::npos;) {
        const auto body_start = text.find('\n', open + 3);
        if (body_start == std::string_view::npos) break;
        const auto close = text.find("```", body_start + 1);
        const auto body = text.substr(body_start + 1, close == std::string_view::npos ? std::string_view::npos
                                                                                      : close - body_start - 1);
        if (auto stmt = statement_in(body); stmt && !stmt->empty()) return *stmt;
        if (close == std::string_view::npos) break;
        open = text.find("```", close + 3);
    }
    if (auto stmt = statement_in(text); stmt && !stmt->empty()) return *stmt;
    throw ExtractError("no SQL statement found in completion");
}

}  // namespace solidsql
