#include "solidsql/prompting.hpp"

#include <gtest/gtest.h>

#include "solidsql/errors.hpp"
#include "support/fixtures.hpp"

using namespace solidsql;

namespace {

const std::vector<PromptExample> kExamples{{"How many singers are there?", "SELECT count(*) FROM singer"},
                                           {"List all venues.", "SELECT venue FROM concert"}};

}  // namespace

TEST(FocusSerialization, GroupsColumnsUnderTables) {
    EXPECT_EQ(focus_serialization({{"singer"}, {"singer.name"}}), "singer (singer.name)");
    EXPECT_EQ(focus_serialization({{"song", "singer", "concert"}, {"song.title", "singer.age", "singer.name"}}),
              "concert, singer (singer.age, singer.name), song (song.title)");
}

TEST(BuildPrompt, FocusLineCarriesLinkedSubset) {
    const auto& schema = test_support::music_schema();
    const auto p = build_prompt("Names of singers?", schema, {{"singer"}, {"singer.name"}}, kExamples);
    const auto marker = p.user.find("focus on");
    ASSERT_NE(marker, std::string::npos);
    EXPECT_EQ(p.user.substr(marker, 32), "focus on: singer (singer.name)\n#");
    EXPECT_EQ(p.meta.n_examples, 2u);
    EXPECT_EQ(p.meta.db_id, "music");
}

TEST(BuildPrompt, SectionsInFixedOrder) {
    const auto& schema = test_support::music_schema();
    const auto p = build_prompt("Names of singers?", schema, {{"singer"}, {"singer.name"}}, kExamples);
    const auto examples = p.user.find("### Examples");
    const auto first = p.user.find("How many singers are there?");
    const auto second = p.user.find("List all venues.");
    const auto ddl = p.user.find(render_ddl(schema));
    const auto focus = p.user.find("focus on");
    const auto question = p.user.find("Names of singers?");
    const auto directive = p.user.find("exactly one SQL statement");
    EXPECT_LT(0u, examples);
    EXPECT_LT(examples, first);
    EXPECT_LT(first, second);
    EXPECT_LT(second, ddl);
    EXPECT_LT(ddl, focus);
    EXPECT_LT(focus, question);
    EXPECT_LT(question, directive);
    EXPECT_NE(ddl, std::string::npos);
    EXPECT_NE(directive, std::string::npos);
}

TEST(BuildPrompt, DisablingFocusRemovesExactlyTheFocusLine) {
    const auto& schema = test_support::music_schema();
    const SchemaSubset linked{{"singer", "song"}, {"singer.name", "song.title"}};
    PromptOptions off;
    off.focus_enabled = false;
    const auto with = build_prompt("q?", schema, linked, kExamples).user;
    const auto without = build_prompt("q?", schema, linked, kExamples, off).user;
    const std::string line = "focus on: " + focus_serialization(linked) + "\n";
    const auto at = with.find(line);
    ASSERT_NE(at, std::string::npos);
    EXPECT_EQ(with.substr(0, at) + with.substr(at + line.size()), without);
    EXPECT_EQ(without.find("focus on"), std::string::npos);
}

TEST(BuildPrompt, EmptySubsetAndZeroExamples) {
    const auto& schema = test_support::music_schema();
    const auto p = build_prompt("q?", schema, {}, {});
    EXPECT_EQ(p.user.find("focus on"), std::string::npos);
    EXPECT_EQ(p.user.find("### Examples"), std::string::npos);
    EXPECT_NE(p.user.find(render_ddl(schema)), std::string::npos);
    EXPECT_EQ(p.user.find("\n\n\n"), std::string::npos);
}

TEST(BuildPrompt, DeterministicAndMonotoneInExamples) {
    const auto& schema = test_support::music_schema();
    const SchemaSubset linked{{"singer"}, {"singer.name"}};
    EXPECT_EQ(build_prompt("q?", schema, linked, kExamples).user, build_prompt("q?", schema, linked, kExamples).user);
    std::size_t last = 0;
    for (std::size_t k = 0; k <= kExamples.size(); ++k) {
        const std::vector<PromptExample> ex(kExamples.begin(), kExamples.begin() + static_cast<std::ptrdiff_t>(k));
        const auto len = build_prompt("q?", schema, linked, ex).user.size();
        EXPECT_GE(len, last);
        last = len;
    }
}

TEST(ParseSqlFromCompletion, FencesProseAndFailures) {
    EXPECT_EQ(parse_sql_from_completion("```sql\nSELECT 1\n```"), "SELECT 1");
    EXPECT_EQ(parse_sql_from_completion("The answer is: SELECT a FROM t;"), "SELECT a FROM t;");
    EXPECT_EQ(parse_sql_from_completion("Here:\nSELECT a\nFROM t\n\nThis selects a."), "SELECT a\nFROM t");
    EXPECT_EQ(parse_sql_from_completion("```\nselect a from t where b = 'x;y';\n```\nDone"),
              "select a from t where b = 'x;y';");
    EXPECT_EQ(parse_sql_from_completion("```text\nno sql\n```\nSELECT 2"), "SELECT 2");
    EXPECT_THROW(parse_sql_from_completion("I cannot answer."), ExtractError);
    EXPECT_THROW(parse_sql_from_completion(""), ExtractError);
}
