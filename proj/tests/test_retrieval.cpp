#include "solidsql/retrieval.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/desk_pool.hpp"
#include "support/fixtures.hpp"
#include "support/retrieval_oracle.hpp"

using namespace solidsql;
using test_support::indices;

namespace {

class ScriptedProvider : public ChatProvider {
public:
    explicit ScriptedProvider(std::string reply) : reply_(std::move(reply)) {}
    std::string name() const override { return "scripted"; }
    std::string complete(const ChatRequest&) override {
        if (reply_.empty()) throw ProviderError("offline");
        return reply_;
    }

private:
    std::string reply_;
};

const SchemaStore& music_store() {
    static const SchemaStore store({test_support::music_schema()});
    return store;
}

RetrievalIndex desk_index(std::size_t size = 200) {
    HashedBagOfTokens embedder;
    return build_index(test_support::desk_pool(size), music_store(), embedder).index;
}

}  // namespace

TEST(CosineSimilarity, AnalyticValues) {
    EXPECT_DOUBLE_EQ(cosine_similarity({1, 2, 3}, {1, 2, 3}), 1.0);
    EXPECT_DOUBLE_EQ(cosine_similarity({1, 0}, {0, 1}), 0.0);
    EXPECT_NEAR(cosine_similarity({1, 0}, {1, 1}), std::sqrt(2.0) / 2, 1e-12);
    EXPECT_THROW(cosine_similarity({0, 0}, {1, 1}), ZeroVectorError);
    EXPECT_THROW(cosine_similarity({1}, {1, 1}), std::invalid_argument);
}

TEST(HashedBagOfTokens, DeterministicFixedDimension) {
    HashedBagOfTokens e;
    EXPECT_EQ(e.dimension(), 256u);
    const auto v = e.embed("What are the _ of _ ?");
    ASSERT_EQ(v.size(), 256u);
    EXPECT_EQ(v, e.embed("what are THE _ of _?"));
    double total = 0;
    for (const auto x : v) total += x;
    EXPECT_EQ(total, 7.0);
    EXPECT_EQ(HashedBagOfTokens::tokenize("Names, ages?"), (std::vector<std::string>{"names", ",", "ages", "?"}));
}

TEST(QuestionSkeleton, RuleBasedMasking) {
    const SchemaSubset singer{{"singer"}, {"singer.name", "singer.age"}};
    EXPECT_EQ(mask_question_rule_based("What are the names of singers older than 30?", singer),
              "What are the _ of _ older than _?");
    EXPECT_EQ(mask_question_rule_based("list concerts in 2014", {{"concert"}, {}}), "list _ in _");
    EXPECT_EQ(mask_question_rule_based("Show Singer names from 'New York'", singer), "Show _ from _");
    EXPECT_EQ(mask_question_rule_based("songs by release year after 2001.5", {{"song"}, {"song.release_year"}}),
              "_ by _ after _");
    EXPECT_EQ(mask_question_rule_based("Which country has most singers?", singer), "Which country has most _?");
    EXPECT_EQ(mask_question_rule_based("", singer), "");
}

TEST(QuestionSkeleton, GatewayThenFallback) {
    const SchemaSubset singer{{"singer"}, {"singer.name", "singer.age"}};
    const std::string q = "What are the names of singers older than 30?";

    const auto path = test_support::scratch_dir("qskel") / "t.jsonl";
    auto store = std::make_shared<TranscriptStore>(path);
    const auto req = question_skeleton_request(q, singer, "masker");
    store->append({request_hash(req), request_to_json(req), "What are the _ of _ older than _?\n", "recorded", ""});
    Gateway replay(GatewayMode::Replay, nullptr, store);
    const auto recorded = extract_question_skeleton(q, singer, &replay, "masker");
    EXPECT_EQ(recorded.text, "What are the _ of _ older than _?");
    EXPECT_FALSE(recorded.fallback);

    Gateway offline(GatewayMode::Live, std::make_shared<ScriptedProvider>(""), nullptr);
    const auto fb = extract_question_skeleton("list concerts in 2014", {{"concert"}, {}}, &offline, "masker");
    EXPECT_EQ(fb.text, "list _ in _");
    EXPECT_TRUE(fb.fallback);
    // Replay runs must stay hermetic, so a miss is not hidden by the fallback.
    EXPECT_THROW(extract_question_skeleton("unrecorded?", singer, &replay, "masker"), ReplayMiss);
    EXPECT_EQ(extract_question_skeleton("", singer, &offline, "masker").text, "");
}

TEST(RetrieveByQuestionSkeleton, TruncationAndTieBreak) {
    HashedBagOfTokens e;
    const std::vector<Example> three{{"music", "How many _ ?", "SELECT count(*) FROM singer"},
                                     {"music", "List all _", "SELECT name FROM singer"},
                                     {"music", "How many _ ?", "SELECT count(*) FROM song"}};
    const auto index = build_index(three, music_store(), e).index;
    const auto r = retrieve_by_question_skeleton("How many _ ?", index, 7, e);
    EXPECT_EQ(indices(r), (std::vector<std::size_t>{0, 2, 1}));
    EXPECT_DOUBLE_EQ(r.items[0].score, 1.0);
    EXPECT_EQ(r.items[0].score, r.items[1].score);
    EXPECT_FALSE(r.fallback);

    EXPECT_EQ(indices(retrieve_by_question_skeleton("How many _ ?", index, 7, e, "How many _ ?")),
              (std::vector<std::size_t>{1}));
    EXPECT_THROW(retrieve_by_question_skeleton("x", index, 0, e), std::invalid_argument);
    HashedBagOfTokens other(64);
    EXPECT_THROW(retrieve_by_question_skeleton("x", index, 1, other), ConfigError);
}

TEST(RetrieveBySqlSkeleton, IdentityAndFallback) {
    HashedBagOfTokens e;
    const auto index = desk_index(24);
    const auto& member = index.pool[5];
    const auto r = retrieve_by_sql_skeleton(member.sql, index, 3, member.q_skeleton, e);
    ASSERT_EQ(r.items.size(), 3u);
    EXPECT_EQ(r.items[0].score, 0.0);
    EXPECT_EQ(index.pool[r.items[0].pool_index].s_skeleton.text, member.s_skeleton.text);
    EXPECT_LE(r.items[0].pool_index, 5u);

    const auto fb = retrieve_by_sql_skeleton("SELEC broken", index, 3, member.q_skeleton, e);
    EXPECT_TRUE(fb.fallback);
    EXPECT_EQ(fb.tag(), "fallback=question");
    EXPECT_EQ(indices(fb), indices(retrieve_by_question_skeleton(member.q_skeleton, index, 3, e)));
}

TEST(Retrieval, MatchesBruteForceScanOnDeskPool) {
    HashedBagOfTokens e;
    const auto index = desk_index(200);
    ASSERT_EQ(index.pool.size(), 200u);
    const auto agreement = test_support::compare_with_brute_force(index, e, 5, {1, 3, 7, 9});
    EXPECT_EQ(agreement.checks, 320u);
    EXPECT_EQ(agreement.disagreements, 0u);
}

TEST(Retrieval, RankingIgnoresPoolStorageOrder) {
    HashedBagOfTokens e;
    const auto index = desk_index(60);
    auto shuffled = index;
    std::shuffle(shuffled.pool.begin(), shuffled.pool.end(), std::mt19937(3));
    for (std::size_t t = 0; t < 60; t += 7) {
        const auto& p = index.pool[t];
        EXPECT_EQ(indices(retrieve_by_question_skeleton(p.q_skeleton, index, 9, e)),
                  indices(retrieve_by_question_skeleton(p.q_skeleton, shuffled, 9, e)));
        EXPECT_EQ(indices(retrieve_by_sql_skeleton(p.sql, index, 9, p.q_skeleton, e)),
                  indices(retrieve_by_sql_skeleton(p.sql, shuffled, 9, p.q_skeleton, e)));
    }
}

TEST(Retrieval, DistanceOrderEqualsSimilarityOrderForEqualNodeCounts) {
    const auto index = desk_index(60);
    const auto& target = index.pool[1].s_skeleton;
    for (const auto& a : index.pool) {
        for (const auto& b : index.pool) {
            if (a.s_skeleton.node_count != b.s_skeleton.node_count) continue;
            const auto da = tree_edit_distance(target, a.s_skeleton), db = tree_edit_distance(target, b.s_skeleton);
            const auto sa = skeleton_similarity(target, a.s_skeleton), sb = skeleton_similarity(target, b.s_skeleton);
            EXPECT_EQ(da < db, sa > sb);
        }
    }
}

TEST(RetrievalIndex, EmptyDeterministicAndRoundTrips) {
    HashedBagOfTokens e;
    EXPECT_TRUE(build_index({}, music_store(), e).index.pool.empty());

    auto pool = test_support::desk_pool(40);
    pool.insert(pool.begin() + 3, Example{"music", "broken item", "SELEC nothing"});
    const auto built = build_index(pool, music_store(), e);
    EXPECT_EQ(built.skipped, 1u);
    EXPECT_EQ(built.index.pool.size(), 40u);
    EXPECT_EQ(built.index.pool[3].pool_index, 3u);
    EXPECT_EQ(built.skeleton_fallbacks, 40u);

    const auto dir = test_support::scratch_dir("index");
    save_index(built.index, dir / "a.jsonl");
    IndexBuildOptions parallel;
    parallel.workers = 4;
    save_index(build_index(pool, music_store(), e, parallel).index, dir / "b.jsonl");
    EXPECT_EQ(test_support::read_file(dir / "a.jsonl"), test_support::read_file(dir / "b.jsonl"));

    const auto loaded = load_index(dir / "a.jsonl");
    ASSERT_EQ(loaded.pool.size(), 40u);
    EXPECT_EQ(loaded.provider_id, e.provider_id());
    for (std::size_t i = 0; i < 40; ++i) {
        EXPECT_EQ(loaded.pool[i].q_embedding, built.index.pool[i].q_embedding);
        EXPECT_TRUE(structurally_equal(loaded.pool[i].s_skeleton.tree, built.index.pool[i].s_skeleton.tree));
    }
    save_index(loaded, dir / "c.jsonl");
    EXPECT_EQ(test_support::read_file(dir / "a.jsonl"), test_support::read_file(dir / "c.jsonl"));
}
