#include "solidsql/cli.hpp"

#include <gtest/gtest.h>

#include "solidsql/evalharness.hpp"
#include "solidsql/retrieval.hpp"
#include "support/desk_pool.hpp"
#include "support/fixtures.hpp"
#include "support/hermetic.hpp"

using namespace solidsql;
using namespace solidsql::test_support;
namespace fs = std::filesystem;

namespace {

Services quiet() {
    Services s;
    s.out = nullptr;
    return s;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::path(SOLIDSQL_SCRATCH_DIR) / "cli" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_examples(const fs::path& path, const std::vector<Example>& items) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : items) arr.push_back({{"db_id", e.db_id}, {"question", e.question}, {"query", e.query}});
    std::ofstream(path) << arr.dump(2);
}

fs::path music_db_root() {
    static const fs::path root = [] {
        const auto r = fs::path(SOLIDSQL_SCRATCH_DIR) / "cli_db";
        build_database(database_path(r, "music"), read_file(fixture_dir() / "desk" / "database" / "music" / "music.sql"));
        return r;
    }();
    return root;
}

Services scripted(const std::vector<Example>& items) {
    static const SchemaStore schemas = SchemaStore::load(fixture_dir() / "desk" / "tables.json");
    Services s;
    s.provider = std::make_shared<ScriptedBackend>(items, schemas);
    return s;
}

}  // namespace

TEST(RunConfig, JsonOverlayAndValidation) {
    RunConfig c;
    c.apply_json({{"examples", 3}, {"rounds", 1}, {"focus", false}, {"mode", "replay"}, {"dataset", "dev.json"}},
                 "/data");
    EXPECT_EQ(c.n_examples, 3u);
    EXPECT_EQ(c.rounds, 1);
    EXPECT_FALSE(c.focus_enabled);
    EXPECT_EQ(c.mode, GatewayMode::Replay);
    EXPECT_EQ(c.dataset, fs::path("/data/dev.json"));
    EXPECT_EQ(c.workers, 4u);
    EXPECT_THROW(c.apply_json({{"exampels", 3}}), ConfigError);
    EXPECT_THROW(c.apply_json({{"rounds", "two"}}), ConfigError);
    c.rounds = 3;
    EXPECT_THROW(c.validate(), ConfigError);
    c.rounds = 2;
    c.embedder = "remote";
    c.embedding_model = "m";
    EXPECT_THROW(c.validate(), ConfigError);  // replay cannot embed remotely
}

TEST(BuildSft, TripleArithmeticAndDeterminism) {
    const auto dir = scratch("sft");
    const auto items = desk_pool(10);
    write_examples(dir / "train.json", items);
    RunConfig c;
    c.dataset = dir / "train.json";
    c.tables = fixture_dir() / "desk" / "tables.json";
    c.output = dir / "out1";
    const auto services = scripted(items);
    ASSERT_EQ(cmd_build_sft(c, services), kExitOk);
    EXPECT_EQ(read_lines(dir / "out1" / "triplets.jsonl").size(), 30u);
    EXPECT_EQ(read_lines(dir / "out1" / "sft.jsonl").size(), 30u);

    c.output = dir / "out2";
    c.workers = 1;
    ASSERT_EQ(cmd_build_sft(c, services), kExitOk);
    EXPECT_EQ(read_file(dir / "out1" / "triplets.jsonl"), read_file(dir / "out2" / "triplets.jsonl"));
    EXPECT_EQ(read_file(dir / "out1" / "sft.jsonl"), read_file(dir / "out2" / "sft.jsonl"));

    c.tables = dir / "missing_tables.json";
    EXPECT_EQ(run_guarded([&] { return cmd_build_sft(c, services); }), kExitConfig);
}

TEST(Index, SizesAndProviderGuard) {
    const auto dir = scratch("index");
    RunConfig c;
    c.tables = fixture_dir() / "desk" / "tables.json";
    c.skeleton_model.clear();  // rule-based skeletons, no gateway

    write_examples(dir / "empty.json", {});
    c.pool = dir / "empty.json";
    c.index = dir / "empty_index.jsonl";
    ASSERT_EQ(cmd_index(c), kExitOk);
    EXPECT_TRUE(load_index(c.index).pool.empty());

    write_examples(dir / "pool.json", desk_pool(200));
    c.pool = dir / "pool.json";
    c.index = dir / "index.jsonl";
    ASSERT_EQ(cmd_index(c), kExitOk);
    EXPECT_EQ(load_index(c.index).pool.size(), 200u);
    EXPECT_EQ(read_lines(c.index).size(), 201u);  // header plus one line per item

    c.embedding_dim = 128;
    EXPECT_EQ(run_guarded([&] { return cmd_index(c); }), kExitConfig);
    c.dataset = dir / "pool.json";
    c.output = dir / "run.jsonl";
    EXPECT_EQ(run_guarded([&] { return cmd_run(c, quiet()); }), kExitConfig);
}

TEST(Hermetic, ReplayIsByteIdentical) {
    const auto dir = scratch("hermetic");
    const auto& def = kHermeticVariants[0];
    auto c1 = hermetic_config(hermetic_dir(), dir / "a", def);
    auto c2 = hermetic_config(hermetic_dir(), dir / "b", def);
    c2.workers = 4;
    ASSERT_EQ(run_guarded([&] { return cmd_run(c1); }), kExitOk);
    ASSERT_EQ(run_guarded([&] { return cmd_run(c2); }), kExitOk);
    const auto a = read_file(c1.output);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, read_file(c2.output));
    EXPECT_EQ(a, read_file(hermetic_dir() / "expected" / "run_default.jsonl"));
    EXPECT_FALSE(fs::exists(fs::path(c1.output.string() + ".ledger.jsonl")));

    for (const auto* name : {"e1", "e2"}) {
        RunConfig e;
        e.dataset = hermetic_dir() / "dev.json";
        e.predictions = c1.output;
        e.databases = music_db_root();
        e.output = dir / name;
        ASSERT_EQ(run_guarded([&] { return cmd_eval(e, quiet()); }), kExitOk);
    }
    for (const auto* f : {"report.json", "items.jsonl", "report.txt"}) {
        EXPECT_EQ(read_file(dir / "e1" / f), read_file(dir / "e2" / f)) << f;
    }
    const auto report = nlohmann::json::parse(read_file(dir / "e1" / "report.json"));
    EXPECT_EQ(report["ex"], 100.0);
    EXPECT_EQ(report["em"], 100.0);
}

TEST(Hermetic, SwitchesChangeOnlyDocumentedBytes) {
    const auto dir = scratch("switches");
    std::vector<std::vector<PipelineResult>> runs;
    for (const auto& v : kHermeticVariants) {
        const auto c = hermetic_config(hermetic_dir(), dir, v);
        ASSERT_EQ(run_guarded([&] { return cmd_run(c, quiet()); }), kExitOk) << v.name;
        EXPECT_EQ(read_file(c.output), read_file(hermetic_dir() / "expected" / c.output.filename())) << v.name;
        runs.push_back(read_results(c.output));
    }
    const auto bad = switch_violations(runs[0], runs[1], runs[2]);
    EXPECT_TRUE(bad.empty()) << bad.front();
    EXPECT_DOUBLE_EQ(focus_rate(runs[0]), 100.0);
    EXPECT_DOUBLE_EQ(focus_rate(runs[1]), 0.0);
}

TEST(Hermetic, ReplayMissAborts) {
    const auto dir = scratch("miss");
    auto dev = load_examples(hermetic_dir() / "dev.json");
    dev.push_back({"music", "Which singer is the youngest?", "SELECT name FROM singer ORDER BY age LIMIT 1"});
    write_examples(dir / "dev.json", dev);
    auto c = hermetic_config(hermetic_dir(), dir, kHermeticVariants[0]);
    c.dataset = dir / "dev.json";
    EXPECT_EQ(run_guarded([&] { return cmd_run(c, quiet()); }), kExitEnvironment);
    EXPECT_FALSE(fs::exists(c.output));

    auto missing = hermetic_config(hermetic_dir(), dir, kHermeticVariants[0]);
    missing.transcripts = dir / "none.jsonl";
    EXPECT_EQ(run_guarded([&] { return cmd_run(missing); }), kExitConfig);
}

TEST(Hermetic, FixtureIsNotStale) {
    // Rebuilding the fixture from the current templates and pipeline must
    // reproduce the committed files; otherwise run make_hermetic_fixture.
    const auto dir = scratch("regen");
    generate_hermetic(dir);
    EXPECT_EQ(read_file(dir / "transcripts.jsonl"), read_file(hermetic_dir() / "transcripts.jsonl"));
    EXPECT_EQ(read_file(dir / "index.jsonl"), read_file(hermetic_dir() / "index.jsonl"));
    for (const auto& v : kHermeticVariants) {
        const auto f = fs::path("expected") / (std::string("run_") + v.name + ".jsonl");
        EXPECT_EQ(read_file(dir / f), read_file(hermetic_dir() / f)) << f;
    }
}

TEST(Eval, FailuresRobustnessAndAlignment) {
    const auto dir = scratch("eval");
    const auto gold = read_results(hermetic_dir() / "expected" / "run_default.jsonl");
    auto wrong = gold;
    wrong[1].final_sql = "SELECT name FROM singer WHERE age > 50";
    std::vector<nlohmann::ordered_json> rows;
    for (const auto& r : wrong) rows.push_back(result_to_json(r));
    {
        std::ofstream out(dir / "wrong.jsonl");
        for (const auto& r : rows) out << r.dump() << '\n';
    }

    RunConfig e;
    e.dataset = hermetic_dir() / "dev.json";
    e.databases = music_db_root();
    e.predictions = hermetic_dir() / "expected" / "run_default.jsonl";
    e.robustness = hermetic_dir() / "expected" / "run_no_focus.jsonl";
    e.output = dir / "paired";
    ASSERT_EQ(run_guarded([&] { return cmd_eval(e, quiet()); }), kExitOk);
    const auto paired = nlohmann::json::parse(read_file(dir / "paired" / "report.json"));
    EXPECT_EQ(paired["robustness"]["rate"], 100.0);

    e.predictions = dir / "wrong.jsonl";
    e.robustness.clear();
    e.output = dir / "wrong";
    EXPECT_EQ(run_guarded([&] { return cmd_eval(e, quiet()); }), kExitFailures);
    const auto report = nlohmann::json::parse(read_file(dir / "wrong" / "report.json"));
    EXPECT_EQ(report["ex_correct"], 4);
    EXPECT_EQ(report["em_correct"], 4);

    write_examples(dir / "short.json", {load_examples(hermetic_dir() / "dev.json")[0]});
    e.dataset = dir / "short.json";
    EXPECT_EQ(run_guarded([&] { return cmd_eval(e, quiet()); }), kExitConfig);
}
