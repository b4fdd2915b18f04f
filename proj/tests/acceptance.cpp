// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include <spdlog/spdlog.h>

#include "solidsql/cli.hpp"
#include "solidsql/evalharness.hpp"
#include "solidsql/prompting.hpp"
#include "solidsql/retrieval.hpp"
#include "solidsql/schema_link.hpp"
#include "solidsql/schema_refs.hpp"
#include "solidsql/skeleton.hpp"
#include "solidsql/sql_parser.hpp"
#include "support/desk_pool.hpp"
#include "support/fixtures.hpp"
#include "support/hermetic.hpp"
#include "support/retrieval_oracle.hpp"
#include "support/sql_generator.hpp"
#include "support/ted_oracle.hpp"

using namespace solidsql;
using namespace solidsql::test_support;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

Services quiet() {
    Services s;
    s.out = nullptr;
    return s;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome parser_corpus() {
    const auto start = Clock::now();
    const auto corpus = read_lines(fixture_dir() / "parser_corpus.sql");
    std::size_t failures = 0;
    for (const auto& sql : corpus) {
        try {
            const auto first = parse_sql(sql);
            const auto rendered = render_sql(first);
            const auto second = parse_sql(rendered);
            const auto refs = extract_schema_refs(first, music_schema());
            if (!structurally_equal(first, second) || render_sql(second) != rendered || refs.tables.empty()) {
                ++failures;
            }
        } catch (const std::exception&) {
            ++failures;
        }
    }
    const double ms = ms_since(start);
    return {corpus.size() == 50 && failures == 0 && ms < 1000.0,
            fmt("%zu statements, %zu failures, %.1f ms (limit 1000 ms)", corpus.size(), failures, ms)};
}

Outcome identifier_invariance() {
    std::size_t zero = 0, pairs = 0;
    for (std::uint32_t seed = 1; seed <= 500; ++seed) {
        const auto a = skeleton_of(SqlGenerator(seed, seed * 7919u).statement());
        const auto b = skeleton_of(SqlGenerator(seed, seed * 104729u + 3u).statement());
        zero += tree_edit_distance(a, b) == 0;
        ++pairs;
    }
    return {pairs >= 500 && zero == pairs, fmt("%zu/%zu renamed pairs at distance 0", zero, pairs)};
}

Outcome ted_oracle() {
    const std::vector<std::string> alphabet{"a", "b", "c"};
    const auto start = Clock::now();
    std::mt19937 rng(20240611);
    std::size_t mismatches = 0;
    const std::size_t pairs = 1000;
    for (std::size_t i = 0; i < pairs; ++i) {
        const auto a = random_tree(rng, 1 + rng() % 8, alphabet);
        const auto b = random_tree(rng, 1 + rng() % 8, alphabet);
        mismatches += ted::distance(a, b) != mapping_distance(a, b);
    }
    // The mapping oracle itself is checked against literal edit-script search.
    std::mt19937 small(7);
    std::size_t oracle_disagree = 0;
    for (int i = 0; i < 100; ++i) {
        const auto a = random_tree(small, 1 + small() % 4, alphabet);
        const auto b = random_tree(small, 1 + small() % 4, alphabet);
        oracle_disagree += mapping_distance(a, b) != script_distance(a, b);
    }
    const double s = ms_since(start) / 1000.0;
    return {mismatches == 0 && oracle_disagree == 0 && s < 60.0,
            fmt("%zu pairs (<= 8 nodes), %zu mismatches; oracle vs edit-script search %zu/100 disagree; %.2f s "
                "(limit 60 s)",
                pairs, mismatches, oracle_disagree, s)};
}

Outcome metric_axioms() {
    std::size_t violations = 0;
    const std::size_t triples = 1000;
    for (std::uint32_t i = 0; i < triples; ++i) {
        const auto x = skeleton_of(SqlGenerator(3 * i + 1, i).statement());
        const auto y = skeleton_of(SqlGenerator(3 * i + 2, i).statement());
        const auto z = skeleton_of(SqlGenerator(3 * i + 3, i).statement());
        const auto dxy = tree_edit_distance(x, y), dyx = tree_edit_distance(y, x);
        const auto dxz = tree_edit_distance(x, z), dyz = tree_edit_distance(y, z);
        violations += tree_edit_distance(x, x) != 0;
        violations += dxy != dyx;
        violations += dxz > dxy + dyz;
        violations += (dxy == 0) != structurally_equal(x.tree, y.tree);
    }
    return {violations == 0, fmt("%zu skeleton triples, %zu violations", triples, violations)};
}

Outcome retrieval_oracle() {
    const SchemaStore store({music_schema()});
    HashedBagOfTokens e;
    const auto index = build_index(desk_pool(200), store, e).index;
    const auto a = compare_with_brute_force(index, e, 5, {1, 3, 7, 9});
    return {index.pool.size() == 200 && a.disagreements == 0 && a.checks > 0,
            fmt("pool %zu, N in {1,3,7,9}, both modes: %zu/%zu rankings agree", index.pool.size(),
                a.checks - a.disagreements, a.checks)};
}

Outcome linking_labels() {
    const auto labels = nlohmann::json::parse(read_file(fixture_dir() / "linking_labels.json"));
    std::size_t exact = 0;
    for (const auto& item : labels) {
        try {
            const auto got = extract_schema_refs(parse_sql(item.at("sql").get<std::string>()), music_schema());
            exact += got.tables == item.at("tables").get<std::set<std::string>>() &&
                     got.columns == item.at("columns").get<std::set<std::string>>();
        } catch (const std::exception&) {
        }
    }
    return {labels.size() == 20 && exact == 20, fmt("%zu/%zu hand labels matched exactly", exact, labels.size())};
}

Outcome ex_harness() {
    const auto root = fs::path(SOLIDSQL_SCRATCH_DIR) / "acceptance" / "database";
    build_database(database_path(root, "music"), read_file(fixture_dir() / "desk" / "database" / "music" / "music.sql"));
    const auto db = database_path(root, "music");
    const auto pairs = nlohmann::json::parse(read_file(fixture_dir() / "ex_pairs.json"));
    std::size_t correct = 0, equal = 0, ordered_case = 0;
    for (const auto& p : pairs) {
        const auto gold = p.at("gold").get<std::string>();
        const bool expected = p.at("match").get<bool>();
        correct += execution_match(p.at("pred").get<std::string>(), gold, db) == expected;
        equal += expected;
        ordered_case += !expected && execute_sql(db, gold).ordered;
    }
    return {pairs.size() == 10 && correct == 10 && equal == 5 && ordered_case >= 1,
            fmt("%zu/%zu pairs classified (%zu equal, %zu different, %zu order-sensitive)", correct, pairs.size(),
                equal, pairs.size() - equal, ordered_case)};
}

class MockRewriter : public QuestionRewriter {
public:
    std::array<std::string, 2> rewrite(const std::string& q) override { return {"Tell me: " + q, "Please answer: " + q}; }
};

Outcome augmentation() {
    const auto corpus = read_lines(fixture_dir() / "parser_corpus.sql");
    std::vector<Triplet> in;
    for (std::size_t i = 0; i < 37; ++i) {
        in.push_back({"question " + std::to_string(i), &music_schema(), corpus[i % corpus.size()],
                      TripletOrigin::Original});
    }
    MockRewriter rewriter;
    const auto out = augment_dataset(in, rewriter, 4);
    std::size_t unchanged = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        unchanged += out[i].schema == in[i / 3].schema && out[i].gold_sql == in[i / 3].gold_sql;
    }
    return {out.size() == 3 * in.size() && unchanged == out.size(),
            fmt("n=%zu -> %zu triplets, %zu with unchanged schema and SQL", in.size(), out.size(), unchanged)};
}

Outcome hermetic() {
    const auto dir = fs::path(SOLIDSQL_SCRATCH_DIR) / "acceptance" / "hermetic";
    fs::remove_all(dir);
    const auto db_root = fs::path(SOLIDSQL_SCRATCH_DIR) / "acceptance" / "database";
    int failures = 0;
    std::size_t identical = 0, compared = 0;
    auto same = [&](const fs::path& a, const fs::path& b) {
        ++compared;
        const auto x = read_file(a);
        identical += !x.empty() && x == read_file(b);
    };
    for (const auto* pass : {"first", "second"}) {
        const auto c = hermetic_config(hermetic_dir(), dir / pass, kHermeticVariants[0]);
        failures += run_guarded([&] { return cmd_run(c, quiet()); }) != kExitOk;
        RunConfig e;
        e.dataset = c.dataset;
        e.predictions = c.output;
        e.databases = db_root;
        e.output = dir / pass / "eval";
        failures += run_guarded([&] { return cmd_eval(e, quiet()); }) != kExitOk;
    }
    same(dir / "first" / "run_default.jsonl", dir / "second" / "run_default.jsonl");
    for (const auto* f : {"report.json", "items.jsonl", "report.txt"}) {
        same(dir / "first" / "eval" / f, dir / "second" / "eval" / f);
    }

    std::vector<std::vector<PipelineResult>> runs;
    for (const auto& v : kHermeticVariants) {
        const auto c = hermetic_config(hermetic_dir(), dir / "switches", v);
        failures += run_guarded([&] { return cmd_run(c, quiet()); }) != kExitOk;
        runs.push_back(fs::exists(c.output) ? read_results(c.output) : std::vector<PipelineResult>{});
    }
    const auto bad = switch_violations(runs[0], runs[1], runs[2]);
    return {failures == 0 && identical == compared && bad.empty(),
            fmt("%zu/%zu output files byte-identical across replay runs; %zu switch violations%s%s", identical,
                compared, bad.size(), bad.empty() ? "" : ", first: ", bad.empty() ? "" : bad.front().c_str())};
}

Outcome focus_contract() {
    // Desk sweep over prompts built directly, plus the prompts of the replay runs.
    std::size_t eligible = 0, with_focus = 0, without_focus = 0;
    for (const auto& ex : desk_pool(200)) {
        const auto linked = extract_schema_refs(parse_sql(ex.query), music_schema());
        if (linked.empty()) continue;
        ++eligible;
        PromptOptions on, off;
        off.focus_enabled = false;
        with_focus += build_prompt(ex.question, music_schema(), linked, {}, on).user.find(focus_line(linked)) !=
                      std::string::npos;
        without_focus += build_prompt(ex.question, music_schema(), linked, {}, off).user.find(kFocusMarker) !=
                         std::string::npos;
    }
    const auto dir = fs::path(SOLIDSQL_SCRATCH_DIR) / "acceptance" / "hermetic" / "switches";
    const auto def = read_results(dir / "run_default.jsonl");
    const auto nof = read_results(dir / "run_no_focus.jsonl");
    const double on_rate = 100.0 * static_cast<double>(with_focus) / static_cast<double>(eligible);
    const double off_rate = 100.0 * static_cast<double>(without_focus) / static_cast<double>(eligible);
    const double run_on = focus_rate(def), run_off = focus_rate(nof);
    return {eligible > 0 && on_rate == 100.0 && off_rate == 0.0 && run_on == 100.0 && run_off == 0.0,
            fmt("desk prompts: %.1f%% with focus, %.1f%% with --no-focus (%zu prompts); replay runs: %.1f%% / %.1f%%",
                on_rate, off_rate, eligible, run_on, run_off)};
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"parser corpus", parser_corpus},
        {"skeleton identifier invariance", identifier_invariance},
        {"edit distance equals exhaustive oracle", ted_oracle},
        {"metric axioms on skeletons", metric_axioms},
        {"retrieval equals brute-force scan", retrieval_oracle},
        {"ground-truth linking labels", linking_labels},
        {"execution-match harness", ex_harness},
        {"augmentation triples the set", augmentation},
        {"hermetic end-to-end replay", hermetic},
        {"prompt focus contract", focus_contract},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s  %-40s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
    return failed == 0 ? 0 : 1;
}
