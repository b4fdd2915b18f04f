#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <string>

#include <json.hpp>

#include "solidsql/llm_gateway.hpp"

namespace solidsql {

/// Settings shared by the subcommands. Each command reads the subset it needs.
struct RunConfig {
    std::filesystem::path dataset;      // benchmark JSON array (or JSONL)
    std::filesystem::path tables;       // tables.json
    std::filesystem::path databases;    // root of <db_id>/<db_id>.sqlite
    std::filesystem::path pool;         // candidate pool for `index`
    std::filesystem::path index;        // retrieval index file
    std::filesystem::path transcripts;  // transcript store for record/replay
    std::filesystem::path output;       // file or directory, per command
    std::filesystem::path predictions;  // PipelineResult JSONL for `eval`
    std::filesystem::path robustness;   // perturbed-run PipelineResult JSONL for `eval`

    std::string model_id = "gpt-4o-mini";
    std::string linking_model = "solidsql-linker";
    std::string skeleton_model = "gpt-4o-mini";
    std::string rewrite_model = "gpt-4o-mini";
    std::string embedder = "hashed";  // "hashed" or "remote"
    std::string embedding_model;
    std::size_t embedding_dim = 256;

    std::size_t n_examples = 7;
    int rounds = 2;
    bool focus_enabled = true;
    GatewayMode mode = GatewayMode::Live;
    std::size_t workers = 4;

    /// Throws ConfigError.
    void validate() const;

    /// Overlays keys from a JSON config object. Unknown keys are rejected;
    /// relative paths resolve against `base_dir`.
    void apply_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static RunConfig from_file(const std::filesystem::path& path);
};

/// Hooks for tests: a provider to use instead of the HTTP client, a clock
/// for transcript timestamps, and where command summaries go (null: nowhere).
struct Services {
    std::shared_ptr<ChatProvider> provider;
    WallClock clock;
    std::ostream* out = &std::cout;
};

enum ExitCode : int { kExitOk = 0, kExitFailures = 1, kExitConfig = 2, kExitEnvironment = 3 };

/// Reads `dataset` and `tables`, augments with two rewrites per question and
/// writes `output`/triplets.jsonl and `output`/sft.jsonl.
int cmd_build_sft(const RunConfig& config, const Services& services = {});

/// Builds the retrieval index from `pool` into `index`. An existing index
/// from a different embedding provider is refused.
int cmd_index(const RunConfig& config, const Services& services = {});

/// Runs the pipeline over `dataset` and writes PipelineResult JSONL to `output`.
/// Progress is kept in `output`.ledger.jsonl until the batch completes.
int cmd_run(const RunConfig& config, const Services& services = {});

/// Scores `predictions` against `dataset` and writes report.json, items.jsonl
/// and report.txt into `output`. Returns kExitFailures when any scored item
/// misses EX or any robustness pair fails.
int cmd_eval(const RunConfig& config, const Services& services = {});

/// Runs `command`, mapping exceptions to exit codes and logging them.
int run_guarded(const std::function<int()>& command);

}  // namespace solidsql
