#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <optional>

#include "solidsql/cli.hpp"
#include "solidsql/errors.hpp"

using namespace solidsql;
namespace fs = std::filesystem;

namespace {

// Flag values; only those given on the command line override the config file.
struct Flags {
    std::optional<std::string> config;
    std::optional<fs::path> dataset, tables, databases, pool, index, transcripts, output, predictions, robustness;
    std::optional<std::string> model, linking_model, skeleton_model, rewrite_model, embedder, embedding_model, mode;
    std::optional<std::size_t> embedding_dim, examples, workers;
    std::optional<int> rounds;
    bool no_focus = false;

    RunConfig resolve() const {
        RunConfig c = config ? RunConfig::from_file(*config) : RunConfig{};
        auto set = [](auto& target, const auto& flag) {
            if (flag) target = *flag;
        };
        set(c.dataset, dataset);
        set(c.tables, tables);
        set(c.databases, databases);
        set(c.pool, pool);
        set(c.index, index);
        set(c.transcripts, transcripts);
        set(c.output, output);
        set(c.predictions, predictions);
        set(c.robustness, robustness);
        set(c.model_id, model);
        set(c.linking_model, linking_model);
        set(c.skeleton_model, skeleton_model);
        set(c.rewrite_model, rewrite_model);
        set(c.embedder, embedder);
        set(c.embedding_model, embedding_model);
        set(c.embedding_dim, embedding_dim);
        set(c.n_examples, examples);
        set(c.workers, workers);
        set(c.rounds, rounds);
        if (mode) c.mode = parse_gateway_mode(*mode);
        if (no_focus) c.focus_enabled = false;
        return c;
    }
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("-c,--config", f.config, "JSON config file; flags override its keys");
    sub->add_option("--mode", f.mode, "gateway mode: live, record or replay")
        ->check(CLI::IsMember({"live", "record", "replay"}));
    sub->add_option("--transcripts", f.transcripts, "transcript store (record/replay)");
    sub->add_option("--workers", f.workers, "worker threads (default 4)");
    sub->add_option("--embedder", f.embedder, "hashed or remote");
    sub->add_option("--embedding-model", f.embedding_model, "model for the remote embedder");
    sub->add_option("--embedding-dim", f.embedding_dim, "embedding dimension (default 256)");
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("solidsql"));

    CLI::App app{"Text-to-SQL with schema linking, skeleton retrieval and two-round generation"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

    Flags f;

    auto* sft = app.add_subcommand("build-sft", "augment a training set and write SFT records for the linker");
    add_common(sft, f);
    sft->add_option("--dataset", f.dataset, "training set (JSON array)");
    sft->add_option("--tables", f.tables, "tables.json");
    sft->add_option("-o,--output", f.output, "output directory");
    sft->add_option("--rewrite-model", f.rewrite_model, "model used for question rewrites");

    auto* idx = app.add_subcommand("index", "build the retrieval index from a candidate pool");
    add_common(idx, f);
    idx->add_option("--pool", f.pool, "candidate pool (JSON array)");
    idx->add_option("--tables", f.tables, "tables.json");
    idx->add_option("--index", f.index, "index file to write");
    idx->add_option("--skeleton-model", f.skeleton_model, "model for question skeletons (empty: rule-based)");

    auto* run = app.add_subcommand("run", "run the pipeline over a dataset");
    add_common(run, f);
    run->add_option("--dataset", f.dataset, "questions (JSON array)");
    run->add_option("--tables", f.tables, "tables.json");
    run->add_option("--index", f.index, "retrieval index");
    run->add_option("-o,--output", f.output, "predictions file (JSONL)");
    run->add_option("--model", f.model, "SQL generation model");
    run->add_option("--linking-model", f.linking_model, "fine-tuned schema linking model");
    run->add_option("--skeleton-model", f.skeleton_model, "model for question skeletons");
    run->add_option("--examples", f.examples, "in-context examples per prompt (default 7)");
    run->add_option("--rounds", f.rounds, "generation rounds, 1 or 2 (default 2)");
    run->add_flag("--no-focus", f.no_focus, "omit the focus directive from prompts");

    auto* eval = app.add_subcommand("eval", "score predictions with EX and EM");
    add_common(eval, f);
    eval->add_option("--dataset", f.dataset, "gold dataset (JSON array)");
    eval->add_option("--predictions", f.predictions, "predictions from `run`");
    eval->add_option("--databases", f.databases, "directory holding <db_id>/<db_id>.sqlite");
    eval->add_option("-o,--output", f.output, "report directory");
    eval->add_option("--robustness", f.robustness, "predictions for the perturbed questions, aligned by index");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }
    spdlog::set_level(spdlog::level::from_str(log_level));

    return run_guarded([&] {
        const RunConfig config = f.resolve();
        if (sft->parsed()) return cmd_build_sft(config);
        if (idx->parsed()) return cmd_index(config);
        if (run->parsed()) return cmd_run(config);
        return cmd_eval(config);
    });
}
