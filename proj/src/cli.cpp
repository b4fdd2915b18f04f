#include "solidsql/cli.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <set>

#include "solidsql/dataset.hpp"
#include "solidsql/embedding.hpp"
#include "solidsql/errors.hpp"
#include "solidsql/evalharness.hpp"
#include "solidsql/pipeline.hpp"
#include "solidsql/retrieval.hpp"
#include "solidsql/schema.hpp"
#include "solidsql/schema_link.hpp"

namespace solidsql {

namespace fs = std::filesystem;

namespace {

std::ostream& console(const Services& s) {
    static std::ostream null_stream(nullptr);
    return s.out ? *s.out : null_stream;
}

void require_path(const fs::path& p, const char* what) {
    if (p.empty()) throw ConfigError(std::string("--") + what + " is required");
}

void require_file(const fs::path& p, const char* what) {
    require_path(p, what);
    if (!fs::exists(p)) throw ConfigError(std::string(what) + " file not found: " + p.string());
}

template <class Rows>
void write_lines(const fs::path& path, const Rows& rows) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw EnvironmentError("cannot write " + path.string());
    for (const auto& row : rows) out << row.dump() << '\n';
    if (!out) throw EnvironmentError("write failed: " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out || !(out << text)) throw EnvironmentError("cannot write " + path.string());
}

HttpEndpoint endpoint_from_environment() {
    try {
        return HttpEndpoint::from_environment();
    } catch (const ConfigError& e) {
        throw EnvironmentError(e.what());
    }
}

std::unique_ptr<Gateway> make_gateway(const RunConfig& config, const Services& services) {
    std::shared_ptr<TranscriptStore> store;
    if (config.mode != GatewayMode::Live) {
        require_path(config.transcripts, "transcripts");
        if (config.mode == GatewayMode::Replay && !fs::exists(config.transcripts)) {
            throw ConfigError("transcripts file not found: " + config.transcripts.string());
        }
        store = std::make_shared<TranscriptStore>(config.transcripts);
    } else if (!config.transcripts.empty()) {
        spdlog::warn("live mode ignores --transcripts");
    }
    std::shared_ptr<ChatProvider> provider = services.provider;
    // Replay never constructs a network client.
    if (!provider && config.mode != GatewayMode::Replay) {
        provider = std::make_shared<OpenAiChatProvider>(endpoint_from_environment());
    }
    return std::make_unique<Gateway>(config.mode, provider, store, config.workers, services.clock);
}

std::unique_ptr<Embedder> make_embedder(const RunConfig& config) {
    if (config.embedder == "remote") {
        return std::make_unique<RemoteEmbedder>(endpoint_from_environment(), config.embedding_model,
                                                config.embedding_dim);
    }
    return std::make_unique<HashedBagOfTokens>(config.embedding_dim);
}

std::string read_index_provider(const fs::path& path) {
    std::ifstream in(path);
    std::string header;
    if (!std::getline(in, header)) return {};
    try {
        return nlohmann::json::parse(header).value("provider_id", "");
    } catch (const nlohmann::json::exception&) {
        return {};
    }
}

std::vector<PipelineResult> load_results(const fs::path& path) {
    std::vector<PipelineResult> out;
    for (const auto& row : read_jsonl(path)) {
        try {
            out.push_back(result_from_json(row));
        } catch (const std::exception& e) {
            throw ConfigError("malformed result in " + path.string() + ": " + e.what());
        }
    }
    return out;
}

}  // namespace

void RunConfig::validate() const {
    if (n_examples < 1) throw ConfigError("examples must be at least 1");
    if (rounds != 1 && rounds != 2) throw ConfigError("rounds must be 1 or 2");
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (embedder != "hashed" && embedder != "remote") throw ConfigError("embedder must be 'hashed' or 'remote'");
    if (embedder == "remote" && embedding_model.empty()) throw ConfigError("remote embedder needs embedding_model");
    if (embedder == "remote" && mode == GatewayMode::Replay) {
        throw ConfigError("replay mode cannot use the remote embedder (embeddings are not recorded)");
    }
    if (embedding_dim < 1) throw ConfigError("embedding_dim must be at least 1");
}

void RunConfig::apply_json(const nlohmann::json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    auto path = [&](const nlohmann::json& v) {
        fs::path p = v.get<std::string>();
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "dataset") dataset = path(v);
            else if (key == "tables") tables = path(v);
            else if (key == "databases") databases = path(v);
            else if (key == "pool") pool = path(v);
            else if (key == "index") index = path(v);
            else if (key == "transcripts") transcripts = path(v);
            else if (key == "output") output = path(v);
            else if (key == "predictions") predictions = path(v);
            else if (key == "robustness") robustness = path(v);
            else if (key == "model") model_id = v.get<std::string>();
            else if (key == "linking_model") linking_model = v.get<std::string>();
            else if (key == "skeleton_model") skeleton_model = v.get<std::string>();
            else if (key == "rewrite_model") rewrite_model = v.get<std::string>();
            else if (key == "embedder") embedder = v.get<std::string>();
            else if (key == "embedding_model") embedding_model = v.get<std::string>();
            else if (key == "embedding_dim") embedding_dim = v.get<std::size_t>();
            else if (key == "examples") n_examples = v.get<std::size_t>();
            else if (key == "rounds") rounds = v.get<int>();
            else if (key == "focus") focus_enabled = v.get<bool>();
            else if (key == "mode") mode = parse_gateway_mode(v.get<std::string>());
            else if (key == "workers") workers = v.get<std::size_t>();
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

RunConfig RunConfig::from_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed config " + path.string() + ": " + e.what());
    }
    RunConfig c;
    c.apply_json(j, path.parent_path());
    return c;
}

int cmd_build_sft(const RunConfig& config, const Services& services) {
    config.validate();
    require_file(config.dataset, "dataset");
    require_file(config.tables, "tables");
    require_path(config.output, "output");
    const auto examples = load_examples(config.dataset);
    const auto schemas = SchemaStore::load(config.tables);

    std::vector<Triplet> triplets;
    std::size_t unknown_db = 0;
    for (const auto& e : examples) {
        const auto* schema = schemas.find(e.db_id);
        if (!schema) {
            ++unknown_db;
            spdlog::warn("build-sft: unknown database '{}', item dropped", e.db_id);
            continue;
        }
        triplets.push_back({e.question, schema, e.query, TripletOrigin::Original});
    }

    auto gateway = make_gateway(config, services);
    GatewayRewriter rewriter(*gateway, config.rewrite_model);
    AugmentStats stats;
    const auto augmented = augment_dataset(triplets, rewriter, config.workers, &stats);
    const auto sft = build_sft_dataset(augmented);

    std::vector<nlohmann::json> triplet_rows;
    for (const auto& t : augmented) triplet_rows.push_back(triplet_to_json(t));
    std::vector<nlohmann::ordered_json> sft_rows;
    for (const auto& r : sft.records) sft_rows.push_back(r.to_json());
    write_lines(config.output / "triplets.jsonl", triplet_rows);
    write_lines(config.output / "sft.jsonl", sft_rows);

    console(services) << "items " << examples.size() << ", unknown db " << unknown_db << ", triplets " << augmented.size()
              << ", rewrite failures " << stats.failed << ", sft records " << sft.records.size() << ", skipped "
              << sft.skipped << '\n';
    return kExitOk;
}

int cmd_index(const RunConfig& config, const Services& services) {
    config.validate();
    require_file(config.pool, "pool");
    require_file(config.tables, "tables");
    require_path(config.index, "index");
    auto embedder = make_embedder(config);
    if (fs::exists(config.index)) {
        const auto existing = read_index_provider(config.index);
        if (!existing.empty() && existing != embedder->provider_id()) {
            throw ConfigError("index " + config.index.string() + " was built with '" + existing +
                              "', refusing to overwrite it with '" + embedder->provider_id() + "'");
        }
    }
    const auto examples = load_examples(config.pool);
    const auto schemas = SchemaStore::load(config.tables);

    std::unique_ptr<Gateway> gateway;
    if (!config.skeleton_model.empty()) gateway = make_gateway(config, services);
    IndexBuildOptions options;
    options.gateway = gateway.get();
    options.skeleton_model = config.skeleton_model;
    options.workers = config.workers;
    const auto built = build_index(examples, schemas, *embedder, options);
    save_index(built.index, config.index);

    console(services) << "pool size " << built.index.pool.size() << ", provider_id " << built.index.provider_id
              << ", skipped " << built.skipped << ", skeleton fallbacks " << built.skeleton_fallbacks << '\n';
    return kExitOk;
}

int cmd_run(const RunConfig& config, const Services& services) {
    config.validate();
    require_file(config.dataset, "dataset");
    require_file(config.tables, "tables");
    require_file(config.index, "index");
    require_path(config.output, "output");
    const auto items = load_examples(config.dataset);
    const auto schemas = SchemaStore::load(config.tables);
    const auto index = load_index(config.index);
    auto embedder = make_embedder(config);
    if (index.provider_id != embedder->provider_id()) {
        throw ConfigError("index was built with '" + index.provider_id + "' but the embedder is '" +
                          embedder->provider_id() + "'");
    }
    auto gateway = make_gateway(config, services);
    GatewayLinkingPredictor predictor(*gateway, config.linking_model);

    PipelineConfig pc;
    pc.model_id = config.model_id;
    pc.skeleton_model = config.skeleton_model;
    pc.n_examples = config.n_examples;
    pc.rounds = config.rounds;
    pc.focus_enabled = config.focus_enabled;
    pc.workers = config.workers;

    auto ledger = config.output;
    ledger += ".ledger.jsonl";
    const auto results = run_batch(items, schemas, {predictor, index, *gateway, *embedder}, pc, ledger,
                                   config.mode == GatewayMode::Replay);

    std::vector<nlohmann::ordered_json> rows;
    std::size_t no_sql = 0;
    for (const auto& r : results) {
        rows.push_back(result_to_json(r));
        no_sql += r.flags.count(flags::kNoSql);
    }
    write_lines(config.output, rows);
    fs::remove(ledger);
    console(services) << "items " << results.size() << ", without SQL " << no_sql << '\n';
    return kExitOk;
}

int cmd_eval(const RunConfig& config, const Services& services) {
    config.validate();
    require_file(config.dataset, "dataset");
    require_file(config.predictions, "predictions");
    require_path(config.databases, "databases");
    require_path(config.output, "output");
    if (!fs::is_directory(config.databases)) {
        throw ConfigError("databases directory not found: " + config.databases.string());
    }
    const auto dataset = load_examples(config.dataset);
    const auto predictions = load_results(config.predictions);
    const auto report = evaluate(dataset, predictions, config.databases, config.workers);

    auto summary = report.summary_json();
    std::string table = report.text_table();
    bool failures = report.ex_correct < report.scored;
    if (!config.robustness.empty()) {
        require_file(config.robustness, "robustness");
        const auto perturbed = load_results(config.robustness);
        const auto rob = evaluate_robustness(predictions, perturbed, config.databases, config.workers);
        summary["robustness"] = rob.summary_json();
        char line[96];
        std::snprintf(line, sizeof line, "robustness: %zu/%zu pairs (%.1f)\n", rob.robust, rob.pairs, rob.rate);
        table += line;
        failures = failures || rob.robust < rob.pairs;
    }

    std::vector<nlohmann::ordered_json> items;
    for (const auto& r : report.records) items.push_back(r.to_json());
    write_text(config.output / "report.json", summary.dump(2) + "\n");
    write_lines(config.output / "items.jsonl", items);
    write_text(config.output / "report.txt", table);
    console(services) << table;
    return failures ? kExitFailures : kExitOk;
}

int run_guarded(const std::function<int()>& command) {
    try {
        return command();
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return kExitConfig;
    } catch (const SchemaError& e) {
        spdlog::error("{}", e.what());
        return kExitConfig;
    } catch (const ReplayMiss& e) {
        spdlog::error("{} (replay mode must not reach the network; re-record the transcripts)", e.what());
        return kExitEnvironment;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitEnvironment;
    }
}

}  // namespace solidsql
