#include "solidsql/retrieval.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <set>

#include "solidsql/errors.hpp"
#include "solidsql/parallel.hpp"
#include "solidsql/schema_refs.hpp"
#include "solidsql/sql_parser.hpp"
#include "solidsql/templates.hpp"

namespace solidsql {

namespace {

// ---- rule-based question masking ----

enum class SegKind { Word, Quoted, Other };

struct Segment {
    SegKind kind;
    std::string text;
};

bool is_word_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

std::vector<Segment> segment_question(const std::string& q) {
    std::vector<Segment> out;
    std::size_t i = 0;
    while (i < q.size()) {
        const auto c = static_cast<unsigned char>(q[i]);
        if (c == '\'' || c == '"') {
            const auto close = q.find(static_cast<char>(c), i + 1);
            if (close != std::string::npos) {
                out.push_back({SegKind::Quoted, q.substr(i, close - i + 1)});
                i = close + 1;
                continue;
            }
        }
        if (is_word_char(c)) {
            auto j = i;
            while (j < q.size()) {
                const auto d = static_cast<unsigned char>(q[j]);
                // Keep decimals such as 3.5 in one word.
                const bool decimal_point = d == '.' && j > i && std::isdigit(static_cast<unsigned char>(q[j - 1])) &&
                                           j + 1 < q.size() && std::isdigit(static_cast<unsigned char>(q[j + 1]));
                if (!is_word_char(d) && !decimal_point) break;
                ++j;
            }
            out.push_back({SegKind::Word, q.substr(i, j - i)});
            i = j;
            continue;
        }
        out.push_back({SegKind::Other, std::string(1, q[i])});
        ++i;
    }
    return out;
}

bool is_number(const std::string& w) {
    bool digit = false;
    for (const unsigned char c : w) {
        if (std::isdigit(c)) digit = true;
        else if (c != '.') return false;
    }
    return digit;
}

std::set<std::string> word_forms(const std::string& w) {
    std::set<std::string> f{w, w + "s", w + "es"};
    const auto ends = [&](std::string_view suffix) {
        return w.size() > suffix.size() && w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends("y")) f.insert(w.substr(0, w.size() - 1) + "ies");
    if (ends("ies")) f.insert(w.substr(0, w.size() - 3) + "y");
    if (ends("es")) f.insert(w.substr(0, w.size() - 2));
    if (ends("s")) f.insert(w.substr(0, w.size() - 1));
    return f;
}

bool word_matches(const std::string& token, const std::string& name_word) {
    return word_forms(name_word).count(token) > 0 || word_forms(token).count(name_word) > 0;
}

std::vector<std::vector<std::string>> masked_names(const SchemaSubset& linked) {
    std::set<std::string> names(linked.tables.begin(), linked.tables.end());
    for (const auto& c : linked.columns) {
        const auto col = column_name(c);
        if (col != "*") names.insert(col);
    }
    std::vector<std::vector<std::string>> out;
    for (const auto& n : names) {
        const auto lower = to_lower(n);
        out.push_back({lower});  // raw name, e.g. release_year as a single token
        std::vector<std::string> parts;
        std::string cur;
        for (const char ch : lower) {
            if (ch == '_' || ch == ' ') {
                if (!cur.empty()) parts.push_back(std::move(cur));
                cur.clear();
            } else {
                cur += ch;
            }
        }
        if (!cur.empty()) parts.push_back(std::move(cur));
        if (parts.size() > 1) out.push_back(std::move(parts));
    }
    // Longest names first so multiword matches win over their parts.
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string first_line(const std::string& text) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = trim(std::string_view(text).substr(pos, nl == std::string::npos ? std::string::npos : nl - pos));
        if (!line.empty()) return line;
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    return {};
}

// ---- ranking ----

void check_request(const RetrievalIndex& index, std::size_t n, const Embedder& embedder) {
    if (n == 0) throw std::invalid_argument("retrieval needs n >= 1");
    if (embedder.provider_id() != index.provider_id) {
        throw ConfigError("index was built with embedder '" + index.provider_id + "' but queried with '" +
                          embedder.provider_id() + "'");
    }
}

void truncate(std::vector<Retrieved>& items, std::size_t n) {
    if (items.size() > n) items.resize(n);
}

}  // namespace

std::string mask_question_rule_based(const std::string& question, const SchemaSubset& linked) {
    const auto segs = segment_question(question);
    const auto names = masked_names(linked);
    std::vector<bool> masked(segs.size(), false);

    std::vector<std::size_t> words;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (segs[i].kind == SegKind::Quoted) masked[i] = true;
        if (segs[i].kind == SegKind::Word) words.push_back(i);
    }
    for (std::size_t w = 0; w < words.size(); ++w) {
        const auto seg = words[w];
        if (masked[seg]) continue;
        const auto token = to_lower(segs[seg].text);
        if (is_number(token)) {
            masked[seg] = true;
            continue;
        }
        for (const auto& name : names) {
            if (w + name.size() > words.size()) continue;
            bool ok = true;
            for (std::size_t k = 0; k < name.size() && ok; ++k) {
                const auto s = words[w + k];
                // Words of a multiword name may only be separated by spaces.
                if (k > 0) {
                    for (auto between = words[w + k - 1] + 1; between < s; ++between) {
                        if (segs[between].text != " ") ok = false;
                    }
                }
                const auto t = to_lower(segs[s].text);
                // Plural/singular variation is allowed on the last word only.
                ok = ok && (k + 1 == name.size() ? word_matches(t, name[k]) : t == name[k]);
            }
            if (!ok) continue;
            for (auto s = seg; s <= words[w + name.size() - 1]; ++s) masked[s] = true;
            w += name.size() - 1;
            break;
        }
    }

    std::string out;
    bool last_was_mask = false;
    std::string pending_space;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (masked[i]) {
            if (!last_was_mask) {
                out += pending_space;
                out += '_';
            }
            pending_space.clear();
            last_was_mask = true;
            continue;
        }
        if (segs[i].kind == SegKind::Other && std::isspace(static_cast<unsigned char>(segs[i].text[0]))) {
            pending_space += segs[i].text;
            continue;
        }
        out += pending_space;
        pending_space.clear();
        out += segs[i].text;
        last_was_mask = false;
    }
    out += pending_space;
    return out;
}

ChatRequest question_skeleton_request(const std::string& question, const SchemaSubset& linked,
                                      const std::string& model_id) {
    const auto family = std::string(kQuestionSkeletonTemplate);
    ChatRequest r;
    r.model_id = model_id;
    r.messages = {{"system", std::string(template_text(family + ".system"))},
                  {"user", fill_template(template_text(family + ".user"),
                                         {{"linked", serialize_subset(linked)}, {"question", question}})}};
    r.temperature = 0.0;
    return r;
}

QuestionSkeleton extract_question_skeleton(const std::string& question, const SchemaSubset& linked, Gateway* gateway,
                                           const std::string& model_id) {
    if (trim(question).empty()) return {"", false};
    if (gateway) {
        try {
            auto text = first_line(gateway->complete(question_skeleton_request(question, linked, model_id)));
            if (!text.empty()) return {std::move(text), false};
            spdlog::warn("question skeleton: empty reply, using rule-based masking");
        } catch (const ReplayMiss&) {
            throw;
        } catch (const std::exception& e) {
            spdlog::warn("question skeleton: gateway failed, using rule-based masking: {}", e.what());
        }
    }
    return {mask_question_rule_based(question, linked), true};
}

IndexBuildResult build_index(const std::vector<Example>& examples, const SchemaStore& schemas, Embedder& embedder,
                             const IndexBuildOptions& options) {
    std::vector<std::optional<ExamplePair>> built(examples.size());
    std::vector<char> fell_back(examples.size(), 0);
    parallel_for(examples.size(), options.workers, [&](std::size_t i) {
        const auto& ex = examples[i];
        SqlAst ast;
        try {
            ast = parse_sql(ex.query);
        } catch (const ParseError& e) {
            spdlog::warn("index: skipping pool item {}: {}", i, e.what());
            return;
        }
        SchemaSubset linked;
        if (const auto* schema = schemas.find(ex.db_id)) {
            try {
                linked = extract_schema_refs(ast, *schema);
            } catch (const ResolutionError& e) {
                spdlog::debug("index: pool item {} does not resolve: {}", i, e.what());
            }
        }
        auto qs = extract_question_skeleton(ex.question, linked, options.gateway, options.skeleton_model);
        fell_back[i] = qs.fallback;
        ExamplePair pair;
        pair.question = ex.question;
        pair.sql = ex.query;
        pair.q_skeleton = std::move(qs.text);
        pair.q_embedding = embedder.embed(pair.q_skeleton);
        pair.s_skeleton = extract_sql_skeleton(ast);
        built[i] = std::move(pair);
    });

    IndexBuildResult result;
    result.index.provider_id = embedder.provider_id();
    result.index.dimension = embedder.dimension();
    result.index.built_at = options.built_at;
    for (std::size_t i = 0; i < built.size(); ++i) {
        if (!built[i]) {
            ++result.skipped;
            continue;
        }
        result.skeleton_fallbacks += fell_back[i] ? 1 : 0;
        built[i]->pool_index = result.index.pool.size();
        result.index.pool.push_back(std::move(*built[i]));
    }
    return result;
}

void save_index(const RetrievalIndex& index, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write index " + path.string());
    nlohmann::ordered_json header;
    header["kind"] = "solidsql-retrieval-index";
    header["version"] = 1;
    header["provider_id"] = index.provider_id;
    header["dimension"] = index.dimension;
    header["size"] = index.pool.size();
    if (!index.built_at.empty()) header["built_at"] = index.built_at;
    out << header.dump() << '\n';
    for (const auto& p : index.pool) {
        nlohmann::ordered_json rec;
        rec["pool_index"] = p.pool_index;
        rec["question"] = p.question;
        rec["sql"] = p.sql;
        rec["q_skeleton"] = p.q_skeleton;
        rec["embedding"] = p.q_embedding;
        rec["s_skeleton"] = p.s_skeleton.text;
        out << rec.dump() << '\n';
    }
}

RetrievalIndex load_index(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open index " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty index file " + path.string());
    RetrievalIndex index;
    std::size_t expected = 0;
    try {
        const auto header = nlohmann::json::parse(line);
        if (header.value("kind", "") != "solidsql-retrieval-index") throw ConfigError("not a retrieval index: " + path.string());
        index.provider_id = header.at("provider_id").get<std::string>();
        index.dimension = header.at("dimension").get<std::size_t>();
        expected = header.at("size").get<std::size_t>();
        index.built_at = header.value("built_at", "");
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            const auto rec = nlohmann::json::parse(line);
            ExamplePair p;
            p.pool_index = rec.at("pool_index").get<std::size_t>();
            p.question = rec.at("question").get<std::string>();
            p.sql = rec.at("sql").get<std::string>();
            p.q_skeleton = rec.at("q_skeleton").get<std::string>();
            p.q_embedding = rec.at("embedding").get<Embedding>();
            p.s_skeleton = skeleton_of(rec.at("s_skeleton").get<std::string>());
            if (p.pool_index != index.pool.size()) {
                throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": pool_index is not dense");
            }
            if (p.q_embedding.size() != index.dimension) {
                throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": embedding dimension mismatch");
            }
            index.pool.push_back(std::move(p));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed index " + path.string() + ": " + e.what());
    } catch (const ParseError& e) {
        throw ConfigError("index " + path.string() + " holds an unparseable SQL skeleton: " + e.what());
    }
    if (index.pool.size() != expected) throw ConfigError("index " + path.string() + " is truncated");
    return index;
}

RetrievalResult retrieve_by_question_skeleton(const std::string& target_skeleton, const RetrievalIndex& index,
                                              std::size_t n, Embedder& embedder, std::string_view exclude_question) {
    check_request(index, n, embedder);
    const auto target = embedder.embed(target_skeleton);
    RetrievalResult result;
    for (const auto& p : index.pool) {
        if (!exclude_question.empty() && p.question == exclude_question) continue;
        try {
            result.items.push_back({p.pool_index, cosine_similarity(target, p.q_embedding)});
        } catch (const ZeroVectorError&) {
            continue;
        }
    }
    std::sort(result.items.begin(), result.items.end(), [](const Retrieved& a, const Retrieved& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.pool_index < b.pool_index;
    });
    truncate(result.items, n);
    return result;
}

RetrievalResult retrieve_by_sql_skeleton(const std::string& round1_sql, const RetrievalIndex& index, std::size_t n,
                                         const std::string& fallback_q_skeleton, Embedder& embedder,
                                         std::string_view exclude_question) {
    check_request(index, n, embedder);
    SqlSkeleton target;
    try {
        target = skeleton_of(round1_sql);
    } catch (const ParseError& e) {
        spdlog::debug("round-1 SQL does not parse, retrieving by question skeleton: {}", e.what());
        auto fallback = retrieve_by_question_skeleton(fallback_q_skeleton, index, n, embedder, exclude_question);
        fallback.fallback = true;
        return fallback;
    }
    RetrievalResult result;
    for (const auto& p : index.pool) {
        if (!exclude_question.empty() && p.question == exclude_question) continue;
        result.items.push_back({p.pool_index, static_cast<double>(tree_edit_distance(target, p.s_skeleton))});
    }
    std::sort(result.items.begin(), result.items.end(), [](const Retrieved& a, const Retrieved& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.pool_index < b.pool_index;
    });
    truncate(result.items, n);
    return result;
}

}  // namespace solidsql
