#include "docrag/pipeline.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "docrag/serializer.hpp"

namespace docrag {

namespace {

using nlohmann::json;

ProviderConfig provider_from_json(const json& j, const ProviderConfig& base) {
    ProviderConfig p = base;
    p.provider = j.value("provider", p.provider);
    p.endpoint = j.value("endpoint", p.endpoint);
    p.model = j.value("model", p.model);
    p.batch_size = j.value("batch_size", p.batch_size);
    p.mock_dim = j.value("mock_dim", p.mock_dim);
    p.mock_mode = j.value("mock_mode", p.mock_mode);
    p.mock_canned = j.value("mock_canned", p.mock_canned);
    if (j.contains("retry")) {
        const auto& r = j["retry"];
        p.retry.max_attempts = r.value("max_attempts", p.retry.max_attempts);
        p.retry.base_delay_ms = r.value("base_delay_ms", p.retry.base_delay_ms);
    }
    // credentials only via environment, never inline
    const std::string env = j.value("api_key_env", std::string());
    if (!env.empty()) {
        const char* key = std::getenv(env.c_str());
        if (key) p.api_key = key;
    }
    return p;
}

} // namespace

RunConfig default_run_config() {
    RunConfig c;
    c.embedding.provider = "mock";
    c.embedding.model = "text-embedding-ada-002";
    c.chat.provider = "mock";
    c.chat.model = "gpt-3.5-turbo";
    c.chat.mock_mode = "echo";
    c.judge.provider = "mock";
    c.judge.model = "gpt-4";
    c.judge.mock_mode = "canned";
    c.judge.mock_canned = "score_a=5; score_b=5";
    return c;
}

RunConfig load_run_config(const std::string& path) {
    RunConfig c = default_run_config();
    if (path.empty()) return c;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config file " + path + ": " + e.what());
    }
    c.mode = j.value("mode", c.mode);
    c.budget_tokens = j.value("budget_tokens", c.budget_tokens);
    c.top_k = j.value("top_k", c.top_k);
    c.jobs = j.value("jobs", c.jobs);
    if (j.contains("chunk")) {
        const auto& ch = j["chunk"];
        c.policy.max_tokens = ch.value("max_tokens", c.policy.max_tokens);
        c.policy.token_counter = ch.value("token_counter", c.policy.token_counter);
        if (ch.contains("separators"))
            c.policy.separators = ch["separators"].get<std::vector<std::string>>();
    }
    if (j.contains("layout")) {
        const auto& l = j["layout"];
        c.layout.line_merge_tolerance = l.value("line_merge_tolerance", c.layout.line_merge_tolerance);
        c.layout.column_gap_min = l.value("column_gap_min", c.layout.column_gap_min);
        c.layout.para_gap_factor = l.value("para_gap_factor", c.layout.para_gap_factor);
        c.layout.ruling_min_length = l.value("ruling_min_length", c.layout.ruling_min_length);
        c.layout.header_footer_band = l.value("header_footer_band", c.layout.header_footer_band);
        c.layout.header_footer_repeat_min =
            l.value("header_footer_repeat_min", c.layout.header_footer_repeat_min);
        c.layout.alignment_cluster_tolerance =
            l.value("alignment_cluster_tolerance", c.layout.alignment_cluster_tolerance);
    }
    if (j.contains("embedding")) c.embedding = provider_from_json(j["embedding"], c.embedding);
    if (j.contains("chat")) c.chat = provider_from_json(j["chat"], c.chat);
    if (j.contains("judge")) c.judge = provider_from_json(j["judge"], c.judge);
    return c;
}

std::vector<Chunk> chunk_pdf(const std::vector<pdf::PdfPage>& pages, const RunConfig& config,
                             const std::string& source_id) {
    if (config.mode == "flat") {
        return recursive_split(pdf::flat_text(pages), config.policy, source_id);
    }
    Document doc = parse_document(pages, config.layout, source_id);
    return structure_chunk(doc, config.policy);
}

AskResult ask_question(const std::string& question, const VectorIndex& index,
                       const std::unordered_map<std::string, Chunk>& chunks,
                       EmbeddingProvider& embedder, ChatProvider& chat,
                       const RunConfig& config) {
    AskResult out;
    auto vectors = embedder.embed({question});
    out.results = index.query(vectors.front(), config.top_k);
    out.context = assemble_context(out.results, chunks, config.budget_tokens,
                                   config.policy.token_counter);
    out.answer = answer(question, out.context, chat);
    return out;
}

std::vector<EvalRecord> run_ab_eval(const std::vector<pdf::PdfPage>& pages,
                                    const std::vector<EvalQuestion>& questions,
                                    const RunConfig& config, const std::string& source_id) {
    RunConfig structure_cfg = config;
    structure_cfg.mode = "structure";
    RunConfig flat_cfg = config;
    flat_cfg.mode = "flat";

    auto chunks_a = chunk_pdf(pages, structure_cfg, source_id);
    auto chunks_b = chunk_pdf(pages, flat_cfg, source_id);

    auto embedder = make_embedding_provider(config.embedding);
    auto chat = make_chat_provider(config.chat);
    auto judge = make_chat_provider(config.judge);

    auto build_index = [&](const std::vector<Chunk>& chunks, VectorIndex& index,
                           std::unordered_map<std::string, Chunk>& by_id) {
        std::vector<std::string> texts;
        for (const auto& c : chunks) texts.push_back(c.text);
        auto vectors = embedder->embed(texts);
        for (size_t i = 0; i < chunks.size(); ++i) {
            index.upsert(chunks[i].id, vectors[i]);
            by_id.emplace(chunks[i].id, chunks[i]);
        }
    };
    VectorIndex index_a, index_b;
    std::unordered_map<std::string, Chunk> by_id_a, by_id_b;
    if (!chunks_a.empty()) build_index(chunks_a, index_a, by_id_a);
    if (!chunks_b.empty()) build_index(chunks_b, index_b, by_id_b);

    auto context_text = [](const std::vector<ContextPiece>& pieces) {
        std::string out;
        for (const auto& p : pieces) {
            if (!out.empty()) out += "\n---\n";
            out += p.text;
        }
        return out;
    };

    std::vector<EvalRecord> records;
    for (const auto& q : questions) {
        AskResult a = ask_question(q.text, index_a, by_id_a, *embedder, *chat, config);
        AskResult b = ask_question(q.text, index_b, by_id_b, *embedder, *chat, config);
        EvalRecord record;
        record.question_id = q.id;
        record.category = q.category;
        record.system_a = "structure";
        record.system_b = "flat";
        record.retrieved_a = context_text(a.context);
        record.retrieved_b = context_text(b.context);
        if (q.category == QuestionCategory::extractive) {
            record.answer_a = a.answer.text;
            record.answer_b = b.answer.text;
        }
        judge_pair(record, *judge);
        records.push_back(std::move(record));
    }
    return records;
}

} // namespace docrag
