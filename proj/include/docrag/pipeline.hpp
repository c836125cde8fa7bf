#pragma once

#include <string>
#include <vector>

#include "docrag/chunker.hpp"
#include "docrag/eval.hpp"
#include "docrag/layout.hpp"
#include "docrag/providers.hpp"
#include "docrag/retrieval.hpp"

namespace docrag {

// Everything one experiment run needs. "structure" parses blocks and chunks
// by structure; "flat" serializes storage-order text and splits recursively.
struct RunConfig {
    std::string mode = "structure"; // "structure" | "flat"
    ChunkPolicy policy;
    LayoutConfig layout;
    ProviderConfig embedding;
    ProviderConfig chat;
    ProviderConfig judge;
    int budget_tokens = 3000;
    int top_k = 10;
    int jobs = 1;
};

// Reads the JSON config file (all fields optional; mocks by default).
// Credentials come from the environment variable named in *_api_key_env.
RunConfig load_run_config(const std::string& path);
RunConfig default_run_config();

// Chunks a parsed PDF under the given mode.
std::vector<Chunk> chunk_pdf(const std::vector<pdf::PdfPage>& pages, const RunConfig& config,
                             const std::string& source_id);

struct AskResult {
    std::vector<RetrievalResult> results;
    std::vector<ContextPiece> context;
    Answer answer;
};

AskResult ask_question(const std::string& question, const VectorIndex& index,
                       const std::unordered_map<std::string, Chunk>& chunks,
                       EmbeddingProvider& embedder, ChatProvider& chat,
                       const RunConfig& config);

// The paired protocol: runs BOTH modes over the same questions.
// System A = structure-aware pipeline, system B = flat baseline.
// Extractive records carry answers; comprehensive records carry retrieved
// content only. All records are judge-scored.
std::vector<EvalRecord> run_ab_eval(const std::vector<pdf::PdfPage>& pages,
                                    const std::vector<EvalQuestion>& questions,
                                    const RunConfig& config, const std::string& source_id);

} // namespace docrag
