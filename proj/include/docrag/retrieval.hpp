#pragma once

#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "docrag/chunker.hpp"
#include "docrag/providers.hpp"

namespace docrag {

struct RetrievalResult {
    std::string chunk_id;
    double score = 0.0; // cosine similarity in [-1, 1]
    int rank = 0;       // 1-based
};

// Exact in-memory cosine index. Queries scan every vector; ties break by
// insertion order (chunks are inserted in source order). Concurrent queries
// are allowed; upserts take the exclusive lock.
class VectorIndex {
public:
    VectorIndex() = default;
    explicit VectorIndex(size_t dim) : dim_(dim) {}

    // movable (fresh mutex); moving while other threads use `other` is a
    // caller error, as with any container
    VectorIndex(VectorIndex&& other) noexcept
        : dim_(other.dim_),
          ids_(std::move(other.ids_)),
          data_(std::move(other.data_)),
          by_id_(std::move(other.by_id_)) {}
    VectorIndex& operator=(VectorIndex&& other) noexcept {
        dim_ = other.dim_;
        ids_ = std::move(other.ids_);
        data_ = std::move(other.data_);
        by_id_ = std::move(other.by_id_);
        return *this;
    }

    size_t dim() const { return dim_; }
    size_t size() const;

    // Replaces the vector when the id already exists. Throws on
    // dimension mismatch.
    void upsert(const std::string& chunk_id, const EmbeddingVector& vec);

    std::vector<RetrievalResult> query(const EmbeddingVector& query_vec, int k) const;

    // Flat binary file: magic "DRIX", u32 version, u32 dim, u64 count,
    // then per entry u32 id length, id bytes, dim float32 values.
    void save(const std::string& path) const;
    static VectorIndex load(const std::string& path);

private:
    size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> data_; // row-major
    std::unordered_map<std::string, size_t> by_id_;
    mutable std::shared_mutex mutex_;
};

struct ContextPiece {
    std::string chunk_id;
    std::string text;
    int token_count = 0;
    bool truncated = false;
};

// Walks results in rank order, keeping chunks that fit the running token
// budget. A rank-1 chunk that alone exceeds the budget is included alone,
// truncated at a token boundary and flagged. Total never exceeds budget.
std::vector<ContextPiece> assemble_context(const std::vector<RetrievalResult>& results,
                                           const std::unordered_map<std::string, Chunk>& chunks,
                                           int budget_tokens,
                                           const std::string& token_scheme = "words");

struct Answer {
    std::string text;
    std::vector<std::string> cited_chunk_ids;
    std::string prompt; // exact prompt sent, for audit
};

// Fixed prompt template (documented in docs/prompts.md): numbered context
// blocks followed by the question.
std::string build_answer_prompt(const std::string& question,
                                const std::vector<ContextPiece>& context);

Answer answer(const std::string& question, const std::vector<ContextPiece>& context,
              ChatProvider& provider);

} // namespace docrag
