#include "docrag/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <stdexcept>

#include "docrag/tokenizer.hpp"

namespace docrag {

size_t VectorIndex::size() const {
    std::shared_lock lock(mutex_);
    return ids_.size();
}

void VectorIndex::upsert(const std::string& chunk_id, const EmbeddingVector& vec) {
    std::unique_lock lock(mutex_);
    if (dim_ == 0) dim_ = vec.dim();
    if (vec.dim() != dim_)
        throw std::runtime_error("vector dimension " + std::to_string(vec.dim()) +
                                 " does not match index dimension " + std::to_string(dim_));
    auto it = by_id_.find(chunk_id);
    if (it != by_id_.end()) {
        std::copy(vec.values.begin(), vec.values.end(), data_.begin() + it->second * dim_);
        return;
    }
    by_id_[chunk_id] = ids_.size();
    ids_.push_back(chunk_id);
    data_.insert(data_.end(), vec.values.begin(), vec.values.end());
}

std::vector<RetrievalResult> VectorIndex::query(const EmbeddingVector& query_vec, int k) const {
    std::shared_lock lock(mutex_);
    if (ids_.empty() || k <= 0) return {};
    if (query_vec.dim() != dim_)
        throw std::runtime_error("query dimension " + std::to_string(query_vec.dim()) +
                                 " does not match index dimension " + std::to_string(dim_));
    double qnorm = 0;
    for (float x : query_vec.values) qnorm += static_cast<double>(x) * x;
    qnorm = std::sqrt(qnorm);

    struct Scored {
        double score;
        size_t pos;
    };
    std::vector<Scored> scored;
    scored.reserve(ids_.size());
    for (size_t i = 0; i < ids_.size(); ++i) {
        double dot = 0, norm = 0;
        const float* row = data_.data() + i * dim_;
        for (size_t d = 0; d < dim_; ++d) {
            dot += static_cast<double>(row[d]) * query_vec.values[d];
            norm += static_cast<double>(row[d]) * row[d];
        }
        double denom = std::sqrt(norm) * qnorm;
        scored.push_back({denom > 0 ? dot / denom : 0.0, i});
    }
    // descending score, ties by insertion (source) order
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.pos < b.pos;
    });
    const size_t take = std::min<size_t>(static_cast<size_t>(k), scored.size());
    std::vector<RetrievalResult> out;
    out.reserve(take);
    for (size_t i = 0; i < take; ++i)
        out.push_back({ids_[scored[i].pos], scored[i].score, static_cast<int>(i) + 1});
    return out;
}

namespace {
constexpr char kMagic[4] = {'D', 'R', 'I', 'X'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
void read_pod(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("truncated index file");
}
} // namespace

void VectorIndex::save(const std::string& path) const {
    std::shared_lock lock(mutex_);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write index file: " + path);
    out.write(kMagic, 4);
    write_pod(out, kVersion);
    write_pod(out, static_cast<uint32_t>(dim_));
    write_pod(out, static_cast<uint64_t>(ids_.size()));
    for (size_t i = 0; i < ids_.size(); ++i) {
        write_pod(out, static_cast<uint32_t>(ids_[i].size()));
        out.write(ids_[i].data(), static_cast<std::streamsize>(ids_[i].size()));
        out.write(reinterpret_cast<const char*>(data_.data() + i * dim_),
                  static_cast<std::streamsize>(dim_ * sizeof(float)));
    }
    if (!out) throw std::runtime_error("failed writing index file: " + path);
}

VectorIndex VectorIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open index file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not an index file: " + path);
    uint32_t version = 0, dim = 0;
    uint64_t count = 0;
    read_pod(in, version);
    if (version != kVersion) throw std::runtime_error("unsupported index version");
    read_pod(in, dim);
    read_pod(in, count);
    VectorIndex idx(dim);
    for (uint64_t i = 0; i < count; ++i) {
        uint32_t len = 0;
        read_pod(in, len);
        std::string id(len, '\0');
        in.read(id.data(), len);
        EmbeddingVector v;
        v.values.resize(dim);
        in.read(reinterpret_cast<char*>(v.values.data()),
                static_cast<std::streamsize>(dim * sizeof(float)));
        if (!in) throw std::runtime_error("truncated index file");
        idx.upsert(id, v);
    }
    return idx;
}

std::vector<ContextPiece> assemble_context(const std::vector<RetrievalResult>& results,
                                           const std::unordered_map<std::string, Chunk>& chunks,
                                           int budget_tokens, const std::string& token_scheme) {
    std::vector<ContextPiece> out;
    if (budget_tokens <= 0) return out;
    int total = 0;
    for (const auto& result : results) {
        auto it = chunks.find(result.chunk_id);
        if (it == chunks.end()) continue;
        const Chunk& chunk = it->second;
        if (total + chunk.token_count <= budget_tokens) {
            out.push_back({chunk.id, chunk.text, chunk.token_count, false});
            total += chunk.token_count;
        } else if (out.empty() && total == 0) {
            // a lone oversize top result is kept, cut at a token boundary
            std::string text = truncate_at_token(chunk.text, budget_tokens, token_scheme);
            out.push_back({chunk.id, text, count_tokens(text, token_scheme), true});
            break;
        }
        // otherwise skip and keep walking down the ranking
    }
    return out;
}

std::string build_answer_prompt(const std::string& question,
                                const std::vector<ContextPiece>& context) {
    std::string prompt =
        "You are a helpful assistant. Answer the question using only the context below.\n\n"
        "Context:\n";
    int i = 1;
    for (const auto& piece : context) {
        prompt += "[" + std::to_string(i++) + "] " + piece.text + "\n";
    }
    prompt += "\nQuestion: " + question + "\nAnswer:";
    return prompt;
}

Answer answer(const std::string& question, const std::vector<ContextPiece>& context,
              ChatProvider& provider) {
    Answer out;
    out.prompt = build_answer_prompt(question, context);
    out.text = provider.complete(out.prompt);
    for (const auto& piece : context) out.cited_chunk_ids.push_back(piece.chunk_id);
    return out;
}

} // namespace docrag
