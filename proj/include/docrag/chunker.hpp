#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "docrag/doc_model.hpp"

namespace docrag {

struct ChunkPolicy {
    int max_tokens = 300;
    // Tried in order; "" is the per-character fallback and must come last.
    std::vector<std::string> separators = {"\n\n", ".\n", "\n", " ", ""};
    std::string token_counter = "words";
};

struct ChunkSource {
    std::string document_id;
    // Flat mode: [begin, end) byte range into the input text.
    // Structure mode: [begin, end] inclusive block order range.
    int64_t begin = 0;
    int64_t end = 0;
    bool block_range = false;
    // Distinguishes pieces of an oversize paragraph that share a block range.
    int seq = 0;
};

struct Chunk {
    std::string id; // content hash of (document_id, source range, seq)
    std::string text;
    int token_count = 0;
    ChunkSource source;
    bool atomic_oversize = false;
};

std::string chunk_id(const ChunkSource& source);

// Flat baseline: split at the first separator (in list order) whose pieces
// all fit the budget, recursing into oversize pieces with the remaining
// separators, then greedily merge adjacent pieces. Separators stay attached
// to the piece they terminate, so concatenating chunk texts reproduces the
// input exactly.
std::vector<Chunk> recursive_split(const std::string& full_text, const ChunkPolicy& policy,
                                   const std::string& document_id = "flat");

// Structure-aware: blocks are atomic (tables always; paragraphs fall back to
// sentence splitting when a single block exceeds the budget) and adjacent
// blocks merge while the combined text fits. Page headers/footers are
// skipped. A lone table bigger than the budget becomes one chunk flagged
// atomic_oversize.
std::vector<Chunk> structure_chunk(const Document& doc, const ChunkPolicy& policy);

// JSON-lines persistence, one chunk object per line.
std::string chunks_to_jsonl(const std::vector<Chunk>& chunks);
std::vector<Chunk> chunks_from_jsonl(const std::string& text);

} // namespace docrag
