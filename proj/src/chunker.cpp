#include "docrag/chunker.hpp"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "docrag/serializer.hpp"
#include "docrag/tokenizer.hpp"

namespace docrag {

namespace {

uint64_t fnv1a(std::string_view data, uint64_t h = 14695981039346656037ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Split keeping the separator attached to the piece it terminates.
std::vector<std::string> split_keep(std::string_view text, std::string_view sep) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t hit = text.find(sep, pos);
        if (hit == std::string_view::npos) {
            out.emplace_back(text.substr(pos));
            return out;
        }
        out.emplace_back(text.substr(pos, hit + sep.size() - pos));
        pos = hit + sep.size();
    }
    return out;
}

std::vector<std::string> split_codepoints(std::string_view text) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < text.size()) {
        size_t start = i;
        ++i;
        while (i < text.size() && (static_cast<unsigned char>(text[i]) & 0xC0) == 0x80) ++i;
        out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

std::vector<std::string> split_rec(std::string_view text,
                                   const std::vector<std::string>& seps, size_t sep_from,
                                   const ChunkPolicy& policy) {
    if (count_tokens(text, policy.token_counter) <= policy.max_tokens)
        return {std::string(text)};

    // First separator whose pieces all fit ends the recursion.
    for (size_t i = sep_from; i < seps.size(); ++i) {
        const std::string& sep = seps[i];
        if (sep.empty()) break;
        auto pieces = split_keep(text, sep);
        if (pieces.size() < 2) continue;
        bool all_fit = true;
        for (const auto& p : pieces)
            if (count_tokens(p, policy.token_counter) > policy.max_tokens) {
                all_fit = false;
                break;
            }
        if (all_fit) return pieces;
    }

    // Otherwise split at the first separator that divides the text and
    // recurse into oversize pieces with the remaining separators.
    for (size_t i = sep_from; i < seps.size(); ++i) {
        const std::string& sep = seps[i];
        if (sep.empty()) return split_codepoints(text);
        auto pieces = split_keep(text, sep);
        if (pieces.size() < 2) continue;
        std::vector<std::string> out;
        for (auto& p : pieces) {
            if (count_tokens(p, policy.token_counter) <= policy.max_tokens) {
                out.push_back(std::move(p));
            } else {
                auto sub = split_rec(p, seps, i + 1, policy);
                out.insert(out.end(), sub.begin(), sub.end());
            }
        }
        return out;
    }
    return {std::string(text)}; // separators exhausted; oversize piece stands
}

std::vector<std::string> greedy_merge(std::vector<std::string> pieces,
                                      const ChunkPolicy& policy) {
    std::vector<std::string> out;
    for (auto& piece : pieces) {
        if (!out.empty() &&
            count_tokens(out.back() + piece, policy.token_counter) <= policy.max_tokens) {
            out.back() += piece;
        } else {
            out.push_back(std::move(piece));
        }
    }
    return out;
}

// Sentence-boundary fallback for oversize paragraphs: split after
// '.', '!' or '?' followed by whitespace, then greedy-pack.
std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i + 1 < text.size(); ++i) {
        char c = text[i];
        if ((c == '.' || c == '!' || c == '?') &&
            (text[i + 1] == ' ' || text[i + 1] == '\n')) {
            out.push_back(text.substr(start, i + 2 - start));
            start = i + 2;
        }
    }
    if (start < text.size()) out.push_back(text.substr(start));
    return out;
}

} // namespace

std::string chunk_id(const ChunkSource& source) {
    uint64_t h = fnv1a(source.document_id);
    std::string tail = "|" + std::to_string(source.begin) + "|" + std::to_string(source.end) +
                       "|" + (source.block_range ? "b" : "c") + "|" + std::to_string(source.seq);
    h = fnv1a(tail, h);
    char buf[17];
    snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<Chunk> recursive_split(const std::string& full_text, const ChunkPolicy& policy,
                                   const std::string& document_id) {
    std::vector<Chunk> chunks;
    if (full_text.empty()) return chunks;
    auto pieces = greedy_merge(split_rec(full_text, policy.separators, 0, policy), policy);
    int64_t offset = 0;
    for (auto& text : pieces) {
        Chunk c;
        c.source.document_id = document_id;
        c.source.begin = offset;
        c.source.end = offset + static_cast<int64_t>(text.size());
        c.source.block_range = false;
        offset = c.source.end;
        c.token_count = count_tokens(text, policy.token_counter);
        c.atomic_oversize = c.token_count > policy.max_tokens;
        c.text = std::move(text);
        c.id = chunk_id(c.source);
        chunks.push_back(std::move(c));
    }
    return chunks;
}

std::vector<Chunk> structure_chunk(const Document& doc, const ChunkPolicy& policy) {
    struct Item {
        std::string text;
        int begin_order, end_order;
        int seq = 0;
        bool table = false;
    };
    std::vector<Item> items;
    for (const auto& block : doc.blocks) {
        if (block.kind == BlockKind::page_header || block.kind == BlockKind::page_footer)
            continue;
        std::string text = block_to_text(block);
        const bool is_table = block.kind == BlockKind::table;
        if (!is_table && count_tokens(text, policy.token_counter) > policy.max_tokens) {
            auto sentences = split_sentences(text);
            auto packed = greedy_merge(std::move(sentences), policy);
            int seq = 0;
            for (auto& piece : packed)
                items.push_back({std::move(piece), block.order, block.order, seq++, false});
        } else {
            items.push_back({std::move(text), block.order, block.order, 0, is_table});
        }
    }

    std::vector<Chunk> chunks;
    size_t i = 0;
    while (i < items.size()) {
        std::string text = items[i].text;
        int begin = items[i].begin_order;
        int end = items[i].end_order;
        int seq = items[i].seq;
        size_t j = i + 1;
        while (j < items.size()) {
            std::string merged = text + "\n\n" + items[j].text;
            if (count_tokens(merged, policy.token_counter) > policy.max_tokens) break;
            text = std::move(merged);
            end = items[j].end_order;
            ++j;
        }
        Chunk c;
        c.source.document_id = doc.source_id;
        c.source.begin = begin;
        c.source.end = end;
        c.source.block_range = true;
        c.source.seq = seq;
        c.token_count = count_tokens(text, policy.token_counter);
        c.atomic_oversize = c.token_count > policy.max_tokens;
        c.text = std::move(text);
        c.id = chunk_id(c.source);
        chunks.push_back(std::move(c));
        i = j;
    }
    return chunks;
}

std::string chunks_to_jsonl(const std::vector<Chunk>& chunks) {
    std::ostringstream out;
    for (const auto& c : chunks) {
        nlohmann::json j = {{"id", c.id},
                            {"text", c.text},
                            {"token_count", c.token_count},
                            {"source",
                             {{"document_id", c.source.document_id},
                              {"begin", c.source.begin},
                              {"end", c.source.end},
                              {"block_range", c.source.block_range},
                              {"seq", c.source.seq}}},
                            {"atomic_oversize", c.atomic_oversize}};
        out << j.dump() << "\n";
    }
    return out.str();
}

std::vector<Chunk> chunks_from_jsonl(const std::string& text) {
    std::vector<Chunk> out;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error("chunk file line " + std::to_string(lineno) + ": " + e.what());
        }
        Chunk c;
        c.id = j.at("id").get<std::string>();
        c.text = j.at("text").get<std::string>();
        c.token_count = j.at("token_count").get<int>();
        c.atomic_oversize = j.at("atomic_oversize").get<bool>();
        const auto& s = j.at("source");
        c.source.document_id = s.at("document_id").get<std::string>();
        c.source.begin = s.at("begin").get<int64_t>();
        c.source.end = s.at("end").get<int64_t>();
        c.source.block_range = s.at("block_range").get<bool>();
        c.source.seq = s.at("seq").get<int>();
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace docrag
