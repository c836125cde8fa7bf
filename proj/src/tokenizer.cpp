#include "docrag/tokenizer.hpp"

#include <cctype>
#include <stdexcept>

namespace docrag {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

enum class Scheme { words, chars };

Scheme resolve(const std::string& name) {
    if (name == "words" || name.empty()) return Scheme::words;
    if (name == "chars") return Scheme::chars;
    throw std::invalid_argument("unknown token counting scheme: " + name);
}

template <typename Emit>
void scan_tokens(std::string_view text, Scheme scheme, Emit emit) {
    size_t i = 0;
    const size_t n = text.size();
    if (scheme == Scheme::chars) {
        while (i < n) {
            size_t start = i;
            // advance one UTF-8 codepoint
            ++i;
            while (i < n && (static_cast<unsigned char>(text[i]) & 0xC0) == 0x80) ++i;
            if (!is_space(static_cast<unsigned char>(text[start]))) emit(i);
        }
        return;
    }
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (is_space(c)) {
            ++i;
        } else if (is_punct(c)) {
            emit(++i);
        } else {
            // word run: everything that is neither whitespace nor ASCII punctuation
            while (i < n) {
                unsigned char d = static_cast<unsigned char>(text[i]);
                if (is_space(d) || is_punct(d)) break;
                ++i;
            }
            emit(i);
        }
    }
}

} // namespace

int count_tokens(std::string_view text, const std::string& scheme) {
    Scheme s = resolve(scheme);
    int count = 0;
    scan_tokens(text, s, [&](size_t) { ++count; });
    return count;
}

std::vector<size_t> token_end_offsets(std::string_view text, const std::string& scheme) {
    Scheme s = resolve(scheme);
    std::vector<size_t> ends;
    scan_tokens(text, s, [&](size_t end) { ends.push_back(end); });
    return ends;
}

std::string truncate_at_token(std::string_view text, int max_tokens, const std::string& scheme) {
    if (max_tokens <= 0) return "";
    auto ends = token_end_offsets(text, scheme);
    if (static_cast<int>(ends.size()) <= max_tokens) return std::string(text);
    return std::string(text.substr(0, ends[static_cast<size_t>(max_tokens) - 1]));
}

} // namespace docrag
