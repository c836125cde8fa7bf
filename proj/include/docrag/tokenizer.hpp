#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace docrag {

// Registered counting schemes:
//   "words" (default): whitespace-delimited words, each punctuation character
//                      is a standalone token ("cargo volume." -> 3)
//   "chars":           non-whitespace characters
// Unknown scheme names throw std::invalid_argument.
int count_tokens(std::string_view text, const std::string& scheme = "words");

// Byte offset one past the end of each token, in order. Used for truncating
// text at a token boundary.
std::vector<size_t> token_end_offsets(std::string_view text, const std::string& scheme = "words");

// Longest prefix of `text` containing at most `max_tokens` tokens.
std::string truncate_at_token(std::string_view text, int max_tokens,
                              const std::string& scheme = "words");

} // namespace docrag
