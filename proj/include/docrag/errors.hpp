#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace docrag {

// Structurally broken input (bad PDF syntax, missing page tree, ...).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, size_t byte_offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    size_t byte_offset() const { return byte_offset_; }

private:
    size_t byte_offset_;
};

// Well-formed input the toolkit deliberately does not handle
// (encrypted PDFs, scanned image-only pages).
class UnsupportedInputError : public std::runtime_error {
public:
    explicit UnsupportedInputError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace docrag
