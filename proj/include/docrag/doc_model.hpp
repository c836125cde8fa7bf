#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace docrag {

// Page coordinates in points, origin top-left, y grows downward.
struct BoundingBox {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double cx() const { return 0.5 * (x0 + x1); }
    double cy() const { return 0.5 * (y0 + y1); }

    bool valid() const {
        return std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) &&
               std::isfinite(y1) && x0 >= 0.0 && y0 >= 0.0 && x0 <= x1 && y0 <= y1;
    }

    static BoundingBox join(const BoundingBox& a, const BoundingBox& b) {
        return {std::min(a.x0, b.x0), std::min(a.y0, b.y0),
                std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
    }
};

// One positioned character.
struct Glyph {
    std::string text;       // one codepoint, UTF-8
    BoundingBox bbox;
    double font_size = 0.0; // points
    int page = 0;           // 0-based
};

// A visual text line: glyphs sorted by x0, bbox is their union.
struct TextLine {
    std::vector<Glyph> glyphs;
    BoundingBox bbox;
    double baseline_y = 0.0;

    double font_size() const {
        return glyphs.empty() ? 0.0 : glyphs.front().font_size;
    }
};

struct TableCell {
    int row = 0;
    int col = 0;
    int row_span = 1;
    int col_span = 1;
    std::string text;
    BoundingBox bbox;
};

struct Table {
    std::vector<TableCell> cells;
    int n_rows = 1;
    int n_cols = 1;
    std::optional<std::string> title;
    BoundingBox bbox;
    std::vector<int> pages; // contiguous, ascending
};

enum class BlockKind {
    paragraph,
    table,
    heading,
    page_header,
    page_footer,
    figure_caption,
};

const char* to_string(BlockKind kind);
std::optional<BlockKind> block_kind_from_string(const std::string& s);

struct Block {
    BlockKind kind = BlockKind::paragraph;
    std::string text;                  // empty for kind=table
    std::optional<Table> table;        // present iff kind=table
    std::optional<int> heading_level;  // present iff kind=heading
    BoundingBox bbox;
    int page = 0;
    int order = 0; // unique reading-order index within the document
};

struct Document {
    std::vector<Block> blocks; // sorted strictly by order
    int page_count = 1;
    std::string source_id;
};

// Returns one human-readable description per broken invariant; empty means
// the document is valid. Violations name the offending block's order index.
std::vector<std::string> validate_document(const Document& doc);

// Table-only check used by both validate_document and the serializer:
// cell rectangles must tile the n_rows x n_cols grid exactly once.
std::vector<std::string> validate_table(const Table& table, const std::string& where);

} // namespace docrag
