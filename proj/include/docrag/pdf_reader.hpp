#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "docrag/doc_model.hpp"
#include "docrag/errors.hpp"

namespace docrag::pdf {

// Glyph metrics for the fixed-advance font model. Real font programs carry
// per-glyph widths; this reader approximates every glyph by the same
// fraction of the font size, which is exact for the monospaced fixtures
// this toolkit targets and a reasonable estimate elsewhere.
inline constexpr double kAdvanceFactor = 0.5;
inline constexpr double kAscentFactor = 0.8;
inline constexpr double kDescentFactor = 0.2;

// Axis-aligned vector ruling in top-left page coordinates.
struct Segment {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    bool horizontal() const { return (y1 - y0) <= (x1 - x0); }
    double length() const { return horizontal() ? x1 - x0 : y1 - y0; }
};

struct PdfPage {
    double width = 612;
    double height = 792;
    std::vector<Glyph> glyphs;     // PDF storage order, NOT reading order
    std::vector<Segment> rulings;
    bool has_image = false;
};

// Parses a text-based PDF. Coordinates are flipped to top-left origin.
// Throws ParseError on malformed bytes (with a byte offset) and
// UnsupportedInputError for encrypted files and scanned (image-only) pages.
std::vector<PdfPage> read_pages(std::string_view bytes);

// Serializes glyphs in storage order: consecutive glyphs on one baseline
// form a line ended with '\n', spaces inserted at word gaps. This is the
// flat-baseline ingest text and deliberately inherits storage-order
// artifacts.
std::string flat_text(const std::vector<PdfPage>& pages);

} // namespace docrag::pdf
