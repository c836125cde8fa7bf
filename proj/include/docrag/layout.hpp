#pragma once

#include <optional>
#include <string>
#include <vector>

#include "docrag/doc_model.hpp"
#include "docrag/pdf_reader.hpp"

namespace docrag {

// Geometric thresholds; the fractions are relative to the quantity named.
struct LayoutConfig {
    double line_merge_tolerance = 0.5;     // fraction of font_size
    double column_gap_min = 18.0;          // points
    double para_gap_factor = 1.4;          // multiple of line height
    double ruling_min_length = 0.5;        // fraction of table width
    double header_footer_band = 0.08;      // fraction of page height
    double header_footer_repeat_min = 0.5; // fraction of pages
    double alignment_cluster_tolerance = 4.0; // points
};

// Glyphs on one page clustered into visual lines; baselines within
// line_merge_tolerance x font_size share a line.
std::vector<TextLine> build_lines(const std::vector<Glyph>& glyphs, const LayoutConfig& cfg);

// Recursive XY-cut: indices into `lines`, grouped into column-consistent
// runs, emitted top-to-bottom and left-to-right within a horizontal band.
std::vector<std::vector<size_t>> detect_reading_order(const std::vector<TextLine>& lines,
                                                      const LayoutConfig& cfg);

// A table candidate: line indices plus the geometry needed downstream.
struct TableRegion {
    std::vector<size_t> line_indices; // into the page's line list
    BoundingBox bbox;
    std::vector<pdf::Segment> rulings; // rulings inside the region
    bool ruled = false;                // found via ruling grid (vs alignment)
};

std::vector<TableRegion> detect_tables(const std::vector<TextLine>& lines,
                                       const std::vector<pdf::Segment>& rulings,
                                       const LayoutConfig& cfg);

// Recovered grid plus the column boundaries used for cross-page matching.
struct RecognizedTable {
    Table table;
    std::vector<double> column_boundaries;
};

// Throws std::runtime_error for regions whose clusters yield an empty grid;
// callers demote such regions to paragraphs.
RecognizedTable recognize_table_structure(const std::vector<TextLine>& lines,
                                          const TableRegion& region, const LayoutConfig& cfg);

struct HeaderFooterMarks {
    // per page: indices of lines classified as header / footer
    std::vector<std::vector<size_t>> header_lines;
    std::vector<std::vector<size_t>> footer_lines;
};

HeaderFooterMarks detect_headers_footers(const std::vector<std::vector<TextLine>>& pages,
                                         const std::vector<double>& page_heights,
                                         const LayoutConfig& cfg);

// Whole-pipeline entry points.
Document parse_document(const std::vector<pdf::PdfPage>& pages, const LayoutConfig& cfg,
                        const std::string& source_id);
Document parse_pdf(std::string_view pdf_bytes, const LayoutConfig& cfg,
                   const std::string& source_id);

// Per-page overlay of block rectangles for visual debugging.
std::string document_to_svg(const Document& doc, const std::vector<pdf::PdfPage>& pages);

// Text of a line: glyphs in x order, spaces at word gaps.
std::string line_text(const TextLine& line);

} // namespace docrag
