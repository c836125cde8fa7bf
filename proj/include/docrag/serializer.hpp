#pragma once

#include <string>

#include "docrag/doc_model.hpp"

namespace docrag {

struct RenderedTable {
    std::string markdown;
    int duplicated_cells = 0; // grid slots filled by span duplication
};

// Pipe-table markdown; row 0 is the header, followed by a separator row.
// A merged cell's text is duplicated into every grid slot it covers.
// Throws std::invalid_argument if the table violates the grid-cover invariant.
RenderedTable table_to_markdown(const Table& table);

// Chunk-ready text of a block. Paragraphs and headings collapse internal
// line breaks to spaces; tables render as markdown (title included);
// page headers/footers yield "".
std::string block_to_text(const Block& block);

// Lossless JSON round-trip of the document model. Serialization is
// canonical (sorted keys, stable number formatting); loading a document
// with schema violations throws std::runtime_error naming the JSON path.
std::string document_to_json(const Document& doc);
Document document_from_json(const std::string& bytes);

// Self-contained HTML with rowspan/colspan preserved on table cells.
std::string document_to_html(const Document& doc);

} // namespace docrag
