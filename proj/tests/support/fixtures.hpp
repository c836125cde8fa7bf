#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "docrag/doc_model.hpp"
#include "support/pdf_builder.hpp"

namespace testsupport {

// Deterministic PDF fixtures used across the layout, chunking and CLI
// suites. Each returns a fully built PdfBuilder so tests can inspect the
// expected glyphs alongside the bytes.

// One column: a large heading followed by two paragraphs.
PdfBuilder fixture_single_column();

// Mixed page: top heading (written last in storage order), a titled,
// partially ruled table (outer border plus one header rule), a note
// paragraph, then two columns of prose whose sentence continues from the
// left column into the right one.
PdfBuilder fixture_case1();

// Two pages: a titled borderless four-column table that starts near the
// bottom of page one and continues at the top of page two.
PdfBuilder fixture_case2();

// Three pages sharing a repeated header line and "Page N" footers.
PdfBuilder fixture_headers_footers();

// A page containing only an image.
PdfBuilder fixture_scanned();

// Bytes of a file whose trailer declares encryption.
std::string fixture_encrypted_bytes();

// A fully ruled grid with randomly merged rectangular cell groups, plus
// the table the recognizer is expected to recover. Merge layouts that
// would leave an interior grid boundary without a long ruling are
// resampled, since such boundaries are genuinely ambiguous.
struct GeneratedGrid {
    PdfBuilder pdf;
    docrag::Table expected; // cells in row-major (row, col) anchor order
};
GeneratedGrid make_ruled_grid(std::uint64_t seed);

} // namespace testsupport
