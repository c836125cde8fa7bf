#include "docrag/doc_model.hpp"

#include <set>
#include <sstream>

namespace docrag {

const char* to_string(BlockKind kind) {
    switch (kind) {
        case BlockKind::paragraph: return "paragraph";
        case BlockKind::table: return "table";
        case BlockKind::heading: return "heading";
        case BlockKind::page_header: return "page_header";
        case BlockKind::page_footer: return "page_footer";
        case BlockKind::figure_caption: return "figure_caption";
    }
    return "paragraph";
}

std::optional<BlockKind> block_kind_from_string(const std::string& s) {
    if (s == "paragraph") return BlockKind::paragraph;
    if (s == "table") return BlockKind::table;
    if (s == "heading") return BlockKind::heading;
    if (s == "page_header") return BlockKind::page_header;
    if (s == "page_footer") return BlockKind::page_footer;
    if (s == "figure_caption") return BlockKind::figure_caption;
    return std::nullopt;
}

std::vector<std::string> validate_table(const Table& table, const std::string& where) {
    std::vector<std::string> out;
    auto bad = [&](const std::string& msg) { out.push_back(where + ": " + msg); };

    if (table.n_rows < 1 || table.n_cols < 1) {
        bad("table grid must be at least 1x1");
        return out;
    }
    if (!table.bbox.valid()) bad("table bbox invalid");

    // pages contiguous and ascending
    for (size_t i = 0; i + 1 < table.pages.size(); ++i) {
        if (table.pages[i + 1] != table.pages[i] + 1) {
            bad("table pages not contiguous ascending");
            break;
        }
    }

    // cover[r][c] counts how many cell rectangles claim each slot
    std::vector<int> cover(static_cast<size_t>(table.n_rows) * table.n_cols, 0);
    for (const auto& cell : table.cells) {
        if (cell.row_span < 1 || cell.col_span < 1) {
            bad("cell span must be >= 1");
            continue;
        }
        if (cell.row < 0 || cell.col < 0 || cell.row + cell.row_span > table.n_rows ||
            cell.col + cell.col_span > table.n_cols) {
            bad("cell rectangle exceeds table grid");
            continue;
        }
        for (int r = cell.row; r < cell.row + cell.row_span; ++r)
            for (int c = cell.col; c < cell.col + cell.col_span; ++c)
                ++cover[static_cast<size_t>(r) * table.n_cols + c];
    }
    bool overlap = false, gap = false;
    for (int n : cover) {
        if (n > 1) overlap = true;
        if (n == 0) gap = true;
    }
    if (overlap) bad("cell rectangles overlap");
    if (gap) bad("cell rectangles do not cover the full grid");
    return out;
}

std::vector<std::string> validate_document(const Document& doc) {
    std::vector<std::string> out;

    if (doc.page_count < 1) out.push_back("document: page_count must be >= 1");

    std::set<int> seen_orders;
    int prev_order = -1;
    bool first = true;
    for (const auto& block : doc.blocks) {
        std::ostringstream label;
        label << "block order=" << block.order;
        const std::string where = label.str();
        auto bad = [&](const std::string& msg) { out.push_back(where + ": " + msg); };

        if (block.order < 0) bad("order must be >= 0");
        if (!seen_orders.insert(block.order).second) bad("duplicate order");
        if (!first && block.order <= prev_order) bad("blocks not sorted strictly by order");
        prev_order = block.order;
        first = false;

        if (block.page < 0 || block.page >= doc.page_count) bad("page out of range");
        if (!block.bbox.valid()) bad("bbox invalid");

        const bool is_table = block.kind == BlockKind::table;
        if (is_table) {
            if (!block.table) bad("table block missing table payload");
            if (!block.text.empty()) bad("table block must have empty text");
        } else {
            if (block.table) bad("non-table block carries a table payload");
        }
        if (block.kind == BlockKind::heading) {
            if (!block.heading_level) bad("heading block missing heading_level");
            else if (*block.heading_level < 1) bad("heading_level must be >= 1");
        } else if (block.heading_level) {
            bad("non-heading block carries heading_level");
        }
        if (block.table) {
            auto t = validate_table(*block.table, where);
            out.insert(out.end(), t.begin(), t.end());
            for (int p : block.table->pages)
                if (p < 0 || p >= doc.page_count) bad("table page out of range");
        }
    }
    return out;
}

} // namespace docrag
