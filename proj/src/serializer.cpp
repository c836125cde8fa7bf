#include "docrag/serializer.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace docrag {

namespace {

using nlohmann::json;

std::string escape_cell(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '|') out += "\\|";
        else if (c == '\n' || c == '\r') out += ' ';
        else out += c;
    }
    return out;
}

std::string collapse_newlines(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) out += (c == '\n' || c == '\r') ? ' ' : c;
    return out;
}

std::string html_escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
    throw std::runtime_error("document schema violation at " + path + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(path + "." + key, "missing required field");
    return *it;
}

BoundingBox bbox_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 4) schema_error(path, "bbox must be an array of 4 numbers");
    for (const auto& v : j)
        if (!v.is_number()) schema_error(path, "bbox must be an array of 4 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json bbox_to_json(const BoundingBox& b) {
    return json::array({b.x0, b.y0, b.x1, b.y1});
}

json table_to_json_obj(const Table& t) {
    json cells = json::array();
    for (const auto& c : t.cells) {
        cells.push_back({{"row", c.row},
                         {"col", c.col},
                         {"row_span", c.row_span},
                         {"col_span", c.col_span},
                         {"text", c.text},
                         {"bbox", bbox_to_json(c.bbox)}});
    }
    json out = {{"n_rows", t.n_rows},
                {"n_cols", t.n_cols},
                {"cells", std::move(cells)},
                {"bbox", bbox_to_json(t.bbox)},
                {"pages", t.pages}};
    if (t.title) out["title"] = *t.title;
    return out;
}

Table table_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) schema_error(path, "table must be an object");
    Table t;
    t.n_rows = require(j, "n_rows", path).get<int>();
    t.n_cols = require(j, "n_cols", path).get<int>();
    if (auto it = j.find("title"); it != j.end() && !it->is_null())
        t.title = it->get<std::string>();
    if (auto it = j.find("bbox"); it != j.end()) t.bbox = bbox_from_json(*it, path + ".bbox");
    if (auto it = j.find("pages"); it != j.end()) {
        if (!it->is_array()) schema_error(path + ".pages", "must be an array");
        for (const auto& p : *it) t.pages.push_back(p.get<int>());
    }
    const json& cells = require(j, "cells", path);
    if (!cells.is_array()) schema_error(path + ".cells", "must be an array");
    for (size_t i = 0; i < cells.size(); ++i) {
        const std::string cpath = path + ".cells[" + std::to_string(i) + "]";
        const json& cj = cells[i];
        if (!cj.is_object()) schema_error(cpath, "cell must be an object");
        TableCell c;
        c.row = require(cj, "row", cpath).get<int>();
        c.col = require(cj, "col", cpath).get<int>();
        c.row_span = require(cj, "row_span", cpath).get<int>();
        c.col_span = require(cj, "col_span", cpath).get<int>();
        c.text = require(cj, "text", cpath).get<std::string>();
        if (auto it = cj.find("bbox"); it != cj.end())
            c.bbox = bbox_from_json(*it, cpath + ".bbox");
        t.cells.push_back(std::move(c));
    }
    return t;
}

// Fill an n_rows x n_cols slot matrix from the cell list. Throws on
// overlap or uncovered slots.
std::vector<std::string> fill_slots(const Table& table) {
    auto violations = validate_table(table, "table");
    if (!violations.empty()) throw std::invalid_argument("invalid table: " + violations.front());
    std::vector<std::string> slots(static_cast<size_t>(table.n_rows) * table.n_cols);
    for (const auto& cell : table.cells)
        for (int r = cell.row; r < cell.row + cell.row_span; ++r)
            for (int c = cell.col; c < cell.col + cell.col_span; ++c)
                slots[static_cast<size_t>(r) * table.n_cols + c] = cell.text;
    return slots;
}

} // namespace

RenderedTable table_to_markdown(const Table& table) {
    const auto slots = fill_slots(table);
    RenderedTable out;
    std::ostringstream md;
    if (table.title) md << *table.title << "\n";
    for (int r = 0; r < table.n_rows; ++r) {
        md << "|";
        for (int c = 0; c < table.n_cols; ++c)
            md << " " << escape_cell(slots[static_cast<size_t>(r) * table.n_cols + c]) << " |";
        md << "\n";
        if (r == 0) {
            md << "|";
            for (int c = 0; c < table.n_cols; ++c) md << " --- |";
            md << "\n";
        }
    }
    out.markdown = md.str();
    for (const auto& cell : table.cells)
        out.duplicated_cells += cell.row_span * cell.col_span - 1;
    return out;
}

std::string block_to_text(const Block& block) {
    switch (block.kind) {
        case BlockKind::page_header:
        case BlockKind::page_footer:
            return "";
        case BlockKind::table:
            return block.table ? table_to_markdown(*block.table).markdown : "";
        default:
            return collapse_newlines(block.text);
    }
}

std::string document_to_json(const Document& doc) {
    json blocks = json::array();
    for (const auto& b : doc.blocks) {
        json jb = {{"kind", to_string(b.kind)},
                   {"order", b.order},
                   {"page", b.page},
                   {"bbox", bbox_to_json(b.bbox)}};
        if (b.kind == BlockKind::table) {
            if (b.table) jb["table"] = table_to_json_obj(*b.table);
        } else {
            jb["text"] = b.text;
        }
        if (b.heading_level) jb["heading_level"] = *b.heading_level;
        blocks.push_back(std::move(jb));
    }
    json out = {{"source_id", doc.source_id},
                {"page_count", doc.page_count},
                {"blocks", std::move(blocks)}};
    return out.dump(2) + "\n";
}

Document document_from_json(const std::string& bytes) {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("document JSON parse error: ") + e.what());
    }
    if (!j.is_object()) schema_error("$", "top level must be an object");
    Document doc;
    doc.source_id = require(j, "source_id", "$").get<std::string>();
    doc.page_count = require(j, "page_count", "$").get<int>();
    if (doc.page_count < 1) schema_error("$.page_count", "must be at least 1");
    const json& blocks = require(j, "blocks", "$");
    if (!blocks.is_array()) schema_error("$.blocks", "must be an array");
    for (size_t i = 0; i < blocks.size(); ++i) {
        const std::string path = "blocks[" + std::to_string(i) + "]";
        const json& jb = blocks[i];
        if (!jb.is_object()) schema_error(path, "block must be an object");
        Block b;
        const std::string kind_str = require(jb, "kind", path).get<std::string>();
        auto kind = block_kind_from_string(kind_str);
        if (!kind) schema_error(path + ".kind", "unknown block kind '" + kind_str + "'");
        b.kind = *kind;
        const json& jorder = require(jb, "order", path);
        if (!jorder.is_number_integer()) schema_error(path + ".order", "must be an integer");
        b.order = jorder.get<int>();
        b.page = require(jb, "page", path).get<int>();
        b.bbox = bbox_from_json(require(jb, "bbox", path), path + ".bbox");
        if (b.kind == BlockKind::table) {
            b.table = table_from_json(require(jb, "table", path), path + ".table");
        } else {
            b.text = require(jb, "text", path).get<std::string>();
        }
        if (auto it = jb.find("heading_level"); it != jb.end() && !it->is_null())
            b.heading_level = it->get<int>();
        doc.blocks.push_back(std::move(b));
    }
    return doc;
}

std::string document_to_html(const Document& doc) {
    std::ostringstream html;
    html << "<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"><title>"
         << html_escape(doc.source_id) << "</title></head>\n<body>\n";
    for (const auto& b : doc.blocks) {
        switch (b.kind) {
            case BlockKind::heading: {
                int level = std::min(b.heading_level.value_or(1), 6);
                html << "<h" << level << ">" << html_escape(collapse_newlines(b.text))
                     << "</h" << level << ">\n";
                break;
            }
            case BlockKind::page_header:
                html << "<header>" << html_escape(b.text) << "</header>\n";
                break;
            case BlockKind::page_footer:
                html << "<footer>" << html_escape(b.text) << "</footer>\n";
                break;
            case BlockKind::figure_caption:
                html << "<figcaption>" << html_escape(collapse_newlines(b.text))
                     << "</figcaption>\n";
                break;
            case BlockKind::table: {
                if (!b.table) break;
                const Table& t = *b.table;
                if (t.title) html << "<p class=\"table-title\">" << html_escape(*t.title) << "</p>\n";
                html << "<table>\n";
                // cells grouped by starting row; spans carried as attributes
                std::vector<std::vector<const TableCell*>> rows(static_cast<size_t>(t.n_rows));
                for (const auto& c : t.cells)
                    if (c.row >= 0 && c.row < t.n_rows) rows[static_cast<size_t>(c.row)].push_back(&c);
                for (auto& row : rows) {
                    std::sort(row.begin(), row.end(),
                              [](const TableCell* a, const TableCell* b) { return a->col < b->col; });
                    html << "<tr>";
                    for (const TableCell* c : row) {
                        html << "<td";
                        if (c->row_span > 1) html << " rowspan=\"" << c->row_span << "\"";
                        if (c->col_span > 1) html << " colspan=\"" << c->col_span << "\"";
                        html << ">" << html_escape(c->text) << "</td>";
                    }
                    html << "</tr>\n";
                }
                html << "</table>\n";
                break;
            }
            case BlockKind::paragraph:
                html << "<p>" << html_escape(collapse_newlines(b.text)) << "</p>\n";
                break;
        }
    }
    html << "</body>\n</html>\n";
    return html.str();
}

} // namespace docrag
