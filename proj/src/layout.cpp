#include "docrag/layout.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace docrag {

namespace {

double glyph_baseline(const Glyph& g) {
    return g.bbox.y0 + pdf::kAscentFactor * (g.bbox.y1 - g.bbox.y0) /
                           (pdf::kAscentFactor + pdf::kDescentFactor);
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

// Gaps in the 1-D projection of [lo,hi) intervals, returned as (start, end).
std::vector<std::pair<double, double>> projection_gaps(std::vector<std::pair<double, double>> iv) {
    std::vector<std::pair<double, double>> gaps;
    if (iv.empty()) return gaps;
    std::sort(iv.begin(), iv.end());
    double cover_end = iv.front().second;
    for (size_t i = 1; i < iv.size(); ++i) {
        if (iv[i].first > cover_end) gaps.push_back({cover_end, iv[i].first});
        cover_end = std::max(cover_end, iv[i].second);
    }
    return gaps;
}

// x positions where a new glyph run starts within a line, using a gap
// threshold of one font size (word spaces are half that).
std::vector<double> segment_starts(const TextLine& line) {
    std::vector<double> starts;
    double prev_x1 = -1e30;
    double prev_size = 0;
    for (const auto& g : line.glyphs) {
        if (starts.empty() || g.bbox.x0 - prev_x1 > std::max(prev_size, g.font_size)) {
            starts.push_back(g.bbox.x0);
        }
        prev_x1 = g.bbox.x1;
        prev_size = g.font_size;
    }
    return starts;
}

struct LineSegment {
    double x0, x1;
    std::vector<const Glyph*> glyphs;
};

std::vector<LineSegment> line_segments(const TextLine& line) {
    std::vector<LineSegment> segs;
    double prev_x1 = -1e30;
    double prev_size = 0;
    for (const auto& g : line.glyphs) {
        if (segs.empty() || g.bbox.x0 - prev_x1 > std::max(prev_size, g.font_size))
            segs.push_back({g.bbox.x0, g.bbox.x1, {}});
        segs.back().glyphs.push_back(&g);
        segs.back().x1 = g.bbox.x1;
        prev_x1 = g.bbox.x1;
        prev_size = g.font_size;
    }
    return segs;
}

std::string glyphs_to_text(const std::vector<const Glyph*>& glyphs) {
    std::string out;
    double prev_x1 = 0, prev_size = 0, prev_baseline = -1e30;
    bool open = false;
    for (const Glyph* g : glyphs) {
        double baseline = glyph_baseline(*g);
        if (open && std::abs(baseline - prev_baseline) > 0.25 * g->font_size) {
            out += ' ';
        } else if (open && g->bbox.x0 - prev_x1 > 0.25 * prev_size) {
            out += ' ';
        }
        out += g->text;
        prev_x1 = g->bbox.x1;
        prev_size = g->font_size;
        prev_baseline = baseline;
        open = true;
    }
    return out;
}

bool starts_with_word(const std::string& text, const std::string& word) {
    if (text.size() < word.size() || text.compare(0, word.size(), word) != 0) return false;
    if (text.size() == word.size()) return true;
    unsigned char next = static_cast<unsigned char>(text[word.size()]);
    return !(std::isalnum(next) != 0);
}

bool looks_like_table_title(const std::string& text) {
    return starts_with_word(text, "Table") || starts_with_word(text, "表");
}

bool looks_like_caption(const std::string& text) {
    return starts_with_word(text, "Figure") || starts_with_word(text, "Fig.") ||
           starts_with_word(text, "图");
}

bool ends_like_sentence(const std::string& text) {
    for (auto it = text.rbegin(); it != text.rend(); ++it) {
        unsigned char c = static_cast<unsigned char>(*it);
        if (std::isspace(c)) continue;
        return c == '.' || c == '!' || c == '?';
    }
    return false;
}

bool has_terminal_punctuation(const std::string& text) {
    for (auto it = text.rbegin(); it != text.rend(); ++it) {
        unsigned char c = static_cast<unsigned char>(*it);
        if (std::isspace(c)) continue;
        return c == '.' || c == '!' || c == '?' || c == ':' || c == ';';
    }
    return true; // empty text does not ask for continuation
}

bool starts_lowercase(const std::string& text) {
    for (unsigned char c : text) {
        if (std::isspace(c)) continue;
        return std::islower(c) != 0;
    }
    return false;
}

} // namespace

std::string line_text(const TextLine& line) {
    std::vector<const Glyph*> ptrs;
    ptrs.reserve(line.glyphs.size());
    for (const auto& g : line.glyphs) ptrs.push_back(&g);
    return glyphs_to_text(ptrs);
}

std::vector<TextLine> build_lines(const std::vector<Glyph>& glyphs, const LayoutConfig& cfg) {
    std::vector<TextLine> lines;
    std::vector<size_t> idx(glyphs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        double ba = glyph_baseline(glyphs[a]), bb = glyph_baseline(glyphs[b]);
        if (ba != bb) return ba < bb;
        return glyphs[a].bbox.x0 < glyphs[b].bbox.x0;
    });
    for (size_t i : idx) {
        const Glyph& g = glyphs[i];
        double baseline = glyph_baseline(g);
        if (!lines.empty() &&
            std::abs(baseline - lines.back().baseline_y) <=
                cfg.line_merge_tolerance * g.font_size) {
            lines.back().glyphs.push_back(g);
            lines.back().bbox = BoundingBox::join(lines.back().bbox, g.bbox);
        } else {
            TextLine line;
            line.glyphs.push_back(g);
            line.bbox = g.bbox;
            line.baseline_y = baseline;
            lines.push_back(std::move(line));
        }
    }
    for (auto& line : lines)
        std::stable_sort(line.glyphs.begin(), line.glyphs.end(),
                         [](const Glyph& a, const Glyph& b) { return a.bbox.x0 < b.bbox.x0; });
    return lines;
}

std::vector<std::vector<size_t>> detect_reading_order(const std::vector<TextLine>& lines,
                                                      const LayoutConfig& cfg) {
    std::vector<std::vector<size_t>> regions;
    if (lines.empty()) return regions;

    std::vector<double> heights;
    for (const auto& l : lines) heights.push_back(l.bbox.height());
    const double h_threshold = std::max(cfg.para_gap_factor * median(heights), 4.0);

    // recursive XY-cut over index sets
    std::function<void(std::vector<size_t>)> cut = [&](std::vector<size_t> ids) {
        if (ids.empty()) return;
        if (ids.size() > 1) {
            // horizontal whitespace bands across the region width
            std::vector<std::pair<double, double>> yiv;
            for (size_t i : ids) yiv.push_back({lines[i].bbox.y0, lines[i].bbox.y1});
            auto gaps = projection_gaps(yiv);
            double best_width = 0, best_split = 0;
            for (auto& g : gaps) {
                double w = g.second - g.first;
                if (w >= h_threshold && w > best_width) {
                    best_width = w;
                    best_split = 0.5 * (g.first + g.second);
                }
            }
            if (best_width > 0) {
                std::vector<size_t> top, bottom;
                for (size_t i : ids)
                    (lines[i].bbox.cy() < best_split ? top : bottom).push_back(i);
                cut(std::move(top));
                cut(std::move(bottom));
                return;
            }
            // vertical whitespace gaps -> column split, left to right
            std::vector<std::pair<double, double>> xiv;
            for (size_t i : ids) xiv.push_back({lines[i].bbox.x0, lines[i].bbox.x1});
            auto vgaps = projection_gaps(xiv);
            std::vector<double> splits;
            for (auto& g : vgaps)
                if (g.second - g.first >= cfg.column_gap_min)
                    splits.push_back(0.5 * (g.first + g.second));
            if (!splits.empty()) {
                std::vector<std::vector<size_t>> columns(splits.size() + 1);
                for (size_t i : ids) {
                    double x = lines[i].bbox.cx();
                    size_t col = std::upper_bound(splits.begin(), splits.end(), x) - splits.begin();
                    columns[col].push_back(i);
                }
                for (auto& col : columns) cut(std::move(col));
                return;
            }
        }
        std::sort(ids.begin(), ids.end(), [&](size_t a, size_t b) {
            if (lines[a].baseline_y != lines[b].baseline_y)
                return lines[a].baseline_y < lines[b].baseline_y;
            return lines[a].bbox.x0 < lines[b].bbox.x0;
        });
        regions.push_back(std::move(ids));
    };

    std::vector<size_t> all(lines.size());
    std::iota(all.begin(), all.end(), 0);
    cut(std::move(all));
    return regions;
}

std::vector<TableRegion> detect_tables(const std::vector<TextLine>& lines,
                                       const std::vector<pdf::Segment>& rulings,
                                       const LayoutConfig& cfg) {
    std::vector<TableRegion> candidates;
    std::vector<bool> claimed(lines.size(), false);

    // (a) ruling clusters: union-find over segments whose inflated boxes touch
    const size_t n = rulings.size();
    std::vector<size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<size_t(size_t)> find = [&](size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    auto touches = [](const pdf::Segment& a, const pdf::Segment& b) {
        const double pad = 3.0;
        return a.x0 - pad <= b.x1 && b.x0 - pad <= a.x1 && a.y0 - pad <= b.y1 &&
               b.y0 - pad <= a.y1;
    };
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (touches(rulings[i], rulings[j])) parent[find(i)] = find(j);

    std::map<size_t, std::vector<size_t>> groups;
    for (size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);

    for (auto& [root, members] : groups) {
        BoundingBox box{rulings[members[0]].x0, rulings[members[0]].y0, rulings[members[0]].x1,
                        rulings[members[0]].y1};
        for (size_t i : members)
            box = BoundingBox::join(box, {rulings[i].x0, rulings[i].y0, rulings[i].x1,
                                          rulings[i].y1});
        int long_horizontals = 0;
        for (size_t i : members)
            if (rulings[i].horizontal() &&
                rulings[i].length() >= cfg.ruling_min_length * box.width())
                ++long_horizontals;
        if (long_horizontals < 2) continue;

        TableRegion region;
        region.ruled = true;
        region.bbox = box;
        for (size_t i : members) region.rulings.push_back(rulings[i]);
        const double pad = 2.0;
        for (size_t li = 0; li < lines.size(); ++li) {
            const auto& b = lines[li].bbox;
            if (b.cx() >= box.x0 - pad && b.cx() <= box.x1 + pad && b.cy() >= box.y0 - pad &&
                b.cy() <= box.y1 + pad) {
                region.line_indices.push_back(li);
                claimed[li] = true;
            }
        }
        if (!region.line_indices.empty()) candidates.push_back(std::move(region));
    }

    // (b) borderless: runs of >=3 baseline-consecutive lines sharing aligned
    // segment starts. The leftmost start is shared by all prose, so at least
    // two further shared clusters are required.
    std::vector<size_t> order;
    for (size_t i = 0; i < lines.size(); ++i)
        if (!claimed[i]) order.push_back(i);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return lines[a].baseline_y < lines[b].baseline_y; });

    const double tol = cfg.alignment_cluster_tolerance;
    size_t run_start = 0;
    std::vector<double> shared;
    auto flush_run = [&](size_t run_end) { // [run_start, run_end)
        if (run_end - run_start >= 3 && shared.size() >= 3) {
            TableRegion region;
            region.ruled = false;
            BoundingBox box = lines[order[run_start]].bbox;
            for (size_t k = run_start; k < run_end; ++k) {
                region.line_indices.push_back(order[k]);
                box = BoundingBox::join(box, lines[order[k]].bbox);
            }
            region.bbox = box;
            candidates.push_back(std::move(region));
        }
    };
    for (size_t k = 0; k < order.size(); ++k) {
        auto starts = segment_starts(lines[order[k]]);
        bool extends = false;
        if (k > run_start) {
            const auto& prev = lines[order[k - 1]];
            const auto& curr = lines[order[k]];
            if (curr.baseline_y - prev.baseline_y <= 3.0 * std::max(prev.bbox.height(), 1.0)) {
                std::vector<double> matched;
                for (double s : shared)
                    for (double t : starts)
                        if (std::abs(s - t) <= tol) {
                            matched.push_back(0.5 * (s + t));
                            break;
                        }
                if (matched.size() >= 3) {
                    shared = std::move(matched);
                    extends = true;
                }
            }
        }
        if (k == run_start) {
            shared = starts;
        } else if (!extends) {
            flush_run(k);
            run_start = k;
            shared = starts;
        }
    }
    flush_run(order.size());

    std::sort(candidates.begin(), candidates.end(), [](const TableRegion& a, const TableRegion& b) {
        if (a.bbox.y0 != b.bbox.y0) return a.bbox.y0 < b.bbox.y0;
        return a.bbox.x0 < b.bbox.x0;
    });
    return candidates;
}

namespace {

std::vector<double> cluster_positions(std::vector<double> xs, double tol) {
    std::sort(xs.begin(), xs.end());
    std::vector<double> centers;
    size_t i = 0;
    while (i < xs.size()) {
        size_t j = i;
        double sum = 0;
        while (j < xs.size() && xs[j] - xs[i] <= tol) sum += xs[j++];
        centers.push_back(sum / static_cast<double>(j - i));
        i = j;
    }
    return centers;
}

RecognizedTable recognize_ruled(const std::vector<TextLine>& lines, const TableRegion& region,
                                const std::vector<double>& row_bounds,
                                const std::vector<double>& col_bounds, const LayoutConfig&) {
    const int n_rows = static_cast<int>(row_bounds.size()) - 1;
    const int n_cols = static_cast<int>(col_bounds.size()) - 1;

    // separator presence between adjacent slots
    auto h_sep = [&](int boundary, int col) {
        double y = row_bounds[static_cast<size_t>(boundary)];
        double xm = 0.5 * (col_bounds[static_cast<size_t>(col)] +
                           col_bounds[static_cast<size_t>(col) + 1]);
        for (const auto& s : region.rulings)
            if (s.horizontal() && std::abs(s.y0 - y) <= 2.0 && s.x0 <= xm && s.x1 >= xm)
                return true;
        return false;
    };
    auto v_sep = [&](int boundary, int row) {
        double x = col_bounds[static_cast<size_t>(boundary)];
        double ym = 0.5 * (row_bounds[static_cast<size_t>(row)] +
                           row_bounds[static_cast<size_t>(row) + 1]);
        for (const auto& s : region.rulings)
            if (!s.horizontal() && std::abs(s.x0 - x) <= 2.0 && s.y0 <= ym && s.y1 >= ym)
                return true;
        return false;
    };

    // grow maximal rectangles of slots not separated by rulings
    std::vector<bool> used(static_cast<size_t>(n_rows) * n_cols, false);
    auto at = [&](int r, int c) -> std::vector<bool>::reference {
        return used[static_cast<size_t>(r) * n_cols + c];
    };
    Table table;
    table.n_rows = n_rows;
    table.n_cols = n_cols;
    table.bbox = region.bbox;
    for (int r = 0; r < n_rows; ++r) {
        for (int c = 0; c < n_cols; ++c) {
            if (at(r, c)) continue;
            int span_c = 1;
            while (c + span_c < n_cols && !at(r, c + span_c) && !v_sep(c + span_c, r)) ++span_c;
            int span_r = 1;
            while (r + span_r < n_rows) {
                bool open = true;
                for (int cc = c; cc < c + span_c; ++cc)
                    if (h_sep(r + span_r, cc) || at(r + span_r, cc)) {
                        open = false;
                        break;
                    }
                // the row below must not be separated vertically differently
                for (int cc = c + 1; open && cc < c + span_c; ++cc)
                    if (v_sep(cc, r + span_r)) open = false;
                if (open && c + span_c < n_cols && !v_sep(c + span_c, r + span_r)) open = false;
                if (open && c > 0 && !v_sep(c, r + span_r)) open = false;
                if (!open) break;
                ++span_r;
            }
            for (int rr = r; rr < r + span_r; ++rr)
                for (int cc = c; cc < c + span_c; ++cc) at(rr, cc) = true;

            TableCell cell;
            cell.row = r;
            cell.col = c;
            cell.row_span = span_r;
            cell.col_span = span_c;
            cell.bbox = {col_bounds[static_cast<size_t>(c)], row_bounds[static_cast<size_t>(r)],
                         col_bounds[static_cast<size_t>(c + span_c)],
                         row_bounds[static_cast<size_t>(r + span_r)]};
            std::vector<const Glyph*> cell_glyphs;
            for (size_t li : region.line_indices)
                for (const auto& g : lines[li].glyphs)
                    if (g.bbox.cx() >= cell.bbox.x0 && g.bbox.cx() <= cell.bbox.x1 &&
                        g.bbox.cy() >= cell.bbox.y0 && g.bbox.cy() <= cell.bbox.y1)
                        cell_glyphs.push_back(&g);
            std::sort(cell_glyphs.begin(), cell_glyphs.end(),
                      [](const Glyph* a, const Glyph* b) {
                          double ba = glyph_baseline(*a), bb = glyph_baseline(*b);
                          if (std::abs(ba - bb) > 0.5) return ba < bb;
                          return a->bbox.x0 < b->bbox.x0;
                      });
            cell.text = glyphs_to_text(cell_glyphs);
            table.cells.push_back(std::move(cell));
        }
    }
    RecognizedTable out;
    out.table = std::move(table);
    out.column_boundaries = col_bounds;
    return out;
}

RecognizedTable recognize_borderless(const std::vector<TextLine>& lines,
                                     const TableRegion& region, const LayoutConfig& cfg) {
    std::vector<size_t> rows = region.line_indices;
    std::sort(rows.begin(), rows.end(),
              [&](size_t a, size_t b) { return lines[a].baseline_y < lines[b].baseline_y; });
    if (rows.empty()) throw std::runtime_error("degenerate table: no rows");

    std::vector<double> starts;
    for (size_t li : rows)
        for (double s : segment_starts(lines[li])) starts.push_back(s);
    auto columns = cluster_positions(starts, cfg.alignment_cluster_tolerance);
    if (columns.empty()) throw std::runtime_error("degenerate table: no columns");

    const int n_rows = static_cast<int>(rows.size());
    const int n_cols = static_cast<int>(columns.size());
    Table table;
    table.n_rows = n_rows;
    table.n_cols = n_cols;
    table.bbox = region.bbox;

    auto column_of = [&](double x) {
        int best = 0;
        double best_d = std::abs(x - columns[0]);
        for (int c = 1; c < n_cols; ++c) {
            double d = std::abs(x - columns[static_cast<size_t>(c)]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        return best;
    };

    for (int r = 0; r < n_rows; ++r) {
        const TextLine& line = lines[rows[static_cast<size_t>(r)]];
        auto segs = line_segments(line);
        struct Placed {
            int col;
            const LineSegment* seg;
        };
        std::vector<Placed> placed;
        for (const auto& seg : segs) placed.push_back({column_of(seg.x0), &seg});
        std::sort(placed.begin(), placed.end(),
                  [](const Placed& a, const Placed& b) { return a.col < b.col; });
        int next_col = 0;
        for (size_t k = 0; k < placed.size(); ++k) {
            // empty slots before this segment
            for (; next_col < placed[k].col; ++next_col) {
                TableCell cell;
                cell.row = r;
                cell.col = next_col;
                cell.bbox = {columns[static_cast<size_t>(next_col)], line.bbox.y0,
                             columns[static_cast<size_t>(next_col)], line.bbox.y1};
                table.cells.push_back(std::move(cell));
            }
            // a segment spans up to the next segment's column (or grid end)
            int end_col = (k + 1 < placed.size()) ? placed[k + 1].col : n_cols;
            TableCell cell;
            cell.row = r;
            cell.col = placed[k].col;
            cell.col_span = std::max(1, end_col - placed[k].col);
            cell.text = glyphs_to_text(placed[k].seg->glyphs);
            cell.bbox = {placed[k].seg->x0, line.bbox.y0, placed[k].seg->x1, line.bbox.y1};
            table.cells.push_back(std::move(cell));
            next_col = placed[k].col + cell.col_span;
        }
        for (; next_col < n_cols; ++next_col) {
            TableCell cell;
            cell.row = r;
            cell.col = next_col;
            cell.bbox = {columns[static_cast<size_t>(next_col)], line.bbox.y0,
                         columns[static_cast<size_t>(next_col)], line.bbox.y1};
            table.cells.push_back(std::move(cell));
        }
    }
    RecognizedTable out;
    out.table = std::move(table);
    out.column_boundaries = columns;
    return out;
}

} // namespace

RecognizedTable recognize_table_structure(const std::vector<TextLine>& lines,
                                          const TableRegion& region, const LayoutConfig& cfg) {
    if (region.ruled) {
        std::vector<double> hy, vx;
        for (const auto& s : region.rulings) {
            if (s.horizontal() && s.length() >= cfg.ruling_min_length * region.bbox.width())
                hy.push_back(s.y0);
            if (!s.horizontal() && s.length() >= cfg.ruling_min_length * region.bbox.height())
                vx.push_back(s.x0);
        }
        auto row_bounds = cluster_positions(hy, 2.0);
        auto col_bounds = cluster_positions(vx, 2.0);
        // Trust the rulings only when they delimit at least a 2x2 grid;
        // outer borders alone (e.g. side rails plus top/bottom rules) say
        // nothing about the interior, so fall back to alignment.
        if (row_bounds.size() >= 3 && col_bounds.size() >= 3)
            return recognize_ruled(lines, region, row_bounds, col_bounds, cfg);
    }
    return recognize_borderless(lines, region, cfg);
}

HeaderFooterMarks detect_headers_footers(const std::vector<std::vector<TextLine>>& pages,
                                         const std::vector<double>& page_heights,
                                         const LayoutConfig& cfg) {
    HeaderFooterMarks marks;
    marks.header_lines.resize(pages.size());
    marks.footer_lines.resize(pages.size());
    if (pages.size() < 2) return marks; // repetition needs at least two pages

    auto normalize = [](const std::string& text) {
        std::string out;
        bool space = false;
        for (unsigned char c : text) {
            if (std::isdigit(c)) continue;
            if (std::isspace(c)) {
                space = !out.empty();
                continue;
            }
            if (space) out += ' ';
            space = false;
            out += static_cast<char>(std::tolower(c));
        }
        return out;
    };

    // normalized text -> set of pages where it appears in the top/bottom band
    std::map<std::string, std::set<size_t>> top_seen, bottom_seen;
    for (size_t p = 0; p < pages.size(); ++p) {
        const double band = cfg.header_footer_band * page_heights[p];
        for (const auto& line : pages[p]) {
            std::string norm = normalize(line_text(line));
            if (norm.empty()) continue;
            if (line.bbox.cy() <= band) top_seen[norm].insert(p);
            if (line.bbox.cy() >= page_heights[p] - band) bottom_seen[norm].insert(p);
        }
    }
    const double need = cfg.header_footer_repeat_min * static_cast<double>(pages.size());
    for (size_t p = 0; p < pages.size(); ++p) {
        const double band = cfg.header_footer_band * page_heights[p];
        for (size_t li = 0; li < pages[p].size(); ++li) {
            const auto& line = pages[p][li];
            std::string norm = normalize(line_text(line));
            if (norm.empty()) continue;
            if (line.bbox.cy() <= band &&
                static_cast<double>(top_seen[norm].size()) >= std::max(need, 2.0))
                marks.header_lines[p].push_back(li);
            else if (line.bbox.cy() >= page_heights[p] - band &&
                     static_cast<double>(bottom_seen[norm].size()) >= std::max(need, 2.0))
                marks.footer_lines[p].push_back(li);
        }
    }
    return marks;
}

// ---------------------------------------------------------------- assembly

namespace {

struct PendingTable {
    RecognizedTable recognized;
    int page;
    bool first_on_page = false;
    bool last_on_page = false;
};

struct PendingBlock {
    Block block;
    // region identity for cross-column paragraph continuation
    int region_id = -1;
    std::vector<double> column_signature; // tables only
    bool first_on_page = false;
    bool last_on_page = false;
};

bool signatures_match(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    if (a.size() != b.size() || a.empty()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
    return true;
}

} // namespace

Document parse_document(const std::vector<pdf::PdfPage>& pages, const LayoutConfig& cfg,
                        const std::string& source_id) {
    Document doc;
    doc.source_id = source_id;
    doc.page_count = std::max<int>(1, static_cast<int>(pages.size()));

    std::vector<std::vector<TextLine>> page_lines;
    std::vector<double> page_heights;
    for (const auto& page : pages) {
        page_lines.push_back(build_lines(page.glyphs, cfg));
        page_heights.push_back(page.height);
    }
    auto hf = detect_headers_footers(page_lines, page_heights, cfg);

    // document-wide body font size for heading detection
    std::vector<double> sizes;
    for (const auto& lines : page_lines)
        for (const auto& line : lines)
            for (const auto& g : line.glyphs) sizes.push_back(g.font_size);
    const double body_size = median(sizes);

    std::vector<PendingBlock> stream;
    std::vector<Block> header_blocks, footer_blocks;
    int region_counter = 0;

    for (size_t p = 0; p < pages.size(); ++p) {
        const auto& lines = page_lines[p];
        std::set<size_t> hf_set(hf.header_lines[p].begin(), hf.header_lines[p].end());
        hf_set.insert(hf.footer_lines[p].begin(), hf.footer_lines[p].end());

        // body lines, local indexing
        std::vector<TextLine> body;
        for (size_t i = 0; i < lines.size(); ++i)
            if (!hf_set.count(i)) body.push_back(lines[i]);

        auto regions_of_tables = detect_tables(body, pages[p].rulings, cfg);

        // recognize up front; degenerate candidates demote to plain lines
        std::vector<TableRegion> table_regions;
        std::vector<RecognizedTable> recognized;
        for (auto& region : regions_of_tables) {
            try {
                recognized.push_back(recognize_table_structure(body, region, cfg));
                table_regions.push_back(region);
            } catch (const std::runtime_error&) {
                // demoted: its lines stay in the paragraph pool
            }
        }

        std::set<size_t> table_lines;
        for (const auto& region : table_regions)
            table_lines.insert(region.line_indices.begin(), region.line_indices.end());

        // items for reading order: free lines plus one pseudo-line per table
        std::vector<TextLine> items;
        std::vector<size_t> item_to_line; // index into body, or npos for tables
        std::vector<size_t> item_to_table;
        for (size_t i = 0; i < body.size(); ++i) {
            if (table_lines.count(i)) continue;
            items.push_back(body[i]);
            item_to_line.push_back(i);
            item_to_table.push_back(SIZE_MAX);
        }
        for (size_t t = 0; t < table_regions.size(); ++t) {
            TextLine pseudo;
            pseudo.bbox = table_regions[t].bbox;
            pseudo.baseline_y = table_regions[t].bbox.y1;
            items.push_back(pseudo);
            item_to_line.push_back(SIZE_MAX);
            item_to_table.push_back(t);
        }

        auto regions = detect_reading_order(items, cfg);

        // flatten to an ordered item sequence for title attachment
        std::vector<std::pair<size_t, int>> ordered; // (item index, region id)
        for (const auto& region : regions) {
            int rid = region_counter++;
            for (size_t idx : region) ordered.push_back({idx, rid});
        }

        // a short line right above a table becomes its title when it looks
        // like one (regex cue) or is set in a smaller font
        std::vector<bool> consumed(items.size(), false);
        for (size_t k = 0; k < ordered.size(); ++k) {
            size_t t = item_to_table[ordered[k].first];
            if (t == SIZE_MAX || k == 0) continue;
            size_t prev_item = ordered[k - 1].first;
            if (item_to_table[prev_item] != SIZE_MAX || consumed[prev_item]) continue;
            const TextLine& prev = items[prev_item];
            if (prev.bbox.y1 > table_regions[t].bbox.y0 + 1.0) continue; // must sit above
            std::string text = line_text(prev);
            if (looks_like_table_title(text) ||
                (prev.font_size() > 0 && prev.font_size() < body_size - 0.5)) {
                recognized[t].table.title = text;
                consumed[prev_item] = true;
            }
        }

        // emit blocks in order, grouping consecutive lines into paragraphs
        const size_t page_start_stream = stream.size();
        std::vector<const TextLine*> para;
        int para_region = -1;
        auto flush_para = [&]() {
            if (para.empty()) return;
            Block b;
            BoundingBox box = para.front()->bbox;
            std::string text;
            for (const TextLine* l : para) {
                if (!text.empty()) text += '\n';
                text += line_text(*l);
                box = BoundingBox::join(box, l->bbox);
            }
            b.bbox = box;
            b.page = static_cast<int>(p);
            const double fs = para.front()->font_size();
            // headings are lone larger-font lines; a full sentence is prose
            // no matter its size
            if (para.size() == 1 && fs > body_size + 0.5 && !ends_like_sentence(text)) {
                b.kind = BlockKind::heading;
                b.heading_level = 1; // ranked after assembly
            } else if (looks_like_caption(text)) {
                b.kind = BlockKind::figure_caption;
            } else {
                b.kind = BlockKind::paragraph;
            }
            b.text = std::move(text);
            PendingBlock pb;
            pb.block = std::move(b);
            pb.region_id = para_region;
            stream.push_back(std::move(pb));
            para.clear();
        };

        for (size_t k = 0; k < ordered.size(); ++k) {
            size_t item = ordered[k].first;
            int rid = ordered[k].second;
            size_t t = item_to_table[item];
            if (t != SIZE_MAX) {
                flush_para();
                PendingBlock pb;
                pb.block.kind = BlockKind::table;
                pb.block.page = static_cast<int>(p);
                pb.block.bbox = table_regions[t].bbox;
                recognized[t].table.pages = {static_cast<int>(p)};
                pb.block.table = recognized[t].table;
                pb.column_signature = recognized[t].column_boundaries;
                pb.region_id = -1;
                stream.push_back(std::move(pb));
                continue;
            }
            if (consumed[item]) continue;
            const TextLine& line = items[item];
            bool new_para = para.empty() || rid != para_region;
            if (!new_para) {
                const TextLine& prev = *para.back();
                // baseline advance beyond para_gap_factor line heights splits
                double advance = line.baseline_y - prev.baseline_y;
                if (advance > cfg.para_gap_factor * std::max(prev.bbox.height(), 1.0))
                    new_para = true;
                // font size change also breaks a paragraph
                if (std::abs(line.font_size() - prev.font_size()) > 0.5) new_para = true;
            }
            if (new_para) flush_para();
            para_region = rid;
            para.push_back(&items[item]);
        }
        flush_para();

        if (stream.size() > page_start_stream) {
            stream[page_start_stream].first_on_page = true;
            stream.back().last_on_page = true;
        }

        // header/footer blocks carry their line text
        for (size_t li : hf.header_lines[p]) {
            Block b;
            b.kind = BlockKind::page_header;
            b.text = line_text(lines[li]);
            b.bbox = lines[li].bbox;
            b.page = static_cast<int>(p);
            header_blocks.push_back(std::move(b));
        }
        for (size_t li : hf.footer_lines[p]) {
            Block b;
            b.kind = BlockKind::page_footer;
            b.text = line_text(lines[li]);
            b.bbox = lines[li].bbox;
            b.page = static_cast<int>(p);
            footer_blocks.push_back(std::move(b));
        }
    }

    // cross-page table merge: last table of a page joins the first block of
    // the next page when their column signatures agree
    for (size_t i = 0; i + 1 < stream.size();) {
        PendingBlock& a = stream[i];
        PendingBlock& b = stream[i + 1];
        if (a.block.kind == BlockKind::table && b.block.kind == BlockKind::table &&
            a.last_on_page && b.first_on_page && b.block.page == a.block.page + 1 &&
            signatures_match(a.column_signature, b.column_signature,
                             cfg.alignment_cluster_tolerance)) {
            Table& ta = *a.block.table;
            const Table& tb = *b.block.table;
            const int row_offset = ta.n_rows;
            for (TableCell cell : tb.cells) {
                cell.row += row_offset;
                ta.cells.push_back(std::move(cell));
            }
            ta.n_rows += tb.n_rows;
            ta.pages.push_back(tb.pages.empty() ? b.block.page : tb.pages.front());
            if (!ta.title && tb.title) ta.title = tb.title;
            a.last_on_page = b.last_on_page;
            stream.erase(stream.begin() + static_cast<long>(i) + 1);
        } else {
            ++i;
        }
    }

    // cross-column / cross-page paragraph continuation
    for (size_t i = 0; i + 1 < stream.size();) {
        PendingBlock& a = stream[i];
        PendingBlock& b = stream[i + 1];
        bool both_paras = a.block.kind == BlockKind::paragraph &&
                          b.block.kind == BlockKind::paragraph;
        bool crosses = a.region_id != b.region_id;
        if (both_paras && crosses &&
            (!has_terminal_punctuation(a.block.text) || starts_lowercase(b.block.text))) {
            a.block.text += "\n" + b.block.text;
            if (a.block.page == b.block.page)
                a.block.bbox = BoundingBox::join(a.block.bbox, b.block.bbox);
            a.region_id = b.region_id; // allow chains across several columns
            a.last_on_page = a.last_on_page || b.last_on_page;
            stream.erase(stream.begin() + static_cast<long>(i) + 1);
        } else {
            ++i;
        }
    }

    // heading levels by font-size rank (largest size = level 1)
    std::vector<double> heading_sizes;
    for (const auto& pb : stream)
        if (pb.block.kind == BlockKind::heading) heading_sizes.push_back(pb.block.bbox.height());
    std::sort(heading_sizes.begin(), heading_sizes.end(), std::greater<>());
    heading_sizes.erase(std::unique(heading_sizes.begin(), heading_sizes.end(),
                                    [](double a, double b) { return std::abs(a - b) < 0.5; }),
                        heading_sizes.end());

    // final ordering: per page, headers first, body next, footers last
    int order = 0;
    for (int p = 0; p < doc.page_count; ++p) {
        for (auto& hb : header_blocks)
            if (hb.page == p) {
                hb.order = order++;
                doc.blocks.push_back(hb);
            }
        for (auto& pb : stream)
            if (pb.block.page == p) {
                if (pb.block.kind == BlockKind::heading) {
                    int level = 1;
                    for (size_t k = 0; k < heading_sizes.size(); ++k)
                        if (std::abs(pb.block.bbox.height() - heading_sizes[k]) < 0.5)
                            level = static_cast<int>(k) + 1;
                    pb.block.heading_level = level;
                }
                pb.block.order = order++;
                doc.blocks.push_back(pb.block);
            }
        for (auto& fb : footer_blocks)
            if (fb.page == p) {
                fb.order = order++;
                doc.blocks.push_back(fb);
            }
    }
    return doc;
}

Document parse_pdf(std::string_view pdf_bytes, const LayoutConfig& cfg,
                   const std::string& source_id) {
    return parse_document(pdf::read_pages(pdf_bytes), cfg, source_id);
}

std::string document_to_svg(const Document& doc, const std::vector<pdf::PdfPage>& pages) {
    double width = 612, total_height = 0;
    std::vector<double> offsets;
    for (const auto& p : pages) {
        offsets.push_back(total_height);
        total_height += p.height + 10;
        width = std::max(width, p.width);
    }
    if (pages.empty()) {
        offsets.assign(static_cast<size_t>(doc.page_count), 0);
        for (int p = 0; p < doc.page_count; ++p) offsets[static_cast<size_t>(p)] = p * 802.0;
        total_height = doc.page_count * 802.0;
    }
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << total_height << "\">\n";
    for (size_t p = 0; p < offsets.size(); ++p) {
        double h = p < pages.size() ? pages[p].height : 792;
        double w = p < pages.size() ? pages[p].width : 612;
        svg << "<rect x=\"0\" y=\"" << offsets[p] << "\" width=\"" << w << "\" height=\"" << h
            << "\" fill=\"white\" stroke=\"#888\"/>\n";
    }
    auto color = [](BlockKind kind) {
        switch (kind) {
            case BlockKind::table: return "#d62728";
            case BlockKind::heading: return "#2ca02c";
            case BlockKind::page_header:
            case BlockKind::page_footer: return "#7f7f7f";
            case BlockKind::figure_caption: return "#9467bd";
            default: return "#1f77b4";
        }
    };
    for (const auto& b : doc.blocks) {
        if (b.page < 0 || b.page >= static_cast<int>(offsets.size())) continue;
        double oy = offsets[static_cast<size_t>(b.page)];
        svg << "<rect x=\"" << b.bbox.x0 << "\" y=\"" << oy + b.bbox.y0 << "\" width=\""
            << b.bbox.width() << "\" height=\"" << b.bbox.height() << "\" fill=\"none\" stroke=\""
            << color(b.kind) << "\" stroke-width=\"1.5\"/>\n"
            << "<text x=\"" << b.bbox.x0 << "\" y=\"" << oy + b.bbox.y0 - 2
            << "\" font-size=\"7\" fill=\"" << color(b.kind) << "\">" << b.order << " "
            << to_string(b.kind) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace docrag
