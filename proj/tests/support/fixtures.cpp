#include "support/fixtures.hpp"

#include <algorithm>
#include <random>

namespace testsupport {

using docrag::Table;
using docrag::TableCell;

PdfBuilder fixture_single_column() {
    PdfBuilder b;
    int p = b.add_page();
    b.text(p, 72, 80, 18, "Annual Report Overview");
    b.text(p, 72, 120, 12, "Revenue grew steadily across all regions during");
    b.text(p, 72, 134, 12, "the reporting period, driven by container volume");
    b.text(p, 72, 148, 12, "and improved freight rates.");
    b.text(p, 72, 190, 12, "Operating costs remained stable. The company");
    b.text(p, 72, 204, 12, "expects continued demand for logistics services");
    b.text(p, 72, 218, 12, "in the coming fiscal year.");
    return b;
}

PdfBuilder fixture_case1() {
    PdfBuilder b;
    int p = b.add_page();

    // table title, then the table itself: outer border rails plus one rule
    // under the header row; interior columns are unruled
    b.text(p, 72, 70, 12, "Table 1 Segment results");
    b.hline(p, 72, 540, 80);
    b.hline(p, 72, 540, 100);
    b.hline(p, 72, 540, 170);
    b.vline(p, 72, 80, 170);
    b.vline(p, 540, 80, 170);
    b.text(p, 210, 94, 10, "Year ended March 31, 2021");
    b.text(p, 72, 114, 10, "Segment");
    b.text(p, 210, 114, 10, "Revenue");
    b.text(p, 310, 114, 10, "Profit");
    b.text(p, 410, 114, 10, "Margin");
    b.text(p, 72, 132, 10, "Logistics");
    b.text(p, 210, 132, 10, "1,982");
    b.text(p, 310, 132, 10, "214");
    b.text(p, 410, 132, 10, "10.8%");
    b.text(p, 72, 150, 10, "Terminals");
    b.text(p, 210, 150, 10, "955");
    b.text(p, 310, 150, 10, "188");
    b.text(p, 410, 150, 10, "19.7%");
    b.text(p, 72, 166, 10, "Shipping");
    b.text(p, 210, 166, 10, "3,310");
    b.text(p, 310, 166, 10, "642");
    b.text(p, 410, 166, 10, "19.4%");

    b.text(p, 72, 195, 10, "Note: segment figures are unaudited.");

    // two columns of prose; baselines staggered so the columns cannot be
    // mistaken for shared lines, and the sentence runs left into right
    b.text(p, 72, 230, 10, "The logistics division expanded its cold");
    b.text(p, 72, 244, 10, "chain network during the year and opened");
    b.text(p, 72, 258, 10, "three new regional hubs. Despite fuel");
    b.text(p, 72, 272, 10, "price pressure, the segment kept");
    b.text(p, 312, 237, 10, "growing because long term contracts");
    b.text(p, 312, 251, 10, "shielded margins from spot volatility.");
    b.text(p, 312, 265, 10, "Management expects the trend to hold");
    b.text(p, 312, 279, 10, "through the next reporting period.");

    // the page heading, deliberately last in storage order so a naive
    // storage-order reader misplaces it
    b.text(p, 72, 40, 14, "Management Discussion and Analysis");
    return b;
}

PdfBuilder fixture_case2() {
    PdfBuilder b;
    int p0 = b.add_page();
    b.text(p0, 72, 80, 12, "Long-term borrowings are repayable in the");
    b.text(p0, 72, 94, 12, "following annual installments.");
    b.text(p0, 72, 650, 12, "Table 8 Long-term loans by maturity");
    const char* rows0[5][4] = {
        {"Maturity", "Secured", "Unsecured", "Total"},
        {"2022", "1,200", "310", "1,510"},
        {"2023", "980", "120", "1,100"},
        {"2024", "640", "95", "735"},
        {"2025", "410", "60", "470"},
    };
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 4; ++c)
            b.text(p0, 72 + (c == 0 ? 0 : (c == 1 ? 168 : (c == 2 ? 288 : 408))), 665 + 15 * r,
                   10, rows0[r][c]);

    int p1 = b.add_page();
    const char* rows1[4][4] = {
        {"2026", "300", "45", "345"},
        {"2027", "180", "30", "210"},
        {"Thereafter", "520", "85", "605"},
        {"Total", "4,230", "745", "4,975"},
    };
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            b.text(p1, 72 + (c == 0 ? 0 : (c == 1 ? 168 : (c == 2 ? 288 : 408))), 70 + 15 * r,
                   10, rows1[r][c]);
    b.text(p1, 72, 160, 12, "All facilities carry fixed interest rates.");
    return b;
}

PdfBuilder fixture_headers_footers() {
    PdfBuilder b;
    const char* bodies[3][2] = {
        {"The board approved the dividend policy and", "reviewed the capital allocation plan."},
        {"Fleet renewal continued with four vessels", "delivered and two more on order."},
        {"The audit committee met five times during", "the year to review controls."},
    };
    for (int i = 0; i < 3; ++i) {
        int p = b.add_page();
        b.text(p, 72, 40, 9, "ACME Corp Annual Report");
        b.text(p, 72, 120, 12, bodies[i][0]);
        b.text(p, 72, 134, 12, bodies[i][1]);
        b.text(p, 290, 760, 9, "Page " + std::to_string(i + 1));
    }
    return b;
}

PdfBuilder fixture_scanned() {
    PdfBuilder b;
    int p = b.add_page();
    b.image(p);
    return b;
}

std::string fixture_encrypted_bytes() {
    PdfBuilder b;
    int p = b.add_page();
    b.text(p, 72, 100, 12, "secret");
    std::string bytes = b.bytes();
    const std::string root = "/Root 1 0 R";
    bytes.replace(bytes.find(root), root.size(), root + " /Encrypt 9 0 R");
    return bytes;
}

namespace {

struct Merge {
    int row, col, row_span, col_span;
};

// True when every interior boundary keeps a contiguous unmerged run of at
// least half the table span, so its rulings survive length filtering.
bool boundaries_visible(int n_rows, int n_cols, const std::vector<Merge>& merges) {
    for (int boundary = 1; boundary < n_rows; ++boundary) {
        std::vector<bool> open(static_cast<size_t>(n_cols), false);
        for (const auto& m : merges)
            if (m.row < boundary && boundary < m.row + m.row_span)
                for (int c = m.col; c < m.col + m.col_span; ++c)
                    open[static_cast<size_t>(c)] = true;
        int best = 0, run = 0;
        for (int c = 0; c < n_cols; ++c) {
            run = open[static_cast<size_t>(c)] ? 0 : run + 1;
            best = std::max(best, run);
        }
        if (2 * best < n_cols) return false;
    }
    for (int boundary = 1; boundary < n_cols; ++boundary) {
        std::vector<bool> open(static_cast<size_t>(n_rows), false);
        for (const auto& m : merges)
            if (m.col < boundary && boundary < m.col + m.col_span)
                for (int r = m.row; r < m.row + m.row_span; ++r)
                    open[static_cast<size_t>(r)] = true;
        int best = 0, run = 0;
        for (int r = 0; r < n_rows; ++r) {
            run = open[static_cast<size_t>(r)] ? 0 : run + 1;
            best = std::max(best, run);
        }
        if (2 * best < n_rows) return false;
    }
    return true;
}

} // namespace

GeneratedGrid make_ruled_grid(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) {
        return static_cast<int>(std::uniform_int_distribution<int>(lo, hi)(rng));
    };

    const int n_rows = pick(2, 5);
    const int n_cols = pick(2, 5);
    const double x0 = 72, y0 = 100, cw = 60, ch = 24;

    // sample disjoint rectangular merges, resampling layouts whose interior
    // boundaries would be buried
    std::vector<Merge> merges;
    for (int attempt = 0; attempt < 200; ++attempt) {
        merges.clear();
        std::vector<bool> taken(static_cast<size_t>(n_rows * n_cols), false);
        const int wanted = pick(0, 2);
        for (int m = 0; m < wanted; ++m) {
            Merge cand;
            cand.row = pick(0, n_rows - 1);
            cand.col = pick(0, n_cols - 1);
            cand.row_span = pick(1, n_rows - cand.row);
            cand.col_span = pick(1, n_cols - cand.col);
            if (cand.row_span == 1 && cand.col_span == 1) continue;
            bool overlaps = false;
            for (int r = cand.row; r < cand.row + cand.row_span; ++r)
                for (int c = cand.col; c < cand.col + cand.col_span; ++c)
                    if (taken[static_cast<size_t>(r * n_cols + c)]) overlaps = true;
            if (overlaps) continue;
            for (int r = cand.row; r < cand.row + cand.row_span; ++r)
                for (int c = cand.col; c < cand.col + cand.col_span; ++c)
                    taken[static_cast<size_t>(r * n_cols + c)] = true;
            merges.push_back(cand);
        }
        if (boundaries_visible(n_rows, n_cols, merges)) break;
        if (attempt == 199) merges.clear(); // plain grid is always visible
    }

    // anchor lookup: -1 plain slot, -2 covered by a merge, else merge index
    auto anchor = [&](int r, int c) -> int {
        for (size_t m = 0; m < merges.size(); ++m) {
            const Merge& mg = merges[m];
            if (r >= mg.row && r < mg.row + mg.row_span && c >= mg.col &&
                c < mg.col + mg.col_span)
                return (r == mg.row && c == mg.col) ? static_cast<int>(m) : -2;
        }
        return -1;
    };

    GeneratedGrid out;
    int page = out.pdf.add_page();

    // horizontal rulings, broken where a merge crosses the boundary
    for (int boundary = 0; boundary <= n_rows; ++boundary) {
        double y = y0 + ch * boundary;
        int run_start = -1;
        for (int c = 0; c <= n_cols; ++c) {
            bool crossed = false;
            if (c < n_cols && boundary > 0 && boundary < n_rows)
                for (const auto& m : merges)
                    if (m.row < boundary && boundary < m.row + m.row_span && c >= m.col &&
                        c < m.col + m.col_span)
                        crossed = true;
            if (!crossed && c < n_cols) {
                if (run_start < 0) run_start = c;
            } else if (run_start >= 0) {
                out.pdf.hline(page, x0 + cw * run_start, x0 + cw * c, y);
                run_start = -1;
            }
        }
    }
    for (int boundary = 0; boundary <= n_cols; ++boundary) {
        double x = x0 + cw * boundary;
        int run_start = -1;
        for (int r = 0; r <= n_rows; ++r) {
            bool crossed = false;
            if (r < n_rows && boundary > 0 && boundary < n_cols)
                for (const auto& m : merges)
                    if (m.col < boundary && boundary < m.col + m.col_span && r >= m.row &&
                        r < m.row + m.row_span)
                        crossed = true;
            if (!crossed && r < n_rows) {
                if (run_start < 0) run_start = r;
            } else if (run_start >= 0) {
                out.pdf.vline(page, x, y0 + ch * run_start, y0 + ch * r);
                run_start = -1;
            }
        }
    }

    // one token per anchored cell, near the slot's top-left
    Table expected;
    expected.n_rows = n_rows;
    expected.n_cols = n_cols;
    for (int r = 0; r < n_rows; ++r) {
        for (int c = 0; c < n_cols; ++c) {
            int a = anchor(r, c);
            if (a == -2) continue;
            TableCell cell;
            cell.row = r;
            cell.col = c;
            if (a >= 0) {
                cell.row_span = merges[static_cast<size_t>(a)].row_span;
                cell.col_span = merges[static_cast<size_t>(a)].col_span;
            }
            std::string text = "r" + std::to_string(r) + "c" + std::to_string(c);
            cell.text = text;
            out.pdf.text(page, x0 + cw * c + 6, y0 + ch * r + 17, 8, text);
            expected.cells.push_back(std::move(cell));
        }
    }
    out.expected = std::move(expected);
    return out;
}

} // namespace testsupport
