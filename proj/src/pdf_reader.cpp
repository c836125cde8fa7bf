#include "docrag/pdf_reader.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <zlib.h>

namespace docrag::pdf {

namespace {

// ---------------------------------------------------------------- objects

struct Obj {
    enum class Type { null, boolean, number, string, name, array, dict, ref } type = Type::null;
    bool bval = false;
    double num = 0;
    std::string str; // string payload or name (without '/')
    std::vector<Obj> arr;
    std::map<std::string, Obj> dict;
    int ref_num = 0;

    bool is(Type t) const { return type == t; }
    int as_int() const { return static_cast<int>(num); }
};

struct IndirectObject {
    Obj value;
    std::string stream; // decoded lazily; raw bytes here
    bool has_stream = false;
};

bool is_ws(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\0';
}
bool is_delim(char c) {
    return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' ||
           c == '{' || c == '}' || c == '/' || c == '%';
}

class Lexer {
public:
    explicit Lexer(std::string_view data) : data_(data) {}

    size_t pos() const { return pos_; }
    void seek(size_t p) { pos_ = p; }
    bool eof() const { return pos_ >= data_.size(); }
    char peek() const { return pos_ < data_.size() ? data_[pos_] : '\0'; }

    void skip_ws() {
        while (pos_ < data_.size()) {
            char c = data_[pos_];
            if (is_ws(c)) {
                ++pos_;
            } else if (c == '%') { // comment to end of line
                while (pos_ < data_.size() && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
            } else {
                break;
            }
        }
    }

    // Regular token (keyword / number); empty on delimiter.
    std::string token() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < data_.size() && !is_ws(data_[pos_]) && !is_delim(data_[pos_])) ++pos_;
        return std::string(data_.substr(start, pos_ - start));
    }

    std::string peek_token() {
        size_t save = pos_;
        std::string t = token();
        pos_ = save;
        return t;
    }

    bool accept_keyword(std::string_view kw) {
        size_t save = pos_;
        if (token() == kw) return true;
        pos_ = save;
        return false;
    }

    Obj parse_object() {
        skip_ws();
        if (eof()) throw ParseError("unexpected end of PDF object data", pos_);
        char c = peek();
        if (c == '<') {
            if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '<') return parse_dict();
            return parse_hex_string();
        }
        if (c == '(') return parse_literal_string();
        if (c == '[') return parse_array();
        if (c == '/') return parse_name();
        std::string t = token();
        if (t.empty()) throw ParseError("unexpected delimiter in PDF object", pos_);
        if (t == "true") return make_bool(true);
        if (t == "false") return make_bool(false);
        if (t == "null") return Obj{};
        // number, possibly the start of an indirect reference "n g R"
        Obj o;
        o.type = Obj::Type::number;
        o.num = to_number(t);
        if (is_plain_int(t)) {
            size_t save = pos_;
            std::string t2 = token();
            if (is_plain_int(t2)) {
                std::string t3 = token();
                if (t3 == "R") {
                    Obj r;
                    r.type = Obj::Type::ref;
                    r.ref_num = static_cast<int>(to_number(t));
                    return r;
                }
            }
            pos_ = save;
        }
        return o;
    }

    std::string_view data() const { return data_; }

private:
    static Obj make_bool(bool v) {
        Obj o;
        o.type = Obj::Type::boolean;
        o.bval = v;
        return o;
    }

    static bool is_plain_int(const std::string& t) {
        if (t.empty()) return false;
        for (char c : t)
            if (c < '0' || c > '9') return false;
        return true;
    }

    double to_number(const std::string& t) const {
        try {
            return std::stod(t);
        } catch (...) {
            throw ParseError("malformed number '" + t + "'", pos_);
        }
    }

    Obj parse_name() {
        ++pos_; // '/'
        size_t start = pos_;
        while (pos_ < data_.size() && !is_ws(data_[pos_]) && !is_delim(data_[pos_])) ++pos_;
        Obj o;
        o.type = Obj::Type::name;
        o.str = std::string(data_.substr(start, pos_ - start));
        return o;
    }

    Obj parse_array() {
        ++pos_; // '['
        Obj o;
        o.type = Obj::Type::array;
        while (true) {
            skip_ws();
            if (eof()) throw ParseError("unterminated array", pos_);
            if (peek() == ']') {
                ++pos_;
                return o;
            }
            o.arr.push_back(parse_object());
        }
    }

    Obj parse_dict() {
        pos_ += 2; // '<<'
        Obj o;
        o.type = Obj::Type::dict;
        while (true) {
            skip_ws();
            if (eof()) throw ParseError("unterminated dictionary", pos_);
            if (peek() == '>') {
                if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '>') {
                    pos_ += 2;
                    return o;
                }
                throw ParseError("malformed dictionary close", pos_);
            }
            if (peek() != '/') throw ParseError("dictionary key must be a name", pos_);
            Obj key = parse_name();
            o.dict[key.str] = parse_object();
        }
    }

    Obj parse_literal_string() {
        ++pos_; // '('
        Obj o;
        o.type = Obj::Type::string;
        int depth = 1;
        while (pos_ < data_.size()) {
            char c = data_[pos_++];
            if (c == '\\') {
                if (pos_ >= data_.size()) break;
                char e = data_[pos_++];
                switch (e) {
                    case 'n': o.str += '\n'; break;
                    case 'r': o.str += '\r'; break;
                    case 't': o.str += '\t'; break;
                    case 'b': o.str += '\b'; break;
                    case 'f': o.str += '\f'; break;
                    case '(': o.str += '('; break;
                    case ')': o.str += ')'; break;
                    case '\\': o.str += '\\'; break;
                    case '\r':
                        if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
                        break; // line continuation
                    case '\n': break;
                    default:
                        if (e >= '0' && e <= '7') {
                            int v = e - '0';
                            for (int k = 0; k < 2 && pos_ < data_.size() && data_[pos_] >= '0' &&
                                            data_[pos_] <= '7';
                                 ++k)
                                v = v * 8 + (data_[pos_++] - '0');
                            o.str += static_cast<char>(v);
                        } else {
                            o.str += e;
                        }
                }
            } else if (c == '(') {
                ++depth;
                o.str += c;
            } else if (c == ')') {
                if (--depth == 0) return o;
                o.str += c;
            } else {
                o.str += c;
            }
        }
        throw ParseError("unterminated string literal", pos_);
    }

    Obj parse_hex_string() {
        ++pos_; // '<'
        Obj o;
        o.type = Obj::Type::string;
        int hi = -1;
        while (pos_ < data_.size()) {
            char c = data_[pos_++];
            if (c == '>') {
                if (hi >= 0) o.str += static_cast<char>(hi * 16);
                return o;
            }
            if (is_ws(c)) continue;
            int v = (c >= '0' && c <= '9')   ? c - '0'
                    : (c >= 'a' && c <= 'f') ? c - 'a' + 10
                    : (c >= 'A' && c <= 'F') ? c - 'A' + 10
                                             : -1;
            if (v < 0) throw ParseError("invalid hex string digit", pos_ - 1);
            if (hi < 0) {
                hi = v;
            } else {
                o.str += static_cast<char>(hi * 16 + v);
                hi = -1;
            }
        }
        throw ParseError("unterminated hex string", pos_);
    }

    std::string_view data_;
    size_t pos_ = 0;
};

// ---------------------------------------------------------------- file

std::string inflate_stream(const std::string& raw, size_t offset_hint) {
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw ParseError("zlib init failed", offset_hint);
    std::string out;
    out.resize(std::max<size_t>(raw.size() * 4, 1024));
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(raw.data()));
    zs.avail_in = static_cast<uInt>(raw.size());
    size_t written = 0;
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        if (written == out.size()) out.resize(out.size() * 2);
        zs.next_out = reinterpret_cast<Bytef*>(out.data() + written);
        zs.avail_out = static_cast<uInt>(out.size() - written);
        rc = inflate(&zs, Z_NO_FLUSH);
        written = out.size() - zs.avail_out;
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw ParseError("corrupt FlateDecode stream", offset_hint);
        }
    }
    inflateEnd(&zs);
    out.resize(written);
    return out;
}

class PdfFile {
public:
    explicit PdfFile(std::string_view bytes) : bytes_(bytes) {
        if (bytes_.size() < 5 || bytes_.substr(0, 5) != "%PDF-")
            throw ParseError("missing %PDF header", 0);
        scan_objects();
        if (objects_.empty()) throw ParseError("no indirect objects found", bytes_.size());
        if (encrypted_) throw UnsupportedInputError("encrypted PDF is not supported");
    }

    const Obj& resolve(const Obj& o) const {
        if (!o.is(Obj::Type::ref)) return o;
        auto it = objects_.find(o.ref_num);
        if (it == objects_.end()) {
            static const Obj null_obj{};
            return null_obj;
        }
        return resolve(it->second.value);
    }

    const IndirectObject* get(int num) const {
        auto it = objects_.find(num);
        return it == objects_.end() ? nullptr : &it->second;
    }

    std::string decoded_stream(const IndirectObject& io) const {
        if (!io.has_stream) return {};
        const Obj* filter = find(io.value, "Filter");
        if (!filter) return io.stream;
        auto apply = [&](const std::string& name, const std::string& data) {
            if (name == "FlateDecode") return inflate_stream(data, 0);
            throw UnsupportedInputError("unsupported stream filter /" + name);
        };
        std::string data = io.stream;
        const Obj& f = resolve(*filter);
        if (f.is(Obj::Type::name)) {
            data = apply(f.str, data);
        } else if (f.is(Obj::Type::array)) {
            for (const auto& entry : f.arr) data = apply(resolve(entry).str, data);
        }
        return data;
    }

    const Obj* find(const Obj& dict, const std::string& key) const {
        if (!dict.is(Obj::Type::dict)) return nullptr;
        auto it = dict.dict.find(key);
        return it == dict.dict.end() ? nullptr : &it->second;
    }

    // Page leaf dictionaries in document order, with inherited attributes
    // (MediaBox, Resources) folded in.
    std::vector<Obj> pages() const {
        const Obj* root = nullptr;
        for (const auto& [num, io] : objects_) {
            const Obj* type = find(io.value, "Type");
            if (type && resolve(*type).str == "Catalog") {
                root = &io.value;
                break;
            }
        }
        if (!root) throw ParseError("no document catalog", bytes_.size());
        const Obj* pages_ref = find(*root, "Pages");
        if (!pages_ref) throw ParseError("catalog has no page tree", bytes_.size());
        std::vector<Obj> out;
        collect_pages(resolve(*pages_ref), Obj{}, out, 0);
        if (out.empty()) throw ParseError("document has no pages", bytes_.size());
        return out;
    }

private:
    void collect_pages(const Obj& node, const Obj& inherited, std::vector<Obj>& out,
                       int depth) const {
        if (depth > 64) throw ParseError("page tree too deep", bytes_.size());
        Obj merged = inherited;
        for (const char* key : {"MediaBox", "Resources"}) {
            if (const Obj* v = find(node, key)) merged.dict[key] = resolve(*v);
        }
        merged.type = Obj::Type::dict;
        const Obj* type = find(node, "Type");
        const std::string type_name = type ? resolve(*type).str : "";
        if (type_name == "Pages" || (type_name.empty() && find(node, "Kids"))) {
            const Obj* kids = find(node, "Kids");
            if (!kids) return;
            for (const auto& kid : resolve(*kids).arr)
                collect_pages(resolve(kid), merged, out, depth + 1);
        } else {
            Obj page = node;
            for (const auto& [k, v] : merged.dict)
                if (!page.dict.count(k)) page.dict[k] = v;
            out.push_back(std::move(page));
        }
    }

    void scan_objects() {
        Lexer lex(bytes_);
        while (!lex.eof()) {
            lex.skip_ws();
            size_t start = lex.pos();
            if (lex.eof()) break;
            std::string t = lex.token();
            if (t.empty()) { // delimiter at top level: skip one char
                lex.seek(start + 1);
                continue;
            }
            if (t == "trailer") {
                Obj tr = lex.parse_object();
                if (tr.is(Obj::Type::dict) && tr.dict.count("Encrypt")) encrypted_ = true;
                continue;
            }
            if (t == "xref" || t == "startxref" || t.front() == '%') continue;
            // candidate "num gen obj"
            bool numeric = !t.empty();
            for (char c : t) numeric = numeric && c >= '0' && c <= '9';
            if (!numeric) continue;
            size_t after_num = lex.pos();
            std::string gen = lex.token();
            std::string kw = lex.token();
            bool gen_ok = !gen.empty();
            for (char c : gen) gen_ok = gen_ok && c >= '0' && c <= '9';
            if (!gen_ok || kw != "obj") {
                lex.seek(after_num);
                continue;
            }
            int num = std::stoi(t);
            IndirectObject io;
            io.value = lex.parse_object();
            lex.skip_ws();
            if (lex.accept_keyword("stream")) {
                size_t p = lex.pos();
                if (p < bytes_.size() && bytes_[p] == '\r') ++p;
                if (p < bytes_.size() && bytes_[p] == '\n') ++p;
                size_t length = 0;
                bool have_len = false;
                if (const Obj* len = find(io.value, "Length")) {
                    const Obj& lv = resolve(*len);
                    if (lv.is(Obj::Type::number)) {
                        length = static_cast<size_t>(lv.num);
                        have_len = true;
                    }
                }
                size_t end;
                if (have_len && p + length <= bytes_.size()) {
                    end = p + length;
                } else {
                    end = bytes_.find("endstream", p);
                    if (end == std::string_view::npos)
                        throw ParseError("unterminated stream", p);
                }
                io.stream = std::string(bytes_.substr(p, end - p));
                io.has_stream = true;
                lex.seek(end);
                lex.accept_keyword("endstream");
            }
            lex.accept_keyword("endobj");
            if (const Obj* type = find(io.value, "Type"))
                if (type->is(Obj::Type::name) && type->str == "XRef")
                    throw UnsupportedInputError("cross-reference streams are not supported");
            objects_[num] = std::move(io);
        }
    }

    std::string_view bytes_;
    std::map<int, IndirectObject> objects_;
    bool encrypted_ = false;
};

// ---------------------------------------------------------------- content

struct PathRect {
    double x, y, w, h;
};

class ContentInterpreter {
public:
    ContentInterpreter(const PdfFile& file, const Obj& resources, double page_h, int page_index,
                       PdfPage& out)
        : file_(file), resources_(resources), page_h_(page_h), page_(page_index), out_(out) {}

    void run(std::string_view content) {
        Lexer lex(content);
        std::vector<Obj> operands;
        while (true) {
            lex.skip_ws();
            if (lex.eof()) break;
            char c = lex.peek();
            if (c == '(' || c == '<' || c == '[' || c == '/' || c == '+' || c == '-' ||
                c == '.' || (c >= '0' && c <= '9')) {
                operands.push_back(lex.parse_object());
                continue;
            }
            std::string op = lex.token();
            if (op.empty()) {
                lex.seek(lex.pos() + 1);
                continue;
            }
            apply(op, operands, lex);
            operands.clear();
        }
    }

private:
    double num(const std::vector<Obj>& ops, size_t i) const {
        return i < ops.size() ? ops[i].num : 0.0;
    }

    void apply(const std::string& op, std::vector<Obj>& ops, Lexer& lex) {
        if (op == "BT") {
            tx_ = ty_ = lx_ = ly_ = 0;
        } else if (op == "Tf") {
            font_size_ = ops.size() >= 2 ? ops[1].num : font_size_;
        } else if (op == "TL") {
            leading_ = num(ops, 0);
        } else if (op == "Td") {
            lx_ += num(ops, 0);
            ly_ += num(ops, 1);
            tx_ = lx_;
            ty_ = ly_;
        } else if (op == "TD") {
            leading_ = -num(ops, 1);
            lx_ += num(ops, 0);
            ly_ += num(ops, 1);
            tx_ = lx_;
            ty_ = ly_;
        } else if (op == "Tm") {
            lx_ = num(ops, 4);
            ly_ = num(ops, 5);
            tx_ = lx_;
            ty_ = ly_;
        } else if (op == "T*") {
            ly_ -= leading_;
            tx_ = lx_;
            ty_ = ly_;
        } else if (op == "Tj") {
            if (!ops.empty()) show(ops.back().str);
        } else if (op == "'") {
            ly_ -= leading_;
            tx_ = lx_;
            ty_ = ly_;
            if (!ops.empty()) show(ops.back().str);
        } else if (op == "\"") {
            ly_ -= leading_;
            tx_ = lx_;
            ty_ = ly_;
            if (ops.size() >= 3) show(ops[2].str);
        } else if (op == "TJ") {
            if (!ops.empty() && ops.back().is(Obj::Type::array)) {
                for (const auto& item : ops.back().arr) {
                    if (item.is(Obj::Type::string))
                        show(item.str);
                    else if (item.is(Obj::Type::number))
                        tx_ -= item.num / 1000.0 * font_size_;
                }
            }
        } else if (op == "m") {
            cur_x_ = num(ops, 0);
            cur_y_ = num(ops, 1);
        } else if (op == "l") {
            add_segment(cur_x_, cur_y_, num(ops, 0), num(ops, 1));
            cur_x_ = num(ops, 0);
            cur_y_ = num(ops, 1);
        } else if (op == "re") {
            pending_rects_.push_back({num(ops, 0), num(ops, 1), num(ops, 2), num(ops, 3)});
        } else if (op == "S" || op == "s" || op == "B" || op == "b" || op == "B*" || op == "b*") {
            for (const auto& r : pending_rects_) stroke_rect(r);
            commit_segments();
        } else if (op == "f" || op == "F" || op == "f*") {
            // thin filled rectangles are rulings drawn as fills
            for (const auto& r : pending_rects_) {
                if (std::min(std::abs(r.w), std::abs(r.h)) <= 3.0)
                    add_segment(r.x, r.y + r.h / 2, r.x + r.w, r.y + r.h / 2);
            }
            commit_segments();
        } else if (op == "n") {
            pending_segments_.clear();
            pending_rects_.clear();
        } else if (op == "Do") {
            if (!ops.empty() && is_image_xobject(ops.back().str)) out_.has_image = true;
        } else if (op == "BI") {
            // inline image: skip to EI
            out_.has_image = true;
            std::string_view rest = lex.data().substr(lex.pos());
            size_t p = rest.find("EI");
            lex.seek(p == std::string_view::npos ? lex.data().size() : lex.pos() + p + 2);
        }
        // all other operators (colors, state, clipping) are ignored
    }

    bool is_image_xobject(const std::string& name) const {
        const Obj* xobjs = file_.find(resources_, "XObject");
        if (!xobjs) return false;
        const Obj& dict = file_.resolve(*xobjs);
        auto it = dict.dict.find(name);
        if (it == dict.dict.end()) return false;
        const Obj& xo = file_.resolve(it->second);
        const Obj* sub = file_.find(xo, "Subtype");
        return sub && file_.resolve(*sub).str == "Image";
    }

    void show(const std::string& text) {
        const double adv = kAdvanceFactor * font_size_;
        for (char ch : text) {
            if (ch == ' ') {
                tx_ += adv;
                continue;
            }
            Glyph g;
            g.text = std::string(1, ch);
            g.font_size = font_size_;
            g.page = page_;
            // flip to top-left origin
            g.bbox = {tx_, page_h_ - (ty_ + kAscentFactor * font_size_), tx_ + adv,
                      page_h_ - (ty_ - kDescentFactor * font_size_)};
            out_.glyphs.push_back(std::move(g));
            tx_ += adv;
        }
    }

    void add_segment(double x0, double y0, double x1, double y1) {
        pending_segments_.push_back({x0, y0, x1, y1});
    }

    void stroke_rect(const PathRect& r) {
        add_segment(r.x, r.y, r.x + r.w, r.y);
        add_segment(r.x, r.y + r.h, r.x + r.w, r.y + r.h);
        add_segment(r.x, r.y, r.x, r.y + r.h);
        add_segment(r.x + r.w, r.y, r.x + r.w, r.y + r.h);
    }

    void commit_segments() {
        for (auto s : pending_segments_) {
            // keep axis-aligned segments only, normalized and flipped
            if (std::abs(s.x1 - s.x0) > 0.5 && std::abs(s.y1 - s.y0) > 0.5) continue;
            Segment seg{std::min(s.x0, s.x1), page_h_ - std::max(s.y0, s.y1),
                        std::max(s.x0, s.x1), page_h_ - std::min(s.y0, s.y1)};
            if (seg.length() > 0.5) out_.rulings.push_back(seg);
        }
        pending_segments_.clear();
        pending_rects_.clear();
    }

    const PdfFile& file_;
    const Obj& resources_;
    double page_h_;
    int page_;
    PdfPage& out_;

    double font_size_ = 12.0;
    double leading_ = 0.0;
    double tx_ = 0, ty_ = 0; // current text position (PDF coords)
    double lx_ = 0, ly_ = 0; // line start
    double cur_x_ = 0, cur_y_ = 0;
    std::vector<Segment> pending_segments_;
    std::vector<PathRect> pending_rects_;
};

} // namespace

std::vector<PdfPage> read_pages(std::string_view bytes) {
    PdfFile file(bytes);
    std::vector<PdfPage> out;
    int index = 0;
    for (const Obj& page_dict : file.pages()) {
        PdfPage page;
        if (const Obj* mb = file.find(page_dict, "MediaBox")) {
            const Obj& box = file.resolve(*mb);
            if (box.is(Obj::Type::array) && box.arr.size() == 4) {
                page.width = box.arr[2].num - box.arr[0].num;
                page.height = box.arr[3].num - box.arr[1].num;
            }
        }
        std::string content;
        if (const Obj* c = file.find(page_dict, "Contents")) {
            auto append_stream = [&](const Obj& ref) {
                if (!ref.is(Obj::Type::ref)) return;
                if (const IndirectObject* io = file.get(ref.ref_num))
                    content += file.decoded_stream(*io);
            };
            if (c->is(Obj::Type::ref)) {
                append_stream(*c);
            } else if (c->is(Obj::Type::array)) {
                for (const auto& entry : c->arr) append_stream(entry);
            }
        }
        Obj resources;
        if (const Obj* r = file.find(page_dict, "Resources")) resources = file.resolve(*r);
        ContentInterpreter interp(file, resources, page.height, index, page);
        interp.run(content);
        if (page.glyphs.empty() && page.has_image)
            throw UnsupportedInputError("page " + std::to_string(index) +
                                        " appears scanned (image-only); OCR unsupported");
        out.push_back(std::move(page));
        ++index;
    }
    return out;
}

std::string flat_text(const std::vector<PdfPage>& pages) {
    std::string out;
    for (const auto& page : pages) {
        double prev_baseline = -1e30;
        double prev_x1 = 0;
        double prev_size = 0;
        bool line_open = false;
        for (const auto& g : page.glyphs) {
            const double baseline = g.bbox.y0 + kAscentFactor * (g.bbox.y1 - g.bbox.y0) /
                                                    (kAscentFactor + kDescentFactor);
            if (line_open && std::abs(baseline - prev_baseline) > 0.25 * g.font_size) {
                out += '\n';
                line_open = false;
            }
            if (line_open && g.bbox.x0 - prev_x1 > 0.25 * prev_size) out += ' ';
            out += g.text;
            prev_baseline = baseline;
            prev_x1 = g.bbox.x1;
            prev_size = g.font_size;
            line_open = true;
        }
        if (line_open) out += '\n';
    }
    return out;
}

} // namespace docrag::pdf
