#include "docrag/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace docrag {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Minimal CSV row splitter with double-quote escaping.
std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(std::move(field));
    return out;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

struct ScorePair {
    double first, second;
};

// Accepts "score_a=<x>; score_b=<y>" anywhere in the reply.
std::optional<ScorePair> parse_judge_reply(const std::string& reply) {
    auto grab = [&](const std::string& key) -> std::optional<double> {
        size_t pos = reply.find(key);
        if (pos == std::string::npos) return std::nullopt;
        pos += key.size();
        size_t end = pos;
        while (end < reply.size() &&
               (std::isdigit(static_cast<unsigned char>(reply[end])) || reply[end] == '.' ||
                reply[end] == '-'))
            ++end;
        if (end == pos) return std::nullopt;
        try {
            return std::stod(reply.substr(pos, end - pos));
        } catch (...) {
            return std::nullopt;
        }
    };
    auto a = grab("score_a=");
    auto b = grab("score_b=");
    if (!a || !b) return std::nullopt;
    if (*a < 0 || *a > 10 || *b < 0 || *b > 10) return std::nullopt;
    return ScorePair{*a, *b};
}

int pct(int part, int total) {
    if (total == 0) return 0;
    return static_cast<int>(std::lround(100.0 * part / total));
}

int bin_of(double score, const std::vector<double>& edges) {
    // last bin is closed on the right
    for (size_t i = 0; i + 1 < edges.size(); ++i)
        if (score >= edges[i] && score < edges[i + 1]) return static_cast<int>(i);
    return static_cast<int>(edges.size()) - 2;
}

ScoreMatrix make_matrix(const std::vector<const EvalRecord*>& records,
                        const std::vector<double>& edges) {
    ScoreMatrix m;
    m.bin_edges = edges;
    const size_t n = edges.size() >= 2 ? edges.size() - 1 : 0;
    m.counts.assign(n, std::vector<int>(n, 0));
    for (const EvalRecord* r : records) {
        if (n == 0) break;
        int i = bin_of(*r->score_a, edges);
        int j = bin_of(*r->score_b, edges);
        ++m.counts[static_cast<size_t>(i)][static_cast<size_t>(j)];
        ++m.total;
    }
    return m;
}

} // namespace

const char* to_string(QuestionCategory c) {
    return c == QuestionCategory::extractive ? "extractive" : "comprehensive";
}

std::optional<QuestionCategory> question_category_from_string(const std::string& s) {
    if (s == "extractive") return QuestionCategory::extractive;
    if (s == "comprehensive") return QuestionCategory::comprehensive;
    return std::nullopt;
}

std::vector<EvalQuestion> load_questions(const std::string& path) {
    const std::string content = read_file(path);
    std::vector<EvalQuestion> out;
    std::set<std::string> seen;

    auto push = [&](EvalQuestion q, size_t row) {
        if (q.id.empty())
            throw std::runtime_error(path + " row " + std::to_string(row) + ": empty id");
        if (!seen.insert(q.id).second)
            throw std::runtime_error(path + " row " + std::to_string(row) + ": duplicate id '" +
                                     q.id + "'");
        out.push_back(std::move(q));
    };

    std::istringstream in(content);
    std::string line;
    size_t row = 0;
    if (ends_with(path, ".csv")) {
        bool header = true;
        while (std::getline(in, line)) {
            ++row;
            if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
            auto fields = split_csv_row(line);
            if (header) {
                header = false;
                if (!fields.empty() && fields[0] == "id") continue; // header row
            }
            if (fields.size() != 4)
                throw std::runtime_error(path + " row " + std::to_string(row) +
                                         ": expected 4 columns (id,document_ref,text,category)");
            EvalQuestion q;
            q.id = fields[0];
            q.document_ref = fields[1];
            q.text = fields[2];
            auto cat = question_category_from_string(fields[3]);
            if (!cat)
                throw std::runtime_error(path + " row " + std::to_string(row) +
                                         ": invalid category '" + fields[3] +
                                         "' (expected extractive|comprehensive)");
            q.category = *cat;
            push(std::move(q), row);
        }
    } else {
        while (std::getline(in, line)) {
            ++row;
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                throw std::runtime_error(path + " row " + std::to_string(row) + ": " + e.what());
            }
            EvalQuestion q;
            try {
                q.id = j.at("id").get<std::string>();
                q.document_ref = j.value("document_ref", std::string());
                q.text = j.at("text").get<std::string>();
                const std::string cat_str = j.at("category").get<std::string>();
                auto cat = question_category_from_string(cat_str);
                if (!cat)
                    throw std::runtime_error("invalid category '" + cat_str +
                                             "' (expected extractive|comprehensive)");
                q.category = *cat;
            } catch (const std::exception& e) {
                throw std::runtime_error(path + " row " + std::to_string(row) + ": " + e.what());
            }
            push(std::move(q), row);
        }
    }
    return out;
}

std::string judge_prompt(const EvalRecord& record, bool flipped, bool strict) {
    const std::string& first = flipped ? record.retrieved_b : record.retrieved_a;
    const std::string& second = flipped ? record.retrieved_a : record.retrieved_b;
    std::string prompt =
        "You are comparing the retrieved document content of two systems answering the same "
        "question. Rate each on a 0-10 scale for how well it supports answering the question.\n\n";
    if (strict)
        prompt += "Your previous reply could not be parsed. Reply with EXACTLY one line of the "
                  "form score_a=<number>; score_b=<number> and nothing else.\n\n";
    prompt += "Question id: " + record.question_id + "\n\n";
    prompt += "Content A:\n" + first + "\n\nContent B:\n" + second + "\n\n";
    if (flipped ? record.answer_b.has_value() : record.answer_a.has_value())
        prompt += "Answer A:\n" + (flipped ? *record.answer_b : *record.answer_a) + "\n\n";
    if (flipped ? record.answer_a.has_value() : record.answer_b.has_value())
        prompt += "Answer B:\n" + (flipped ? *record.answer_a : *record.answer_b) + "\n\n";
    prompt += "Reply with one line: score_a=<number>; score_b=<number>";
    return prompt;
}

bool judge_pair(EvalRecord& record, ChatProvider& judge) {
    // call order: (A,B), (A,B), (B,A), (B,A)
    const bool flips[4] = {false, false, true, true};
    double sum_a = 0, sum_b = 0;
    for (bool flipped : flips) {
        auto scores = parse_judge_reply(judge.complete(judge_prompt(record, flipped, false)));
        if (!scores)
            scores = parse_judge_reply(judge.complete(judge_prompt(record, flipped, true)));
        if (!scores) return false; // record stays unscored
        if (flipped) {
            sum_a += scores->second;
            sum_b += scores->first;
        } else {
            sum_a += scores->first;
            sum_b += scores->second;
        }
    }
    record.score_a = sum_a / 4.0;
    record.score_b = sum_b / 4.0;
    record.score_source = ScoreSource::judge;
    return true;
}

void ingest_human_scores(std::vector<EvalRecord>& records, const std::string& path) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    size_t row = 0;
    const bool csv = ends_with(path, ".csv");

    auto apply = [&](const std::string& qid, double a, double b) {
        if (a < 0 || a > 10 || b < 0 || b > 10)
            throw std::runtime_error(path + " row " + std::to_string(row) +
                                     ": score outside [0,10]");
        for (auto& r : records) {
            if (r.question_id == qid) {
                r.score_a = a;
                r.score_b = b;
                r.score_source = ScoreSource::human;
                return;
            }
        }
        throw std::runtime_error(path + " row " + std::to_string(row) +
                                 ": unknown question_id '" + qid + "'");
    };

    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        if (csv) {
            auto fields = split_csv_row(line);
            if (row == 1 && !fields.empty() && fields[0] == "question_id") continue;
            if (fields.size() != 3)
                throw std::runtime_error(path + " row " + std::to_string(row) +
                                         ": expected question_id,score_a,score_b");
            apply(fields[0], std::stod(fields[1]), std::stod(fields[2]));
        } else {
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                throw std::runtime_error(path + " row " + std::to_string(row) + ": " + e.what());
            }
            apply(j.at("question_id").get<std::string>(), j.at("score_a").get<double>(),
                  j.at("score_b").get<double>());
        }
    }
}

Aggregate aggregate(const std::vector<EvalRecord>& records, const AggregateOptions& options) {
    std::vector<const EvalRecord*> extractive, comprehensive;
    for (const auto& r : records) {
        if (!r.scored())
            throw std::runtime_error("unscored record present: question_id=" + r.question_id);
        (r.category == QuestionCategory::extractive ? extractive : comprehensive).push_back(&r);
    }

    auto row_for = [&](const std::string& label, const std::vector<const EvalRecord*>& rs) {
        WinTieLossRow row;
        row.label = label;
        row.total = static_cast<int>(rs.size());
        for (const EvalRecord* r : rs) {
            const double margin = r->score_source == ScoreSource::human
                                      ? options.tie_margin_human
                                      : options.tie_margin_judge;
            const double delta = *r->score_a - *r->score_b;
            if (delta > margin) ++row.wins;
            else if (delta < -margin) ++row.losses;
            else ++row.ties;
        }
        row.win_pct = pct(row.wins, row.total);
        row.tie_pct = pct(row.ties, row.total);
        row.loss_pct = pct(row.losses, row.total);
        return row;
    };

    Aggregate agg;
    agg.rows.push_back(row_for("Extractive Questions", extractive));
    agg.rows.push_back(row_for("Comprehensive Questions", comprehensive));
    std::vector<const EvalRecord*> all = extractive;
    all.insert(all.end(), comprehensive.begin(), comprehensive.end());
    agg.rows.push_back(row_for("Summary", all));
    agg.extractive_matrix = make_matrix(extractive, options.bin_edges);
    agg.comprehensive_matrix = make_matrix(comprehensive, options.bin_edges);
    return agg;
}

std::string summary_markdown(const Aggregate& agg) {
    std::ostringstream md;
    md << "| Category | Total | System A wins | Tie | System B wins |\n";
    md << "| --- | --- | --- | --- | --- |\n";
    for (const auto& row : agg.rows) {
        md << "| " << row.label << " | " << row.total << " | " << row.wins << " (" << row.win_pct
           << "%) | " << row.ties << " (" << row.tie_pct << "%) | " << row.losses << " ("
           << row.loss_pct << "%) |\n";
    }
    return md.str();
}

void write_report(const Aggregate& agg, const std::vector<EvalRecord>& records,
                  const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);

    auto write = [&](const std::string& name, const std::string& content) {
        const std::string path = (fs::path(dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write report file: " + path);
        out << content;
    };

    std::ostringstream csv;
    csv << "question_id,category,score_a,score_b,score_source\n";
    for (const auto& r : records) {
        csv << csv_quote(r.question_id) << "," << to_string(r.category) << ","
            << (r.score_a ? std::to_string(*r.score_a) : "") << ","
            << (r.score_b ? std::to_string(*r.score_b) : "") << ","
            << (r.score_source == ScoreSource::human ? "human" : "judge") << "\n";
    }
    write("scores.csv", csv.str());
    write("summary.md", summary_markdown(agg));

    auto matrix_csv = [](const ScoreMatrix& m) {
        std::ostringstream out;
        out << "a_bin\\b_bin";
        for (size_t j = 0; j < m.counts.size(); ++j) out << "," << m.bin_edges[j];
        out << "\n";
        for (size_t i = 0; i < m.counts.size(); ++i) {
            out << m.bin_edges[i];
            for (size_t j = 0; j < m.counts[i].size(); ++j) out << "," << m.counts[i][j];
            out << "\n";
        }
        return out.str();
    };
    write("matrix_extractive.csv", matrix_csv(agg.extractive_matrix));
    write("matrix_comprehensive.csv", matrix_csv(agg.comprehensive_matrix));
}

std::string records_to_jsonl(const std::vector<EvalRecord>& records) {
    std::ostringstream out;
    for (const auto& r : records) {
        json j = {{"question_id", r.question_id},
                  {"category", to_string(r.category)},
                  {"system_a", r.system_a},
                  {"system_b", r.system_b},
                  {"retrieved_a", r.retrieved_a},
                  {"retrieved_b", r.retrieved_b},
                  {"score_source", r.score_source == ScoreSource::human ? "human" : "judge"}};
        if (r.answer_a) j["answer_a"] = *r.answer_a;
        if (r.answer_b) j["answer_b"] = *r.answer_b;
        if (r.score_a) j["score_a"] = *r.score_a;
        if (r.score_b) j["score_b"] = *r.score_b;
        out << j.dump() << "\n";
    }
    return out.str();
}

std::vector<EvalRecord> records_from_jsonl(const std::string& text) {
    std::vector<EvalRecord> out;
    std::istringstream in(text);
    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error("records row " + std::to_string(row) + ": " + e.what());
        }
        EvalRecord r;
        r.question_id = j.at("question_id").get<std::string>();
        auto cat = question_category_from_string(j.at("category").get<std::string>());
        if (!cat) throw std::runtime_error("records row " + std::to_string(row) + ": bad category");
        r.category = *cat;
        r.system_a = j.value("system_a", std::string());
        r.system_b = j.value("system_b", std::string());
        r.retrieved_a = j.value("retrieved_a", std::string());
        r.retrieved_b = j.value("retrieved_b", std::string());
        if (j.contains("answer_a")) r.answer_a = j["answer_a"].get<std::string>();
        if (j.contains("answer_b")) r.answer_b = j["answer_b"].get<std::string>();
        if (j.contains("score_a")) r.score_a = j["score_a"].get<double>();
        if (j.contains("score_b")) r.score_b = j["score_b"].get<double>();
        r.score_source =
            j.value("score_source", std::string("judge")) == "human" ? ScoreSource::human
                                                                     : ScoreSource::judge;
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace docrag
