#pragma once

#include <optional>
#include <string>
#include <vector>

#include "docrag/providers.hpp"

namespace docrag {

enum class QuestionCategory { extractive, comprehensive };

const char* to_string(QuestionCategory c);
std::optional<QuestionCategory> question_category_from_string(const std::string& s);

struct EvalQuestion {
    std::string id;
    std::string document_ref;
    std::string text;
    QuestionCategory category = QuestionCategory::extractive;
};

enum class ScoreSource { human, judge };

struct EvalRecord {
    std::string question_id;
    QuestionCategory category = QuestionCategory::extractive;
    std::string system_a;
    std::string system_b;
    std::string retrieved_a;
    std::string retrieved_b;
    std::optional<std::string> answer_a; // extractive records carry answers
    std::optional<std::string> answer_b;
    std::optional<double> score_a; // [0, 10]
    std::optional<double> score_b;
    ScoreSource score_source = ScoreSource::judge;

    bool scored() const { return score_a && score_b; }
};

// counts[i][j] = questions with system-A score in bin i, system-B in bin j;
// bin i covers [bin_edges[i], bin_edges[i+1]).
struct ScoreMatrix {
    std::vector<double> bin_edges;
    std::vector<std::vector<int>> counts;
    int total = 0;
};

// Questions from a JSON-lines (.jsonl: {id, document_ref, text, category})
// or CSV (.csv: id,document_ref,text,category header row) file.
// Throws std::runtime_error naming the offending row on schema violations
// and duplicate ids.
std::vector<EvalQuestion> load_questions(const std::string& path);

std::string judge_prompt(const EvalRecord& record, bool flipped, bool strict);

// Scores a record with four judge calls: (A,B) twice and (B,A) twice, the
// flipped pairs swapped back before averaging. The judge must reply with a
// "score_a=<x>; score_b=<y>" line; one re-prompt is allowed per call.
// Returns false (record left unscored) when any call stays unparseable.
bool judge_pair(EvalRecord& record, ChatProvider& judge);

// Attaches integer human scores from a JSON-lines or CSV file keyed by
// question_id (columns/fields: question_id, score_a, score_b).
// Throws on scores outside [0, 10] or ids missing from `records`.
void ingest_human_scores(std::vector<EvalRecord>& records, const std::string& path);

struct WinTieLossRow {
    std::string label;
    int total = 0;
    int wins = 0; // system A
    int ties = 0;
    int losses = 0;
    int win_pct = 0;
    int tie_pct = 0;
    int loss_pct = 0;
};

struct AggregateOptions {
    double tie_margin_human = 0.0;
    double tie_margin_judge = 0.25;
    std::vector<double> bin_edges = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
};

struct Aggregate {
    std::vector<WinTieLossRow> rows; // per category, then summary
    ScoreMatrix extractive_matrix;
    ScoreMatrix comprehensive_matrix;
};

// Throws if any record is unscored.
Aggregate aggregate(const std::vector<EvalRecord>& records, const AggregateOptions& options = {});

// Writes scores.csv, summary.md (Table-3-style layout) and per-category
// matrix CSVs into `dir`.
void write_report(const Aggregate& agg, const std::vector<EvalRecord>& records,
                  const std::string& dir);

std::string summary_markdown(const Aggregate& agg);

// JSON-lines persistence of eval records.
std::string records_to_jsonl(const std::vector<EvalRecord>& records);
std::vector<EvalRecord> records_from_jsonl(const std::string& text);

} // namespace docrag
