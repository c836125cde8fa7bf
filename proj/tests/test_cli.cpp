#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "docrag/chunker.hpp"
#include "docrag/eval.hpp"
#include "docrag/serializer.hpp"
#include "support/fixtures.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
    std::string stderr_text;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot read " << p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_bytes(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << bytes;
}

// Runs the program with `args`, capturing stdout/stderr into temp files.
RunResult run_cli(const fs::path& workdir, const std::string& args) {
    RunResult r;
    const fs::path out_file = workdir / "_stdout.txt";
    const fs::path err_file = workdir / "_stderr.txt";
    const std::string cmd = std::string(DOCRAG_CLI_PATH) + " " + args + " > \"" +
                            out_file.string() + "\" 2> \"" + err_file.string() + "\"";
    const int status = std::system(cmd.c_str());
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.stdout_text = slurp(out_file);
    r.stderr_text = slurp(err_file);
    return r;
}

fs::path fresh_dir(const std::string& tag) {
    auto dir = fs::temp_directory_path() / ("docrag_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("parse writes a structured document JSON and exits 0") {
    auto dir = fresh_dir("parse");
    write_bytes(dir / "doc.pdf", testsupport::fixture_single_column().bytes());

    auto r = run_cli(dir, "--out \"" + dir.string() + "\" parse \"" + (dir / "doc.pdf").string() +
                              "\" --svg");
    CHECK(r.exit_code == 0);
    REQUIRE(fs::exists(dir / "doc.json"));
    CHECK(fs::exists(dir / "doc.svg"));

    const auto doc = docrag::document_from_json(slurp(dir / "doc.json"));
    CHECK(doc.source_id == "doc.pdf");
    CHECK(doc.page_count == 1);
    REQUIRE(doc.blocks.size() == 3);
    CHECK(doc.blocks[0].kind == docrag::BlockKind::heading);
    CHECK(doc.blocks[1].kind == docrag::BlockKind::paragraph);

    SUBCASE("re-parsing is byte-identical") {
        const std::string first = slurp(dir / "doc.json");
        auto r2 = run_cli(dir, "--out \"" + dir.string() + "\" parse \"" +
                                   (dir / "doc.pdf").string() + "\"");
        CHECK(r2.exit_code == 0);
        CHECK(slurp(dir / "doc.json") == first);
    }
    fs::remove_all(dir);
}

TEST_CASE("image-only input exits 2 with an OCR message") {
    auto dir = fresh_dir("scanned");
    write_bytes(dir / "scan.pdf", testsupport::fixture_scanned().bytes());
    auto r = run_cli(dir, "--out \"" + dir.string() + "\" parse \"" + (dir / "scan.pdf").string() +
                              "\"");
    CHECK(r.exit_code == 2);
    CHECK(r.stderr_text.find("OCR unsupported") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "scan.json"));
    fs::remove_all(dir);
}

TEST_CASE("encrypted input exits 2") {
    auto dir = fresh_dir("encrypted");
    write_bytes(dir / "locked.pdf", testsupport::fixture_encrypted_bytes());
    auto r = run_cli(dir, "parse \"" + (dir / "locked.pdf").string() + "\"");
    CHECK(r.exit_code == 2);
    CHECK(r.stderr_text.find("unsupported input") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("malformed bytes exit 1") {
    auto dir = fresh_dir("malformed");
    write_bytes(dir / "junk.pdf", "%PDF-1.4\nthis is not a real file");
    auto r = run_cli(dir, "parse \"" + (dir / "junk.pdf").string() + "\"");
    CHECK(r.exit_code == 1);
    CHECK(r.stderr_text.find("parse error") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("missing upstream artifacts exit 3") {
    auto dir = fresh_dir("missing");
    SUBCASE("parse input") {
        auto r = run_cli(dir, "parse \"" + (dir / "nope.pdf").string() + "\"");
        CHECK(r.exit_code == 3);
        CHECK(r.stderr_text.find("missing artifact") != std::string::npos);
    }
    SUBCASE("chunk input") {
        auto r = run_cli(dir, "chunk \"" + (dir / "nope.json").string() + "\"");
        CHECK(r.exit_code == 3);
    }
    SUBCASE("report records") {
        auto r = run_cli(dir, "report --records \"" + (dir / "nope.jsonl").string() + "\"");
        CHECK(r.exit_code == 3);
    }
    fs::remove_all(dir);
}

TEST_CASE("chunk honors the mode flag and its aliases") {
    auto dir = fresh_dir("chunk");
    write_bytes(dir / "doc.pdf", testsupport::fixture_case1().bytes());
    REQUIRE(run_cli(dir, "--out \"" + dir.string() + "\" parse \"" + (dir / "doc.pdf").string() +
                             "\"").exit_code == 0);
    const std::string doc_json = (dir / "doc.json").string();

    auto chunk_with = [&](const std::string& mode, const std::string& out) {
        fs::create_directories(dir / out);
        auto r = run_cli(dir, "--mode " + mode + " --out \"" + (dir / out).string() +
                                  "\" chunk \"" + doc_json + "\"");
        REQUIRE(r.exit_code == 0);
        return slurp(dir / out / "doc.chunks.jsonl");
    };

    const std::string structure = chunk_with("structure", "s1");
    const std::string structured_alias = chunk_with("structured", "s2");
    const std::string flat = chunk_with("flat", "f1");
    const std::string baseline_alias = chunk_with("baseline", "f2");

    CHECK(structure == structured_alias);
    CHECK(flat == baseline_alias);
    CHECK(structure != flat);

    // Structure-aware chunks keep the table's markdown serialization intact
    // inside a single chunk; each emitted line is a standalone JSON object.
    auto chunks = docrag::chunks_from_jsonl(structure);
    bool has_table_chunk = false;
    for (const auto& c : chunks)
        if (c.text.find("| ---") != std::string::npos) has_table_chunk = true;
    CHECK(has_table_chunk);
    fs::remove_all(dir);
}

TEST_CASE("chunking an empty document yields an empty chunk file") {
    auto dir = fresh_dir("empty");
    docrag::Document doc;
    doc.source_id = "empty.pdf";
    doc.page_count = 1;
    write_bytes(dir / "empty.json", docrag::document_to_json(doc));
    auto r = run_cli(dir, "--out \"" + dir.string() + "\" chunk \"" +
                              (dir / "empty.json").string() + "\"");
    CHECK(r.exit_code == 0);
    CHECK(slurp(dir / "empty.chunks.jsonl").empty());
    fs::remove_all(dir);
}

TEST_CASE("index then ask answers a question over the fixture") {
    auto dir = fresh_dir("ask");
    write_bytes(dir / "doc.pdf", testsupport::fixture_case1().bytes());
    REQUIRE(run_cli(dir, "--out \"" + dir.string() + "\" parse \"" + (dir / "doc.pdf").string() +
                             "\"").exit_code == 0);
    REQUIRE(run_cli(dir, "--out \"" + dir.string() + "\" chunk \"" + (dir / "doc.json").string() +
                             "\"").exit_code == 0);
    REQUIRE(run_cli(dir, "--out \"" + dir.string() + "\" index \"" +
                             (dir / "doc.chunks.jsonl").string() + "\"").exit_code == 0);
    REQUIRE(fs::exists(dir / "doc.index.bin"));

    auto r = run_cli(dir, "ask --index \"" + (dir / "doc.index.bin").string() + "\" --chunks \"" +
                              (dir / "doc.chunks.jsonl").string() +
                              "\" \"What were the segment results?\"");
    REQUIRE(r.exit_code == 0);
    const json out = json::parse(r.stdout_text);
    CHECK(out.at("question") == "What were the segment results?");
    CHECK(out.at("answer").is_string());
    REQUIRE(out.at("context").is_array());
    CHECK(!out["context"].empty());
    for (const auto& piece : out["context"]) {
        CHECK(piece.contains("chunk_id"));
        CHECK(piece.at("token_count").get<int>() > 0);
    }
    fs::remove_all(dir);
}

TEST_CASE("paired eval emits one record per question, byte-stably") {
    auto dir = fresh_dir("eval");
    write_bytes(dir / "doc.pdf", testsupport::fixture_case1().bytes());
    write_bytes(dir / "q.csv",
                "id,document_ref,text,category\n"
                "q1,doc.pdf,What is the 2021 revenue?,extractive\n"
                "q2,doc.pdf,Summarize segment performance,comprehensive\n"
                "q3,doc.pdf,What does the note say?,extractive\n");

    auto r = run_cli(dir, "--out \"" + dir.string() + "\" eval --pdf \"" +
                              (dir / "doc.pdf").string() + "\" --questions \"" +
                              (dir / "q.csv").string() + "\" --ab");
    REQUIRE(r.exit_code == 0);
    const std::string first = slurp(dir / "records.jsonl");
    auto records = docrag::records_from_jsonl(first);
    REQUIRE(records.size() == 3);
    for (const auto& rec : records) {
        CHECK(rec.scored()); // mock judge scores every record
        CHECK(!rec.retrieved_a.empty());
        CHECK(!rec.retrieved_b.empty());
    }
    CHECK(records[0].question_id == "q1");
    CHECK(records[1].category == docrag::QuestionCategory::comprehensive);

    auto r2 = run_cli(dir, "--out \"" + dir.string() + "\" eval --pdf \"" +
                               (dir / "doc.pdf").string() + "\" --questions \"" +
                               (dir / "q.csv").string() + "\" --ab");
    CHECK(r2.exit_code == 0);
    CHECK(slurp(dir / "records.jsonl") == first);
    fs::remove_all(dir);
}

TEST_CASE("single-system eval writes per-question answers") {
    auto dir = fresh_dir("answers");
    write_bytes(dir / "doc.pdf", testsupport::fixture_single_column().bytes());
    write_bytes(dir / "q.jsonl",
                R"({"id":"a1","text":"What is the heading about?","category":"extractive"})"
                "\n");
    auto r = run_cli(dir, "--out \"" + dir.string() + "\" eval --pdf \"" +
                              (dir / "doc.pdf").string() + "\" --questions \"" +
                              (dir / "q.jsonl").string() + "\"");
    REQUIRE(r.exit_code == 0);
    const std::string lines = slurp(dir / "answers.jsonl");
    const json row = json::parse(lines.substr(0, lines.find('\n')));
    CHECK(row.at("question_id") == "a1");
    CHECK(row.at("answer").is_string());
    fs::remove_all(dir);
}

TEST_CASE("report aggregates records into the bundle, with optional human scores") {
    auto dir = fresh_dir("report");
    // Synthetic scored records: 2 extractive (1 win, 1 tie), 1 comprehensive loss.
    std::vector<docrag::EvalRecord> records;
    auto rec = [&](const std::string& id, docrag::QuestionCategory cat, double a, double b) {
        docrag::EvalRecord r;
        r.question_id = id;
        r.category = cat;
        r.retrieved_a = "a";
        r.retrieved_b = "b";
        r.score_a = a;
        r.score_b = b;
        r.score_source = docrag::ScoreSource::human;
        records.push_back(r);
    };
    rec("q1", docrag::QuestionCategory::extractive, 8, 3);
    rec("q2", docrag::QuestionCategory::extractive, 5, 5);
    rec("q3", docrag::QuestionCategory::comprehensive, 2, 9);
    write_bytes(dir / "records.jsonl", docrag::records_to_jsonl(records));

    auto r = run_cli(dir, "--out \"" + (dir / "bundle").string() + "\" report --records \"" +
                              (dir / "records.jsonl").string() + "\"");
    REQUIRE(r.exit_code == 0);
    const std::string summary = slurp(dir / "bundle" / "summary.md");
    CHECK(summary.find("| Extractive Questions | 2 | 1 (50%) | 1 (50%) | 0 (0%) |") !=
          std::string::npos);
    CHECK(summary.find("| Comprehensive Questions | 1 | 0 (0%) | 0 (0%) | 1 (100%) |") !=
          std::string::npos);
    CHECK(fs::exists(dir / "bundle" / "scores.csv"));
    CHECK(fs::exists(dir / "bundle" / "matrix_extractive.csv"));
    CHECK(fs::exists(dir / "bundle" / "matrix_comprehensive.csv"));

    SUBCASE("human score file overrides the stored scores") {
        write_bytes(dir / "human.csv", "question_id,score_a,score_b\nq3,9,2\n");
        auto r2 = run_cli(dir, "--out \"" + (dir / "bundle2").string() + "\" report --records \"" +
                                   (dir / "records.jsonl").string() + "\" --human \"" +
                                   (dir / "human.csv").string() + "\"");
        REQUIRE(r2.exit_code == 0);
        const std::string summary2 = slurp(dir / "bundle2" / "summary.md");
        CHECK(summary2.find("| Comprehensive Questions | 1 | 1 (100%) | 0 (0%) | 0 (0%) |") !=
              std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("unknown mode values are rejected before any work happens") {
    auto dir = fresh_dir("badmode");
    auto r = run_cli(dir, "--mode sideways parse whatever.pdf");
    CHECK(r.exit_code != 0);
    CHECK(r.exit_code != 2);
    fs::remove_all(dir);
}
