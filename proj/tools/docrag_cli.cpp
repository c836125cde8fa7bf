// docrag: parse PDFs into structured documents, chunk them, build a vector
// index, answer questions over it, and run paired A/B evaluations.
//
// Pipeline stages communicate through files so every intermediate artifact
// can be inspected. Exit codes: 0 success, 1 parse error, 2 unsupported
// input, 3 missing upstream artifact.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "docrag/errors.hpp"
#include "docrag/pipeline.hpp"
#include "docrag/serializer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParseError = 1;
constexpr int kExitUnsupported = 2;
constexpr int kExitMissingArtifact = 3;

std::string read_file_or_exit(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "missing artifact: " << path << "\n";
        std::exit(kExitMissingArtifact);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << bytes;
    out.flush();
    if (!out) {
        std::cerr << "cannot write " << path.string() << "\n";
        std::exit(kExitMissingArtifact);
    }
}

// output path: <out>/<input stem (known suffixes stripped)> + suffix
fs::path derive_path(const std::string& out_dir, const std::string& input,
                     const std::string& suffix) {
    std::string stem = fs::path(input).filename().string();
    for (const std::string strip :
         {".chunks.jsonl", ".pdf", ".json", ".jsonl", ".bin"}) {
        if (stem.size() > strip.size() &&
            stem.compare(stem.size() - strip.size(), strip.size(), strip) == 0) {
            stem.resize(stem.size() - strip.size());
            break;
        }
    }
    return fs::path(out_dir) / (stem + suffix);
}

struct GlobalOpts {
    std::string config_path;
    std::string mode;
    std::string out_dir = ".";
    int jobs = 0;
};

docrag::RunConfig resolve_config(const GlobalOpts& g) {
    docrag::RunConfig cfg =
        g.config_path.empty() ? docrag::default_run_config()
                              : docrag::load_run_config(g.config_path);
    if (!g.mode.empty()) {
        if (g.mode == "structure" || g.mode == "structured")
            cfg.mode = "structure";
        else if (g.mode == "flat" || g.mode == "baseline")
            cfg.mode = "flat";
        else
            throw CLI::ValidationError("--mode must be structure|flat");
    }
    if (g.jobs > 0) cfg.jobs = g.jobs;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PDF parsing, structure-aware chunking, retrieval and paired evaluation"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "run configuration JSON file");
    app.add_option("--mode", g.mode, "structure (default) or flat baseline")
        ->check(CLI::IsMember({"structure", "structured", "flat", "baseline"}));
    app.add_option("--jobs", g.jobs, "document-level parallelism");
    app.add_option("--out", g.out_dir, "output directory (default: .)");

    // parse
    auto* cmd_parse = app.add_subcommand("parse", "PDF -> structured document JSON");
    std::vector<std::string> parse_inputs;
    bool parse_svg = false;
    cmd_parse->add_option("pdf", parse_inputs, "input PDF files")->required();
    cmd_parse->add_flag("--svg", parse_svg, "also write a block-overlay SVG per page set");

    // chunk
    auto* cmd_chunk = app.add_subcommand("chunk", "document JSON -> chunk JSON lines");
    std::vector<std::string> chunk_inputs;
    cmd_chunk->add_option("document", chunk_inputs, "parsed document JSON files")->required();

    // index
    auto* cmd_index = app.add_subcommand("index", "chunk JSON lines -> embedding index");
    std::string index_input;
    cmd_index->add_option("chunks", index_input, "chunk JSON-lines file")->required();

    // ask
    auto* cmd_ask = app.add_subcommand("ask", "answer a question over an index");
    std::string ask_index, ask_chunks, ask_question_text;
    cmd_ask->add_option("--index", ask_index, "index file")->required();
    cmd_ask->add_option("--chunks", ask_chunks, "chunk JSON-lines file")->required();
    cmd_ask->add_option("question", ask_question_text, "the question")->required();

    // eval
    auto* cmd_eval = app.add_subcommand("eval", "run questions through the pipeline");
    std::string eval_pdf, eval_questions;
    bool eval_ab = false;
    cmd_eval->add_option("--pdf", eval_pdf, "source PDF")->required();
    cmd_eval->add_option("--questions", eval_questions, "question file (.csv or .jsonl)")
        ->required();
    cmd_eval->add_flag("--ab", eval_ab, "run BOTH modes and emit paired records");

    // report
    auto* cmd_report = app.add_subcommand("report", "aggregate records into a report bundle");
    std::string report_records, report_human;
    cmd_report->add_option("--records", report_records, "eval records JSON lines")->required();
    cmd_report->add_option("--human", report_human, "human score file overriding judge scores");

    CLI11_PARSE(app, argc, argv);

    try {
        const docrag::RunConfig cfg = resolve_config(g);

        if (cmd_parse->parsed()) {
            for (const auto& input : parse_inputs) {
                const std::string bytes = read_file_or_exit(input);
                auto pages = docrag::pdf::read_pages(bytes);
                auto doc = docrag::parse_document(pages, cfg.layout,
                                                  fs::path(input).filename().string());
                write_file(derive_path(g.out_dir, input, ".json"),
                           docrag::document_to_json(doc));
                if (parse_svg)
                    write_file(derive_path(g.out_dir, input, ".svg"),
                               docrag::document_to_svg(doc, pages));
            }
            return kExitOk;
        }

        if (cmd_chunk->parsed()) {
            for (const auto& input : chunk_inputs) {
                const auto doc = docrag::document_from_json(read_file_or_exit(input));
                std::vector<docrag::Chunk> chunks;
                if (cfg.mode == "flat") {
                    std::string text;
                    for (const auto& blk : doc.blocks) {
                        std::string t = docrag::block_to_text(blk);
                        if (!t.empty()) {
                            if (!text.empty()) text += "\n\n";
                            text += t;
                        }
                    }
                    chunks = docrag::recursive_split(text, cfg.policy, doc.source_id);
                } else {
                    chunks = docrag::structure_chunk(doc, cfg.policy);
                }
                write_file(derive_path(g.out_dir, input, ".chunks.jsonl"),
                           docrag::chunks_to_jsonl(chunks));
            }
            return kExitOk;
        }

        if (cmd_index->parsed()) {
            const auto chunks = docrag::chunks_from_jsonl(read_file_or_exit(index_input));
            auto embedder = docrag::make_embedding_provider(cfg.embedding);
            std::vector<std::string> texts;
            for (const auto& c : chunks) texts.push_back(c.text);
            const auto vectors = embedder->embed(texts);
            docrag::VectorIndex index(vectors.empty() ? 0 : vectors.front().dim());
            for (size_t i = 0; i < chunks.size(); ++i) index.upsert(chunks[i].id, vectors[i]);
            const auto path = derive_path(g.out_dir, index_input, ".index.bin");
            if (path.has_parent_path()) fs::create_directories(path.parent_path());
            index.save(path.string());
            return kExitOk;
        }

        if (cmd_ask->parsed()) {
            const auto chunks = docrag::chunks_from_jsonl(read_file_or_exit(ask_chunks));
            if (!fs::exists(ask_index)) {
                std::cerr << "missing artifact: " << ask_index << "\n";
                return kExitMissingArtifact;
            }
            const auto index = docrag::VectorIndex::load(ask_index);
            std::unordered_map<std::string, docrag::Chunk> by_id;
            for (const auto& c : chunks) by_id[c.id] = c;
            auto embedder = docrag::make_embedding_provider(cfg.embedding);
            auto chat = docrag::make_chat_provider(cfg.chat);
            const auto result =
                docrag::ask_question(ask_question_text, index, by_id, *embedder, *chat, cfg);
            json out;
            out["question"] = ask_question_text;
            out["answer"] = result.answer.text;
            json ctx = json::array();
            for (const auto& piece : result.context)
                ctx.push_back({{"chunk_id", piece.chunk_id},
                               {"token_count", piece.token_count},
                               {"truncated", piece.truncated}});
            out["context"] = ctx;
            std::cout << out.dump(2) << "\n";
            return kExitOk;
        }

        if (cmd_eval->parsed()) {
            const std::string bytes = read_file_or_exit(eval_pdf);
            if (!fs::exists(eval_questions)) {
                std::cerr << "missing artifact: " << eval_questions << "\n";
                return kExitMissingArtifact;
            }
            const auto questions = docrag::load_questions(eval_questions);
            auto pages = docrag::pdf::read_pages(bytes);
            const std::string source_id = fs::path(eval_pdf).filename().string();
            if (eval_ab) {
                const auto records = docrag::run_ab_eval(pages, questions, cfg, source_id);
                write_file(fs::path(g.out_dir) / "records.jsonl",
                           docrag::records_to_jsonl(records));
                return kExitOk;
            }
            // single-system run: answer each question under the selected
            // mode, no judging
            const auto chunks = docrag::chunk_pdf(pages, cfg, source_id);
            auto embedder = docrag::make_embedding_provider(cfg.embedding);
            auto chat = docrag::make_chat_provider(cfg.chat);
            std::vector<std::string> texts;
            std::unordered_map<std::string, docrag::Chunk> by_id;
            for (const auto& c : chunks) {
                texts.push_back(c.text);
                by_id[c.id] = c;
            }
            const auto vectors = embedder->embed(texts);
            docrag::VectorIndex index(vectors.empty() ? 0 : vectors.front().dim());
            for (size_t i = 0; i < chunks.size(); ++i) index.upsert(chunks[i].id, vectors[i]);
            std::string lines;
            for (const auto& q : questions) {
                const auto result =
                    docrag::ask_question(q.text, index, by_id, *embedder, *chat, cfg);
                json row;
                row["question_id"] = q.id;
                row["question"] = q.text;
                row["answer"] = result.answer.text;
                lines += row.dump() + "\n";
            }
            write_file(fs::path(g.out_dir) / "answers.jsonl", lines);
            return kExitOk;
        }

        if (cmd_report->parsed()) {
            auto records = docrag::records_from_jsonl(read_file_or_exit(report_records));
            if (!report_human.empty()) {
                if (!fs::exists(report_human)) {
                    std::cerr << "missing artifact: " << report_human << "\n";
                    return kExitMissingArtifact;
                }
                docrag::ingest_human_scores(records, report_human);
            }
            const auto agg = docrag::aggregate(records);
            fs::create_directories(g.out_dir);
            docrag::write_report(agg, records, g.out_dir);
            return kExitOk;
        }
    } catch (const docrag::UnsupportedInputError& e) {
        std::cerr << "unsupported input: " << e.what() << "\n";
        return kExitUnsupported;
    } catch (const docrag::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParseError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParseError;
    }
    return kExitOk;
}
