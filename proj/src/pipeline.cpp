#include "hypobench/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>

#include "hypobench/benchgen.hpp"
#include "hypobench/config.hpp"
#include "hypobench/corpus.hpp"
#include "hypobench/digest.hpp"
#include "hypobench/evalengine.hpp"
#include "hypobench/parallel.hpp"
#include "hypobench/providers_mock.hpp"
#include "hypobench/questions.hpp"
#include "hypobench/reporting.hpp"
#include "hypobench/respond.hpp"
#include "hypobench/runmanifest.hpp"
#include "hypobench/vectorindex.hpp"

namespace hypobench {

namespace fs = std::filesystem;

namespace {

struct StageContext {
    CommandOptions opts;
    Config config;
    ProviderSet providers;
    RunManifest manifest;
    std::ostream* out;

    fs::path path(const std::string& name) const { return opts.run_dir / name; }
    std::ostream& log() const { return *out; }

    int parallelism() const {
        return opts.parallelism_override > 0 ? opts.parallelism_override : config.parallelism;
    }
};

std::string sanitize_id(const std::string& id) {
    std::string out;
    for (char c : id) {
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
    }
    return out.empty() ? "model" : out;
}

std::string require_artifact(const StageContext& ctx, const std::string& name,
                             const std::string& prerequisite_command) {
    fs::path path = ctx.path(name);
    if (!fs::exists(path)) {
        throw DataError("missing " + name + "; run `hypobench " + prerequisite_command +
                        "` first");
    }
    return sha256_file_hex(path.string());
}

ChatProvider& require_chat(const std::shared_ptr<ChatProvider>& provider, const char* section) {
    if (!provider) {
        throw DataError(std::string("no ") + section +
                        " backend configured; set config key '" + section +
                        "' or pass --mock");
    }
    return *provider;
}

EmbeddingProvider& require_embedder(const StageContext& ctx) {
    if (!ctx.providers.embedder) {
        throw DataError("no embedding backend configured; set config key 'embed' or pass --mock");
    }
    return *ctx.providers.embedder;
}

SearchProvider& require_search(const StageContext& ctx) {
    if (!ctx.providers.search) {
        throw DataError("no search backend configured; set config key 'search' or pass --mock");
    }
    return *ctx.providers.search;
}

// Digest-gated stage execution: done + same inputs = no-op.
void run_stage(StageContext& ctx, const std::string& stage, const std::string& input_digest,
               const std::function<std::vector<fs::path>()>& body) {
    if (ctx.manifest.up_to_date(stage, input_digest)) {
        ctx.log() << stage << ": up to date, nothing to do\n";
        return;
    }
    ctx.manifest.start(stage, input_digest);
    try {
        auto artifacts = body();
        ctx.manifest.finish(stage, artifacts);
        ctx.log() << stage << ": done\n";
    } catch (const std::exception& e) {
        ctx.manifest.fail(stage, e.what());
        throw;
    }
}

GenerationPolicy generation_policy(const StageContext& ctx) {
    GenerationPolicy policy;
    policy.list_retries = ctx.config.list_retries;
    policy.drop_hyphenated_terms = ctx.config.drop_hyphenated_terms;
    policy.knn_k = ctx.config.knn_k;
    policy.generator_model = ctx.config.generator.model;
    return policy;
}

// ---------------------------------------------------------------------------
// Stage bodies

void cmd_mock_dump(StageContext& ctx) {
    std::string digest =
        short_digest("mock-dump|" + std::to_string(ctx.config.mock.seed) + "|" +
                     std::to_string(ctx.config.mock.pages));
    run_stage(ctx, "mock-dump", digest, [&] {
        fs::path dump = ctx.path("mock_dump.jsonl");
        write_mock_dump(dump, ctx.config.mock.seed, ctx.config.mock.pages);
        ctx.log() << "wrote " << ctx.config.mock.pages << " synthetic pages to " << dump << "\n";
        return std::vector<fs::path>{dump};
    });
}

void cmd_corpus_ingest(StageContext& ctx) {
    fs::path input = ctx.opts.input;
    if (input.empty()) {
        if (ctx.opts.mock && fs::exists(ctx.path("mock_dump.jsonl"))) {
            input = ctx.path("mock_dump.jsonl");
        } else {
            throw UsageError("corpus-ingest needs --input <dump.jsonl> (or --mock after mock-dump)");
        }
    }
    if (!fs::exists(input)) {
        throw DataError("dump not found: " + input.string());
    }
    std::string digest =
        short_digest(sha256_file_hex(input.string()) + "|" + ctx.opts.dump_date);
    run_stage(ctx, "corpus-ingest", digest, [&] {
        auto paths = CorpusPaths::in_dir(ctx.path("corpus"));
        auto stats = ingest_dump(input, paths, ctx.opts.dump_date);
        ctx.log() << "ingested " << stats.page_count << " pages ("
                  << stats.dropped_no_paragraph << " without a paragraph, "
                  << stats.duplicate_titles << " duplicate titles, " << stats.malformed_lines
                  << " malformed lines)\n";
        return std::vector<fs::path>{paths.store, paths.index, paths.stats};
    });
}

void cmd_index_build(StageContext& ctx) {
    std::string corpus_digest = require_artifact(ctx, "corpus/corpus_stats.json", "corpus-ingest");
    EmbeddingProvider& embedder = require_embedder(ctx);
    std::string digest = short_digest(corpus_digest + "|" + embedder.id() + "|" +
                                      std::to_string(ctx.providers.embed_dimension));
    run_stage(ctx, "index-build", digest, [&] {
        auto store = CorpusStore::open(CorpusPaths::in_dir(ctx.path("corpus")));
        std::vector<fs::path> artifacts;
        for (IndexKind kind : {IndexKind::title, IndexKind::definition}) {
            fs::path out = ctx.path(std::string("index_") + to_string(kind) + ".hbvx");
            fs::path ckpt = ctx.path(std::string("index_") + to_string(kind) + ".ckpt");
            auto index = build_index(store, kind, embedder, ckpt);
            index.save(out);
            ctx.log() << "built " << to_string(kind) << " index: " << index.count()
                      << " vectors, dimension " << index.dimension() << "\n";
            artifacts.push_back(out);
        }
        return artifacts;
    });
}

void cmd_gen_topics(StageContext& ctx) {
    ChatProvider& chat = require_chat(ctx.providers.generator, "generator");
    std::string digest = short_digest("gen-topics|" + ctx.config.digest + "|" + chat.id());
    run_stage(ctx, "gen-topics", digest, [&] {
        auto topics =
            generate_topics(chat, generation_policy(ctx), ctx.path("gen_topics_raw_failure.txt"));
        std::vector<json> lines;
        for (const auto& t : topics) {
            lines.push_back(t.to_json());
        }
        fs::path out = ctx.path("topics.jsonl");
        write_jsonl(out, lines);
        ctx.log() << "generated " << topics.size() << " topics\n";
        return std::vector<fs::path>{out};
    });
}

std::vector<Topic> load_topics(const StageContext& ctx) {
    std::vector<Topic> topics;
    for (auto& line : read_jsonl(ctx.path("topics.jsonl"))) {
        topics.push_back(Topic::from_json(line.value));
    }
    return topics;
}

void cmd_gen_terms(StageContext& ctx) {
    std::string topics_digest = require_artifact(ctx, "topics.jsonl", "gen-topics");
    ChatProvider& chat = require_chat(ctx.providers.generator, "generator");
    std::string digest = short_digest("gen-terms|" + topics_digest + "|" + ctx.config.digest);
    run_stage(ctx, "gen-terms", digest, [&] {
        auto topics = load_topics(ctx);
        auto policy = generation_policy(ctx);
        std::vector<std::vector<HypotheticalTerm>> per_topic(topics.size());
        std::vector<std::vector<std::string>> warnings(topics.size());
        parallel_for(topics.size(), ctx.parallelism(), [&](size_t i) {
            per_topic[i] = generate_hypothetical_terms(topics[i], chat, policy, &warnings[i]);
        });
        std::vector<json> lines;
        std::vector<json> warning_lines;
        size_t total = 0;
        for (size_t i = 0; i < topics.size(); ++i) {
            for (const auto& term : per_topic[i]) {
                lines.push_back(term.to_json());
                ++total;
            }
            for (const auto& w : warnings[i]) {
                warning_lines.push_back(json{{"topic", topics[i].name}, {"warning", w}});
            }
        }
        fs::path out = ctx.path("terms_generated.jsonl");
        write_jsonl(out, lines);
        write_jsonl(ctx.path("term_warnings.jsonl"), warning_lines);
        ctx.log() << "generated " << total << " candidate terms across " << topics.size()
                  << " topics (" << warning_lines.size() << " warnings)\n";
        return std::vector<fs::path>{out, ctx.path("term_warnings.jsonl")};
    });
}

void cmd_validate_terms(StageContext& ctx) {
    std::string terms_digest = require_artifact(ctx, "terms_generated.jsonl", "gen-terms");
    SearchProvider& search = require_search(ctx);
    std::string digest = short_digest("validate|" + terms_digest);
    run_stage(ctx, "validate-terms", digest, [&] {
        std::vector<HypotheticalTerm> terms;
        for (auto& line : read_jsonl(ctx.path("terms_generated.jsonl"))) {
            terms.push_back(HypotheticalTerm::from_json(line.value));
        }
        Checkpoint checkpoint(ctx.path("validate.ckpt"));
        auto outcome = validate_nonexistence(terms, search, &checkpoint);
        std::vector<json> lines;
        for (const auto& term : outcome.retained) {
            lines.push_back(term.to_json());
        }
        fs::path out = ctx.path("hypothetical_terms.jsonl");
        write_jsonl(out, lines);
        write_file_atomic(ctx.path("validate_report.json"),
                          json{{"input", terms.size()},
                               {"excluded", outcome.excluded},
                               {"retained", outcome.retained.size()}}
                              .dump(2));
        checkpoint.discard();
        ctx.log() << "web validation: " << outcome.retained.size() << " of " << terms.size()
                  << " terms retained (" << outcome.excluded << " excluded)\n";
        return std::vector<fs::path>{out, ctx.path("validate_report.json")};
    });
}

void cmd_retrieve_valid(StageContext& ctx) {
    std::string terms_digest =
        require_artifact(ctx, "hypothetical_terms.jsonl", "validate-terms");
    std::string corpus_digest = require_artifact(ctx, "corpus/corpus_stats.json", "corpus-ingest");
    require_artifact(ctx, "index_title.hbvx", "index-build");
    require_artifact(ctx, "index_definition.hbvx", "index-build");
    ChatProvider& chat = require_chat(ctx.providers.generator, "generator");
    EmbeddingProvider& embedder = require_embedder(ctx);
    std::string digest =
        short_digest("retrieve|" + terms_digest + "|" + corpus_digest + "|" + ctx.config.digest);
    run_stage(ctx, "retrieve-valid", digest, [&] {
        auto corpus = CorpusStore::open(CorpusPaths::in_dir(ctx.path("corpus")));
        auto title_index = VectorIndex::load(ctx.path("index_title.hbvx"));
        auto definition_index = VectorIndex::load(ctx.path("index_definition.hbvx"));
        std::vector<HypotheticalTerm> terms;
        for (auto& line : read_jsonl(ctx.path("hypothetical_terms.jsonl"))) {
            terms.push_back(HypotheticalTerm::from_json(line.value));
        }
        auto policy = generation_policy(ctx);

        struct TermRetrieval {
            std::vector<ValidTerm> suggestions, title_hits, text_hits;
            std::vector<std::string> warnings;
        };
        std::vector<TermRetrieval> retrieved(terms.size());
        Checkpoint checkpoint(ctx.path("retrieve.ckpt"));
        std::mutex checkpoint_mutex;
        auto lists_to_json = [](const std::vector<ValidTerm>& list) {
            json out = json::array();
            for (const auto& v : list) {
                out.push_back(v.to_json());
            }
            return out;
        };
        auto lists_from_json = [](const json& arr) {
            std::vector<ValidTerm> out;
            for (const auto& v : arr) {
                out.push_back(ValidTerm::from_json(v));
            }
            return out;
        };
        parallel_for(terms.size(), ctx.parallelism(), [&](size_t i) {
            const auto& term = terms[i];
            {
                std::lock_guard<std::mutex> lock(checkpoint_mutex);
                if (const json* hit = checkpoint.get(term.phrase)) {
                    retrieved[i].suggestions = lists_from_json((*hit)["suggestions"]);
                    retrieved[i].title_hits = lists_from_json((*hit)["title"]);
                    retrieved[i].text_hits = lists_from_json((*hit)["text"]);
                    return;
                }
            }
            TermRetrieval r;
            r.suggestions = retrieve_llm_suggestions(term, chat, corpus, policy, &r.warnings);
            r.title_hits = retrieve_title_similar(term, title_index, corpus, embedder, policy);
            r.text_hits = retrieve_text_similar(term, definition_index, corpus, embedder, policy);
            {
                std::lock_guard<std::mutex> lock(checkpoint_mutex);
                checkpoint.put(term.phrase, json{{"suggestions", lists_to_json(r.suggestions)},
                                                 {"title", lists_to_json(r.title_hits)},
                                                 {"text", lists_to_json(r.text_hits)}});
            }
            retrieved[i] = std::move(r);
        });

        std::vector<json> valid_lines;
        std::vector<json> pair_lines;
        std::vector<json> drops;
        size_t surviving = 0;
        for (size_t i = 0; i < terms.size(); ++i) {
            const auto& term = terms[i];
            for (const auto* list :
                 {&retrieved[i].suggestions, &retrieved[i].title_hits, &retrieved[i].text_hits}) {
                for (const auto& v : *list) {
                    json line = v.to_json();
                    line["hypothetical_phrase"] = term.phrase;
                    valid_lines.push_back(std::move(line));
                }
            }
            auto assembly = assemble_term_pairs(term, retrieved[i].suggestions,
                                                retrieved[i].title_hits, retrieved[i].text_hits,
                                                policy);
            if (assembly.dropped) {
                drops.push_back(json{{"phrase", term.phrase}, {"reason", assembly.drop_reason}});
                continue;
            }
            ++surviving;
            for (const auto& pair : assembly.pairs) {
                pair_lines.push_back(pair.to_json());
            }
        }
        write_jsonl(ctx.path("valid_terms.jsonl"), valid_lines);
        write_jsonl(ctx.path("term_pairs.jsonl"), pair_lines);
        write_file_atomic(ctx.path("retrieval_report.json"),
                          json{{"terms_in", terms.size()},
                               {"terms_with_pairs", surviving},
                               {"terms_dropped", drops.size()},
                               {"drops", drops}}
                              .dump(2));
        checkpoint.discard();
        ctx.log() << "retrieval: " << surviving << " of " << terms.size()
                  << " terms assembled into " << pair_lines.size() << " pairs ("
                  << drops.size() << " dropped)\n";
        return std::vector<fs::path>{ctx.path("valid_terms.jsonl"), ctx.path("term_pairs.jsonl"),
                                     ctx.path("retrieval_report.json")};
    });
}

void cmd_compose(StageContext& ctx) {
    std::string pairs_digest = require_artifact(ctx, "term_pairs.jsonl", "retrieve-valid");
    ChatProvider& chat = require_chat(ctx.providers.generator, "generator");
    std::string digest = short_digest("compose|" + pairs_digest + "|" + ctx.config.digest);
    run_stage(ctx, "compose", digest, [&] {
        std::vector<TermPair> pairs;
        for (auto& line : read_jsonl(ctx.path("term_pairs.jsonl"))) {
            pairs.push_back(TermPair::from_json(line.value));
        }
        ComposePolicy policy;
        policy.parallelism = ctx.parallelism();
        policy.generator_model = ctx.config.generator.model;
        Checkpoint checkpoint(ctx.path("compose.ckpt"));
        std::vector<json> rejects;
        Dataset dataset = assemble_dataset(pairs, chat, policy, &checkpoint, &rejects);
        write_dataset(ctx.path("dataset.jsonl"), dataset);
        write_file_atomic(ctx.path("dataset_meta.json"),
                          json{{"provenance", dataset.provenance},
                               {"counts", dataset.counts.to_json()}}
                              .dump(2));
        write_jsonl(ctx.path("compose_rejects.jsonl"), rejects);
        checkpoint.discard();
        const auto& c = dataset.counts;
        ctx.log() << "dataset: " << c.final_count << " questions (" << c.candidates
                  << " candidates - " << c.duplicates << " duplicates - " << c.failures()
                  << " failures)\n";
        return std::vector<fs::path>{ctx.path("dataset.jsonl"), ctx.path("dataset_meta.json"),
                                     ctx.path("compose_rejects.jsonl")};
    });
}

Dataset load_dataset(const StageContext& ctx) {
    return read_dataset(ctx.path("dataset.jsonl"), ctx.path("dataset_meta.json"));
}

void cmd_sample(StageContext& ctx) {
    std::string dataset_digest = require_artifact(ctx, "dataset.jsonl", "compose");
    SampleLevel level = sample_level_from(ctx.opts.level);
    std::string digest = short_digest("sample|" + dataset_digest + "|" + ctx.opts.level);
    run_stage(ctx, "sample:" + ctx.opts.level, digest, [&] {
        auto dataset = load_dataset(ctx);
        int expected_topics = 20;
        if (fs::exists(ctx.path("topics.jsonl"))) {
            expected_topics = static_cast<int>(read_jsonl(ctx.path("topics.jsonl")).size());
        }
        auto manifest = sample_subset(dataset, level, expected_topics);
        fs::path out = ctx.path("subset_" + ctx.opts.level + ".json");
        write_file_atomic(out, manifest.to_json().dump(2));
        ctx.log() << "subset " << ctx.opts.level << ": " << manifest.question_ids.size()
                  << " questions";
        if (!manifest.shortfalls.empty()) {
            ctx.log() << " (" << manifest.shortfalls.size() << " shortfall entries)";
        }
        ctx.log() << "\n";
        return std::vector<fs::path>{out};
    });
}

std::vector<Question> questions_for_level(const StageContext& ctx, const Dataset& dataset) {
    if (ctx.opts.level == "full") {
        return dataset.questions;
    }
    fs::path subset_path = ctx.path("subset_" + ctx.opts.level + ".json");
    if (!fs::exists(subset_path)) {
        throw DataError("missing subset manifest for level " + ctx.opts.level +
                        "; run `hypobench sample --level " + ctx.opts.level + "` first");
    }
    auto manifest = SubsetManifest::from_json(json::parse(read_file(subset_path)));
    std::set<std::string> wanted(manifest.question_ids.begin(), manifest.question_ids.end());
    std::vector<Question> out;
    for (const auto& q : dataset.questions) {
        if (wanted.count(q.id)) {
            out.push_back(q);
        }
    }
    return out;
}

void cmd_respond(StageContext& ctx) {
    if (ctx.opts.model.empty()) {
        throw UsageError("respond needs --model <id>");
    }
    std::string dataset_digest = require_artifact(ctx, "dataset.jsonl", "compose");
    ChatProvider& chat = require_chat(ctx.providers.responder, "responder");
    std::string tag = sanitize_id(ctx.opts.model);
    std::string digest = short_digest("respond|" + dataset_digest + "|" + ctx.opts.model + "|" +
                                      ctx.opts.level);
    run_stage(ctx, "respond:" + tag, digest, [&] {
        auto dataset = load_dataset(ctx);
        auto questions = questions_for_level(ctx, dataset);
        RespondPolicy policy;
        policy.model_id = ctx.opts.model;
        policy.parallelism = ctx.parallelism();
        Checkpoint checkpoint(ctx.path("respond_" + tag + ".ckpt"));
        auto outcome = collect_responses(questions, chat, policy, &checkpoint);
        fs::path out = ctx.path("responses_" + tag + ".jsonl");
        write_responses(out, outcome.responses);
        write_file_atomic(ctx.path("respond_report_" + tag + ".json"),
                          json{{"model_id", ctx.opts.model},
                               {"level", ctx.opts.level},
                               {"collected", outcome.responses.size()},
                               {"missing", outcome.missing}}
                              .dump(2));
        checkpoint.discard();
        ctx.log() << "collected " << outcome.responses.size() << " responses for "
                  << ctx.opts.model << " (" << outcome.missing.size() << " missing)\n";
        return std::vector<fs::path>{out, ctx.path("respond_report_" + tag + ".json")};
    });
}

void cmd_import_responses(StageContext& ctx) {
    if (ctx.opts.model.empty()) {
        throw UsageError("import-responses needs --model <id>");
    }
    if (ctx.opts.input.empty()) {
        throw UsageError("import-responses needs --input <responses.jsonl>");
    }
    std::string dataset_digest = require_artifact(ctx, "dataset.jsonl", "compose");
    if (!fs::exists(ctx.opts.input)) {
        throw DataError("response file not found: " + ctx.opts.input.string());
    }
    std::string tag = sanitize_id(ctx.opts.model);
    std::string digest = short_digest("import|" + dataset_digest + "|" +
                                      sha256_file_hex(ctx.opts.input.string()) + "|" +
                                      ctx.opts.model);
    run_stage(ctx, "import-responses:" + tag, digest, [&] {
        auto dataset = load_dataset(ctx);
        auto outcome = import_responses(ctx.opts.input, dataset.questions, ctx.opts.model);
        fs::path out = ctx.path("responses_" + tag + ".jsonl");
        write_responses(out, outcome.responses);
        write_file_atomic(ctx.path("import_report_" + tag + ".json"),
                          json{{"model_id", ctx.opts.model},
                               {"imported", outcome.responses.size()},
                               {"duplicate_rows", outcome.duplicate_rows},
                               {"rejected", outcome.rejected}}
                              .dump(2));
        ctx.log() << "imported " << outcome.responses.size() << " responses ("
                  << outcome.rejected.size() << " rejected, " << outcome.duplicate_rows
                  << " duplicate rows)\n";
        return std::vector<fs::path>{out, ctx.path("import_report_" + tag + ".json")};
    });
}

void cmd_evaluate(StageContext& ctx) {
    if (ctx.opts.model.empty()) {
        throw UsageError("evaluate needs --model <id>");
    }
    std::string tag = sanitize_id(ctx.opts.model);
    std::string dataset_digest = require_artifact(ctx, "dataset.jsonl", "compose");
    std::string responses_digest = require_artifact(
        ctx, "responses_" + tag + ".jsonl", "respond --model " + ctx.opts.model);
    ChatProvider& evaluator = require_chat(ctx.providers.evaluator, "evaluator");
    std::string evaluator_id =
        ctx.opts.evaluator_override.empty() ? ctx.config.evaluator.model
                                            : ctx.opts.evaluator_override;
    std::string digest = short_digest("evaluate|" + dataset_digest + "|" + responses_digest +
                                      "|" + evaluator_id + "|" + ctx.opts.level);
    run_stage(ctx, "evaluate:" + tag, digest, [&] {
        auto dataset = load_dataset(ctx);
        auto questions = questions_for_level(ctx, dataset);
        auto responses = read_responses(ctx.path("responses_" + tag + ".jsonl"));
        EvaluatorPolicy policy;
        policy.evaluator_model = evaluator_id;
        policy.parallelism = ctx.parallelism();
        Checkpoint checkpoint(ctx.path("evaluate_" + tag + ".ckpt"));
        auto run = evaluate_all(questions, responses, evaluator, policy, &checkpoint);
        write_evaluations(ctx.path("evaluations_" + tag + ".jsonl"), run.evaluations);

        auto report = build_model_report(ctx.opts.model, evaluator_id, run.evaluations,
                                         dataset.questions, run.skipped.size());
        write_file_atomic(ctx.path("score_" + tag + ".json"),
                          json{{"model_id", ctx.opts.model},
                               {"evaluator_id", evaluator_id},
                               {"level", ctx.opts.level},
                               {"score", report.score.to_json()},
                               {"coverage",
                                {{"scored", report.scored},
                                 {"evaluation_failed", report.evaluation_failed},
                                 {"missing_responses", report.missing_responses}}}}
                              .dump(2));
        write_file_atomic(ctx.path("eval_report_" + tag + ".json"),
                          json{{"model_id", ctx.opts.model},
                               {"skipped", run.skipped}}
                              .dump(2));
        checkpoint.discard();
        ctx.log() << "evaluated " << run.evaluations.size() << " answers for " << ctx.opts.model
                  << ": HTS " << report.score.hts << " (|V_A| " << report.score.numerator
                  << " / |H_Q| " << report.score.denominator << ")\n";
        return std::vector<fs::path>{ctx.path("evaluations_" + tag + ".jsonl"),
                                     ctx.path("score_" + tag + ".json"),
                                     ctx.path("eval_report_" + tag + ".json")};
    });
}

void cmd_label(StageContext& ctx) {
    if (ctx.opts.model.empty()) {
        throw UsageError("label needs --model <id>");
    }
    std::string tag = sanitize_id(ctx.opts.model);
    require_artifact(ctx, "dataset.jsonl", "compose");
    require_artifact(ctx, "responses_" + tag + ".jsonl", "respond --model " + ctx.opts.model);
    auto dataset = load_dataset(ctx);
    auto questions = questions_for_level(ctx, dataset);
    auto responses = read_responses(ctx.path("responses_" + tag + ".jsonl"));
    std::map<std::string, const Response*> response_of;
    for (const auto& r : responses) {
        response_of[r.question_id] = &r;
    }

    fs::path labels_path = ctx.path("human_labels_" + tag + ".jsonl");
    std::set<std::string> already;
    if (fs::exists(labels_path)) {
        for (auto& line : read_jsonl(labels_path)) {
            already.insert(line.value.value("question_id", ""));
        }
    }
    std::istream& in = *ctx.opts.in;
    std::ostream& out = ctx.log();
    std::ofstream append(labels_path, std::ios::app | std::ios::binary);

    size_t pending = 0;
    for (const auto& q : questions) {
        pending += response_of.count(q.id) && already.count(q.id) == 0 ? 1 : 0;
    }
    out << "labeling " << pending << " answers for " << ctx.opts.model
        << " (v=valid h=hallucination i=irrelevant s=skip q=quit)\n";
    size_t shown = 0;
    size_t labeled = 0;
    for (const auto& q : questions) {
        auto rit = response_of.find(q.id);
        if (rit == response_of.end() || already.count(q.id)) {
            continue;
        }
        ++shown;
        out << "\n[" << shown << "/" << pending << "] question (" << to_string(q.kind)
            << "):\n  " << q.text << "\n\nanswer:\n  " << rit->second->text << "\n\nlabel> "
            << std::flush;
        std::string choice;
        bool done = false;
        while (std::getline(in, choice)) {
            if (choice == "v" || choice == "h" || choice == "i") {
                const char* label = choice == "v" ? "valid"
                                                  : (choice == "h" ? "hallucination"
                                                                   : "irrelevant");
                append << json{{"question_id", q.id}, {"label", label}}.dump() << "\n";
                append.flush();
                ++labeled;
                break;
            }
            if (choice == "s") {
                break;
            }
            if (choice == "q") {
                done = true;
                break;
            }
            out << "please answer v, h, i, s or q > " << std::flush;
        }
        if (done || !in.good()) {
            break;
        }
    }
    out << "\nrecorded " << labeled << " labels in " << labels_path << "\n";
}

void cmd_report(StageContext& ctx) {
    std::vector<std::string> tags;
    for (const auto& entry : fs::directory_iterator(ctx.opts.run_dir)) {
        std::string name = entry.path().filename().string();
        if (name.rfind("evaluations_", 0) == 0 && name.size() > 18 &&
            name.substr(name.size() - 6) == ".jsonl") {
            tags.push_back(name.substr(12, name.size() - 18));
        }
    }
    std::sort(tags.begin(), tags.end());
    if (!ctx.opts.model.empty()) {
        std::string want = sanitize_id(ctx.opts.model);
        tags.erase(std::remove_if(tags.begin(), tags.end(),
                                  [&](const std::string& t) { return t != want; }),
                   tags.end());
    }
    if (tags.empty()) {
        throw DataError("no evaluations found; run `hypobench evaluate --model <id>` first");
    }
    require_artifact(ctx, "dataset.jsonl", "compose");

    std::string combined;
    for (const auto& tag : tags) {
        combined += sha256_file_hex(ctx.path("evaluations_" + tag + ".jsonl").string());
        fs::path labels = ctx.path("human_labels_" + tag + ".jsonl");
        if (fs::exists(labels)) {
            combined += sha256_file_hex(labels.string());
        }
    }
    std::string digest = short_digest("report|" + combined);
    run_stage(ctx, "report", digest, [&] {
        auto dataset = load_dataset(ctx);
        std::vector<fs::path> artifacts;
        std::vector<ModelReport> reports;
        for (const auto& tag : tags) {
            auto evaluations = read_evaluations(ctx.path("evaluations_" + tag + ".jsonl"));
            std::string model_id = evaluations.empty() ? tag : evaluations[0].model_id;
            std::string evaluator_id;
            uint64_t missing = 0;
            fs::path score_path = ctx.path("score_" + tag + ".json");
            if (fs::exists(score_path)) {
                json score = json::parse(read_file(score_path));
                evaluator_id = score.value("evaluator_id", "");
                missing = score.value("coverage", json::object())
                              .value("missing_responses", uint64_t{0});
            }
            reports.push_back(build_model_report(model_id, evaluator_id, evaluations,
                                                 dataset.questions, missing));

            auto dist = distribution_report(evaluations, dataset.questions);
            fs::path dist_path = ctx.path("distribution_" + tag + ".json");
            write_file_atomic(dist_path, dist.to_json().dump(2));
            artifacts.push_back(dist_path);

            fs::path labels = ctx.path("human_labels_" + tag + ".jsonl");
            if (fs::exists(labels)) {
                auto matrix = confusion_report(evaluations, labels);
                fs::path confusion_path = ctx.path("confusion_" + tag + ".json");
                write_file_atomic(confusion_path, matrix.to_json().dump(2));
                artifacts.push_back(confusion_path);
                ctx.log() << "confusion (" << tag << "): " << matrix.total
                          << " doubly labeled answers, evaluator error rate "
                          << matrix.error_rate << "%\n";
            }
        }
        write_file_atomic(ctx.path("report.json"), score_summary_json(reports).dump(2));
        write_file_atomic(ctx.path("report.txt"), score_summary_text(reports));
        write_file_atomic(ctx.path("distribution.csv"), distribution_csv(reports));
        artifacts.push_back(ctx.path("report.json"));
        artifacts.push_back(ctx.path("report.txt"));
        artifacts.push_back(ctx.path("distribution.csv"));
        ctx.log() << score_summary_text(reports);
        return artifacts;
    });
}

}  // namespace

void run_command(const std::string& command, const CommandOptions& options) {
    if (options.run_dir.empty()) {
        throw UsageError("--run-dir is required");
    }
    CommandOptions opts = options;
    if (opts.in == nullptr) {
        opts.in = &std::cin;
    }
    if (opts.out == nullptr) {
        opts.out = &std::cout;
    }
    fs::create_directories(opts.run_dir);
    RunLock lock(opts.run_dir);

    Config config = Config::load(opts.config_path);
    StageContext ctx{opts, config, make_providers(config, opts.mock),
                     RunManifest::load_or_create(opts.run_dir, config.digest), opts.out};

    if (command == "mock-dump") {
        cmd_mock_dump(ctx);
    } else if (command == "corpus-ingest") {
        cmd_corpus_ingest(ctx);
    } else if (command == "index-build") {
        cmd_index_build(ctx);
    } else if (command == "gen-topics") {
        cmd_gen_topics(ctx);
    } else if (command == "gen-terms") {
        cmd_gen_terms(ctx);
    } else if (command == "validate-terms") {
        cmd_validate_terms(ctx);
    } else if (command == "retrieve-valid") {
        cmd_retrieve_valid(ctx);
    } else if (command == "compose") {
        cmd_compose(ctx);
    } else if (command == "sample") {
        cmd_sample(ctx);
    } else if (command == "respond") {
        cmd_respond(ctx);
    } else if (command == "import-responses") {
        cmd_import_responses(ctx);
    } else if (command == "evaluate") {
        cmd_evaluate(ctx);
    } else if (command == "label") {
        cmd_label(ctx);
    } else if (command == "report") {
        cmd_report(ctx);
    } else {
        throw UsageError("unknown command: " + command);
    }
}

}  // namespace hypobench
