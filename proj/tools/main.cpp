#include <CLI11.hpp>

#include <iostream>

#include "hypobench/common.hpp"
#include "hypobench/pipeline.hpp"

namespace {

constexpr const char* kDescription =
    "hypobench: build adversarial QA benchmarks from invented terms and score language models'\n"
    "hallucination tendency with agent-based evaluation.";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{kDescription};
    app.require_subcommand(1);
    app.fallthrough();

    hypobench::CommandOptions options;
    app.add_option("--run-dir", options.run_dir, "run directory for stage artifacts")
        ->envname("HYPOBENCH_RUN_DIR");
    app.add_option("--config", options.config_path, "JSON config file (defaults apply if omitted)");
    app.add_flag("--mock", options.mock, "use deterministic offline providers");
    app.add_option("--model", options.model, "system-under-test model id");
    app.add_option("--evaluator", options.evaluator_override, "evaluator model id override");
    app.add_option("--level", options.level, "question subset: full, q1080 or q180")
        ->check(CLI::IsMember({"full", "q1080", "q180"}));
    app.add_option("--parallelism", options.parallelism_override, "worker bound override");
    app.add_option("--input", options.input, "input file (dump or response import)");
    app.add_option("--dump-date", options.dump_date, "dump date recorded in corpus stats");

    app.add_subcommand("mock-dump", "write a synthetic encyclopedia dump for offline runs");
    app.add_subcommand("corpus-ingest", "build the local page store from a dump");
    app.add_subcommand("index-build", "embed titles and definitions into flat vector indexes");
    app.add_subcommand("gen-topics", "generate the 20 seed topics");
    app.add_subcommand("gen-terms", "invent candidate terms per topic");
    app.add_subcommand("validate-terms", "keep terms with zero quoted web-search hits");
    app.add_subcommand("retrieve-valid", "retrieve similar valid terms and assemble pairs");
    app.add_subcommand("compose", "compose the question dataset from term pairs");
    app.add_subcommand("sample", "write a subset manifest (--level)");
    app.add_subcommand("respond", "collect answers from the system under test (--model)");
    app.add_subcommand("import-responses", "import externally collected answers (--model --input)");
    app.add_subcommand("evaluate", "run term/answer evaluation and scoring (--model)");
    app.add_subcommand("label", "interactively record human labels (--model)");
    app.add_subcommand("report", "aggregate scores, distributions and confusion matrices");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        hypobench::run_command(app.get_subcommands().front()->get_name(), options);
        return 0;
    } catch (const hypobench::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const hypobench::ProviderError& e) {
        std::cerr << "provider error (" << hypobench::to_string(e.kind()) << "): " << e.what()
                  << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
