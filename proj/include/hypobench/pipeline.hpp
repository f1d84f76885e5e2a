#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

namespace hypobench {

struct CommandOptions {
    std::filesystem::path run_dir;
    std::filesystem::path config_path;
    bool mock = false;
    std::string model;               // system under test (respond/evaluate/label/import)
    std::string evaluator_override;  // evaluator model id override
    std::string level = "full";      // full | q1080 | q180
    int parallelism_override = 0;
    std::filesystem::path input;     // dump path / response file, per command
    std::string dump_date;
    std::istream* in = nullptr;      // interactive input (label); defaults to std::cin
    std::ostream* out = nullptr;     // progress stream; defaults to std::cout
};

// Executes one CLI command against the run directory. Throws UsageError,
// ProviderError or DataError; the caller maps those to exit codes.
void run_command(const std::string& command, const CommandOptions& options);

}  // namespace hypobench
