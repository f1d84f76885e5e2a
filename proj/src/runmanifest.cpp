#include "hypobench/runmanifest.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <ctime>

#include "hypobench/common.hpp"
#include "hypobench/digest.hpp"

namespace hypobench {

namespace fs = std::filesystem;

RunLock::RunLock(const fs::path& run_dir) {
    fs::create_directories(run_dir);
    path_ = run_dir / ".lock";
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        throw DataError("run directory is locked by another process (" + path_.string() +
                        " exists; remove it if that process is gone)");
    }
    std::string pid = std::to_string(::getpid()) + "\n";
    (void)!::write(fd, pid.data(), pid.size());
    ::close(fd);
    held_ = true;
}

RunLock::~RunLock() {
    if (held_) {
        std::error_code ec;
        fs::remove(path_, ec);
    }
}

namespace {

const char* kStageOrder[] = {"mock-dump",      "corpus-ingest", "index-build", "gen-topics",
                             "gen-terms",      "validate-terms", "retrieve-valid", "compose",
                             "sample",         "respond",       "import-responses", "evaluate",
                             "label",          "report"};

}  // namespace

int stage_position(const std::string& stage) {
    std::string base = stage.substr(0, stage.find(':'));
    if (base == "import-responses") {
        base = "respond";  // same slot in the flow
    }
    for (size_t i = 0; i < std::size(kStageOrder); ++i) {
        if (base == kStageOrder[i]) {
            return static_cast<int>(i);
        }
    }
    return static_cast<int>(std::size(kStageOrder));
}

RunManifest RunManifest::load_or_create(const fs::path& run_dir,
                                        const std::string& config_digest) {
    RunManifest m;
    m.run_dir_ = run_dir;
    m.config_digest_ = config_digest;
    fs::path path = run_dir / "manifest.json";
    if (fs::exists(path)) {
        json j = json::parse(read_file(path), nullptr, false);
        if (!j.is_discarded() && j.is_object()) {
            m.run_id_ = j.value("run_id", "");
            json stages = j.value("stages", json::object());
            for (const auto& [name, info] : stages.items()) {
                StageInfo s;
                s.status = info.value("status", "pending");
                s.input_digest = info.value("input_digest", "");
                s.artifacts = info.value("artifacts", std::vector<std::string>{});
                s.error = info.value("error", "");
                m.stages_[name] = std::move(s);
            }
        }
    }
    if (m.run_id_.empty()) {
        m.run_id_ = short_digest(config_digest + "|" + run_dir.filename().string());
    }
    return m;
}

bool RunManifest::up_to_date(const std::string& stage, const std::string& input_digest) const {
    auto it = stages_.find(stage);
    if (it == stages_.end() || it->second.status != "done" ||
        it->second.input_digest != input_digest) {
        return false;
    }
    for (const auto& artifact : it->second.artifacts) {
        if (!fs::exists(run_dir_ / artifact)) {
            return false;
        }
    }
    return true;
}

void RunManifest::start(const std::string& stage, const std::string& input_digest) {
    auto& info = stages_[stage];
    if (info.status == "done" && info.input_digest != input_digest) {
        invalidate_downstream(stage);
    }
    info.status = "running";
    info.input_digest = input_digest;
    info.error.clear();
    save();
}

void RunManifest::finish(const std::string& stage, const std::vector<fs::path>& artifacts) {
    auto& info = stages_[stage];
    info.status = "done";
    info.artifacts.clear();
    for (const auto& artifact : artifacts) {
        info.artifacts.push_back(fs::relative(artifact, run_dir_).string());
    }
    save();
}

void RunManifest::fail(const std::string& stage, const std::string& error) {
    auto& info = stages_[stage];
    info.status = "failed";
    info.error = error;
    save();
}

const StageInfo* RunManifest::stage(const std::string& name) const {
    auto it = stages_.find(name);
    return it == stages_.end() ? nullptr : &it->second;
}

void RunManifest::invalidate_downstream(const std::string& stage) {
    int position = stage_position(stage);
    for (auto& [name, info] : stages_) {
        if (name != stage && stage_position(name) > position && info.status == "done") {
            info.status = "pending";
        }
    }
}

void RunManifest::save() const {
    json stages = json::object();
    for (const auto& [name, info] : stages_) {
        stages[name] = json{{"status", info.status},
                            {"input_digest", info.input_digest},
                            {"artifacts", info.artifacts},
                            {"error", info.error},
                            {"updated", std::time(nullptr)}};
    }
    json j{{"run_id", run_id_}, {"config_digest", config_digest_}, {"stages", stages}};
    write_file_atomic(run_dir_ / "manifest.json", j.dump(2));
}

}  // namespace hypobench
