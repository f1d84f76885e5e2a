#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hypobench/jsonl.hpp"

namespace hypobench {

// One command process at a time per run directory. The lock file holds the
// owning pid; a stale lock is reported, not stolen.
class RunLock {
public:
    explicit RunLock(const std::filesystem::path& run_dir);
    ~RunLock();

    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::filesystem::path path_;
    bool held_ = false;
};

struct StageInfo {
    std::string status = "pending";  // pending | running | done | failed
    std::string input_digest;
    std::vector<std::string> artifacts;
    std::string error;
};

// Per-run ledger of stage states and artifact paths. A done stage whose
// inputs have not changed is never rerun; rerunning a stage with changed
// inputs resets everything downstream of it.
class RunManifest {
public:
    static RunManifest load_or_create(const std::filesystem::path& run_dir,
                                      const std::string& config_digest);

    // True when the stage is done under this exact input digest and all its
    // recorded artifacts still exist (no-op condition).
    bool up_to_date(const std::string& stage, const std::string& input_digest) const;

    void start(const std::string& stage, const std::string& input_digest);
    void finish(const std::string& stage, const std::vector<std::filesystem::path>& artifacts);
    void fail(const std::string& stage, const std::string& error);

    const StageInfo* stage(const std::string& name) const;
    const std::string& run_id() const { return run_id_; }

    void save() const;

private:
    void invalidate_downstream(const std::string& stage);

    std::filesystem::path run_dir_;
    std::string run_id_;
    std::string config_digest_;
    std::map<std::string, StageInfo> stages_;
};

// Base ordering used for downstream invalidation; model-parameterized stages
// ("respond:gpt-x") share their base stage's position.
int stage_position(const std::string& stage);

}  // namespace hypobench
