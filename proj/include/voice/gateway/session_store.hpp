#pragma once

#include "voice/assessment/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace voice::gateway {

class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// On-disk layout, one directory per session:
///   state.json          engine snapshot, replaced atomically
///   transcript.jsonl    one turn per line, append-only
///   report.json         final report, written once via temp file + rename
///   videos/<component>.bin and videos/meta.json
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path session_dir(const std::string& session_id) const;

    void save_state(const std::string& session_id, const nlohmann::ordered_json& snapshot);
    void append_turns(const std::string& session_id, const assessment::Transcript& turns);
    void write_report(const std::string& session_id, const std::string& report_json);
    void save_video(const std::string& session_id, const assessment::VideoRef& ref, std::string_view bytes);

    bool has_report(const std::string& session_id) const;
    /// Throws NotFound for an unknown session or a session without a report.
    std::string load_report(const std::string& session_id) const;
    std::optional<std::string> load_video(const std::string& session_id, assessment::VideoComponent component) const;

    nlohmann::ordered_json load_state(const std::string& session_id) const;
    assessment::Transcript load_transcript(const std::string& session_id) const;
    std::vector<assessment::VideoRef> load_videos(const std::string& session_id) const;

    std::vector<std::string> session_ids() const;

    /// Writes an aborted report for every session that has a state snapshot
    /// but no report. Returns the recovered session ids.
    std::vector<std::string> recover();

private:
    static void write_atomic(const std::filesystem::path& path, std::string_view content);

    std::filesystem::path root_;
    mutable std::mutex video_meta_mutex_;
};

}  // namespace voice::gateway
