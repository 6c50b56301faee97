#include "voice/gateway/session_store.hpp"

#include "voice/agents/engine.hpp"
#include "voice/assessment/report.hpp"
#include "voice/assessment/state_json.hpp"

#include <fstream>
#include <sstream>

namespace voice::gateway {

namespace fs = std::filesystem;
using namespace voice::assessment;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool safe_id(const std::string& id) {
    if (id.empty() || id.size() > 128) return false;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_' || c == '.';
        if (!ok) return false;
    }
    return id != "." && id != "..";
}

}  // namespace

SessionStore::SessionStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_);
}

fs::path SessionStore::session_dir(const std::string& session_id) const {
    if (!safe_id(session_id)) throw NotFound("invalid session id '" + session_id + "'");
    return root_ / session_id;
}

void SessionStore::write_atomic(const fs::path& path, std::string_view content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

void SessionStore::save_state(const std::string& session_id, const nlohmann::ordered_json& snapshot) {
    const fs::path dir = session_dir(session_id);
    fs::create_directories(dir);
    write_atomic(dir / "state.json", snapshot.dump(2));
}

void SessionStore::append_turns(const std::string& session_id, const Transcript& turns) {
    if (turns.empty()) return;
    const fs::path dir = session_dir(session_id);
    fs::create_directories(dir);
    std::ofstream out(dir / "transcript.jsonl", std::ios::app | std::ios::binary);
    for (const Turn& t : turns) {
        nlohmann::ordered_json j{{"speaker", enum_name(t.speaker)}, {"text", t.text}, {"at_s", t.at_s}};
        out << j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
    }
}

void SessionStore::write_report(const std::string& session_id, const std::string& report_json) {
    const fs::path dir = session_dir(session_id);
    fs::create_directories(dir);
    write_atomic(dir / "report.json", report_json);
}

void SessionStore::save_video(const std::string& session_id, const VideoRef& ref, std::string_view bytes) {
    const fs::path dir = session_dir(session_id) / "videos";
    fs::create_directories(dir);
    write_atomic(dir / (enum_string(ref.component) + ".bin"), bytes);

    std::lock_guard lock(video_meta_mutex_);
    nlohmann::ordered_json meta = nlohmann::ordered_json::array();
    if (fs::exists(dir / "meta.json")) meta = nlohmann::ordered_json::parse(read_file(dir / "meta.json"));
    nlohmann::ordered_json kept = nlohmann::ordered_json::array();
    for (auto& m : meta) {
        if (m.value("component", "") != enum_name(ref.component)) kept.push_back(m);
    }
    kept.push_back(to_json(ref));
    write_atomic(dir / "meta.json", kept.dump(2));
}

bool SessionStore::has_report(const std::string& session_id) const {
    return safe_id(session_id) && fs::exists(root_ / session_id / "report.json");
}

std::string SessionStore::load_report(const std::string& session_id) const {
    if (!has_report(session_id)) throw NotFound("no report for session '" + session_id + "'");
    return read_file(root_ / session_id / "report.json");
}

std::optional<std::string> SessionStore::load_video(const std::string& session_id, VideoComponent component) const {
    if (!safe_id(session_id)) return std::nullopt;
    const fs::path p = root_ / session_id / "videos" / (enum_string(component) + ".bin");
    if (!fs::exists(p)) return std::nullopt;
    return read_file(p);
}

nlohmann::ordered_json SessionStore::load_state(const std::string& session_id) const {
    return nlohmann::ordered_json::parse(read_file(session_dir(session_id) / "state.json"));
}

Transcript SessionStore::load_transcript(const std::string& session_id) const {
    Transcript out;
    const fs::path p = session_dir(session_id) / "transcript.jsonl";
    if (!fs::exists(p)) return out;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::exception&) {
            break;  // a torn final line from a crash mid-append
        }
        out.push_back(Turn{parse_enum<Speaker>(j.at("speaker"), "speaker"), j.at("text").get<std::string>(),
                           j.at("at_s").get<std::int64_t>()});
    }
    return out;
}

std::vector<VideoRef> SessionStore::load_videos(const std::string& session_id) const {
    std::vector<VideoRef> out;
    const fs::path p = session_dir(session_id) / "videos" / "meta.json";
    if (!fs::exists(p)) return out;
    for (const auto& m : nlohmann::ordered_json::parse(read_file(p))) out.push_back(video_from_json(m));
    return out;
}

std::vector<std::string> SessionStore::session_ids() const {
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(root_)) {
        if (entry.is_directory()) ids.push_back(entry.path().filename().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<std::string> SessionStore::recover() {
    std::vector<std::string> recovered;
    for (const std::string& id : session_ids()) {
        if (has_report(id) || !fs::exists(root_ / id / "state.json")) continue;
        const nlohmann::ordered_json snapshot = load_state(id);
        const Transcript transcript = load_transcript(id);
        std::vector<VideoRef> videos;
        for (const auto& v : snapshot.at("videos")) videos.push_back(video_from_json(v));
        std::int64_t ended_s = snapshot.at("started_s").get<std::int64_t>();
        if (!transcript.empty()) ended_s = std::max(ended_s, transcript.back().at_s);
        const Report report = agents::report_from_snapshot(snapshot, transcript, videos, ended_s);
        write_report(id, serialize_report(report));
        recovered.push_back(id);
    }
    return recovered;
}

}  // namespace voice::gateway
