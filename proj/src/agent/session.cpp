// SPDX-License-Identifier: Apache-2.0
#include <openti/agent/session.hpp>
#include <openti/core/error.hpp>

#include <cctype>
#include <fstream>

namespace openti::agent
{

std::string_view to_string(Speaker speaker) noexcept
{
    return speaker == Speaker::user ? "user" : "agent";
}

std::string_view to_string(TraceKind kind) noexcept
{
    switch (kind)
    {
        case TraceKind::thought: return "thought";
        case TraceKind::action: return "action";
        case TraceKind::observation: return "observation";
        case TraceKind::error: return "error";
    }
    return "thought";
}

nlohmann::json TraceEvent::to_json() const
{
    nlohmann::json j {{"kind", to_string(kind)}, {"text", text}, {"timestamp", timestamp}};
    j["tool_name"] = tool_name ? nlohmann::json(*tool_name) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json SessionState::to_json() const
{
    nlohmann::json j;
    j["session_id"] = session_id;
    j["transcript"] = nlohmann::json::array();
    for (const auto& e: transcript)
        j["transcript"].push_back({{"speaker", to_string(e.speaker)}, {"text", e.text}});
    j["trace"] = nlohmann::json::array();
    for (const auto& e: trace)
        j["trace"].push_back(e.to_json());
    j["artifacts"] = nlohmann::json::array();
    for (const auto& a: artifacts)
        j["artifacts"].push_back({{"name", a.name}, {"kind", to_string(a.kind)}, {"label", a.label}});
    return j;
}

bool valid_session_id(std::string_view id) noexcept
{
    if (id.empty() || id.size() > 64)
        return false;
    for (char c: id)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
            return false;
    return true;
}

Session::Session(std::string id, const std::filesystem::path& workspace_root)
    : _id(std::move(id))
{
    require(valid_session_id(_id), "invalid session id '" + _id + "'");
    _dir = std::filesystem::absolute(workspace_root) / "sessions" / _id;
    std::error_code ec;
    std::filesystem::create_directories(_dir / "artifacts", ec);
    if (ec)
        fail(Errc::IoError, "cannot create session directory " + _dir.string() + ": " + ec.message());
}

void Session::add_transcript(Speaker speaker, std::string text)
{
    std::lock_guard lock(_mutex);
    _transcript.push_back({speaker, std::move(text)});
}

const TraceEvent& Session::append_trace(TraceKind kind, std::string text, std::optional<std::string> tool)
{
    require(kind != TraceKind::action || tool.has_value(), "action trace events need a tool name");
    std::lock_guard lock(_mutex);
    TraceEvent ev {kind, std::move(text), std::move(tool), _trace.size() + 1};
    {
        std::ofstream out(trace_path(), std::ios::app | std::ios::binary);
        if (!out)
            fail(Errc::IoError, "cannot append to " + trace_path().string());
        out << ev.to_json().dump() << '\n';
    }
    _trace.push_back(std::move(ev));
    _changed.notify_all();
    return _trace.back();
}

std::optional<std::string> Session::add_artifact(const std::filesystem::path& file, Attachment::Kind kind,
                                                 std::string label)
{
    std::error_code ec;
    const auto root = std::filesystem::weakly_canonical(artifacts_dir(), ec);
    const auto target = std::filesystem::weakly_canonical(file, ec);
    if (ec || !std::filesystem::is_regular_file(target))
        return std::nullopt;
    const auto rel = target.lexically_relative(root);
    if (rel.empty() || *rel.begin() == "..")
        return std::nullopt;
    const auto name = rel.generic_string();
    std::lock_guard lock(_mutex);
    for (const auto& a: _artifacts)
        if (a.name == name)
            return name;
    _artifacts.push_back({name, target, kind, std::move(label)});
    return name;
}

SessionState Session::snapshot() const
{
    std::lock_guard lock(_mutex);
    return {_id, _transcript, _trace, _artifacts};
}

std::vector<TranscriptEntry> Session::transcript() const
{
    std::lock_guard lock(_mutex);
    return _transcript;
}

std::vector<TraceEvent> Session::trace_since(std::size_t index) const
{
    std::lock_guard lock(_mutex);
    if (index >= _trace.size())
        return {};
    return {_trace.begin() + static_cast<std::ptrdiff_t>(index), _trace.end()};
}

std::size_t Session::trace_size() const
{
    std::lock_guard lock(_mutex);
    return _trace.size();
}

std::vector<TraceEvent> Session::wait_trace(std::size_t index, std::chrono::milliseconds timeout)
{
    std::unique_lock lock(_mutex);
    _changed.wait_for(lock, timeout, [&] { return _closed || _trace.size() > index; });
    if (index >= _trace.size())
        return {};
    return {_trace.begin() + static_cast<std::ptrdiff_t>(index), _trace.end()};
}

void Session::close()
{
    std::lock_guard lock(_mutex);
    _closed = true;
    _changed.notify_all();
}

bool Session::closed() const
{
    std::lock_guard lock(_mutex);
    return _closed;
}

} // namespace openti::agent
