// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/agent/tool.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace openti::agent
{

enum class Speaker
{
    user,
    agent,
};

std::string_view to_string(Speaker speaker) noexcept;

struct TranscriptEntry
{
    Speaker speaker = Speaker::user;
    std::string text;
};

enum class TraceKind
{
    thought,
    action,
    observation,
    error,
};

std::string_view to_string(TraceKind kind) noexcept;

struct TraceEvent
{
    TraceKind kind = TraceKind::thought;
    std::string text;
    std::optional<std::string> tool_name;
    std::uint64_t timestamp = 0; // per-session sequence number, starts at 1

    [[nodiscard]] nlohmann::json to_json() const;
};

struct ArtifactRef
{
    std::string name; // relative to the artifact directory, '/'-separated
    std::filesystem::path path;
    Attachment::Kind kind = Attachment::Kind::file;
    std::string label;
};

/// Point-in-time copy of a session, safe to hand to other threads.
struct SessionState
{
    std::string session_id;
    std::vector<TranscriptEntry> transcript;
    std::vector<TraceEvent> trace;
    std::vector<ArtifactRef> artifacts;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// One conversation and its workspace `<root>/sessions/<id>/`. The trace is
/// append-only and mirrored to trace.jsonl. Readers may wait for new events
/// while a dispatch runs.
class Session
{
public:
    Session(std::string id, const std::filesystem::path& workspace_root);

    [[nodiscard]] const std::string& id() const noexcept { return _id; }
    [[nodiscard]] const std::filesystem::path& dir() const noexcept { return _dir; }
    [[nodiscard]] std::filesystem::path artifacts_dir() const { return _dir / "artifacts"; }
    [[nodiscard]] std::filesystem::path trace_path() const { return _dir / "trace.jsonl"; }

    void add_transcript(Speaker speaker, std::string text);
    const TraceEvent& append_trace(TraceKind kind, std::string text, std::optional<std::string> tool = std::nullopt);

    /// Registers a file under the artifact directory; other paths are ignored.
    /// Returns the artifact name when registered.
    std::optional<std::string> add_artifact(const std::filesystem::path& file, Attachment::Kind kind, std::string label);

    [[nodiscard]] SessionState snapshot() const;
    [[nodiscard]] std::vector<TranscriptEntry> transcript() const;
    [[nodiscard]] std::vector<TraceEvent> trace_since(std::size_t index) const;
    [[nodiscard]] std::size_t trace_size() const;

    /// Blocks until the trace has more than `index` events, the session is
    /// closed, or the timeout passes. Returns the new events.
    std::vector<TraceEvent> wait_trace(std::size_t index, std::chrono::milliseconds timeout);

    /// Wakes every waiter; subsequent waits return immediately.
    void close();
    [[nodiscard]] bool closed() const;

    /// Held for the whole of one dispatch.
    [[nodiscard]] std::mutex& dispatch_mutex() noexcept { return _dispatch; }

private:
    std::string _id;
    std::filesystem::path _dir;
    mutable std::mutex _mutex;
    std::condition_variable _changed;
    std::mutex _dispatch;
    std::vector<TranscriptEntry> _transcript;
    std::vector<TraceEvent> _trace;
    std::vector<ArtifactRef> _artifacts;
    bool _closed = false;
};

using SessionPtr = std::shared_ptr<Session>;

/// True for identifiers usable as a directory name: [A-Za-z0-9_-]{1,64}.
bool valid_session_id(std::string_view id) noexcept;

} // namespace openti::agent
