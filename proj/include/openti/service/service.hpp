// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/agent/dispatcher.hpp>

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace httplib
{
class Server;
}

namespace openti::service
{

struct ServiceConfig
{
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path workspace;
    std::filesystem::path data_dir;
    bool offline = true;
    std::string llm = "mock"; // mock | remote
    std::string mock_script;  // defaults to <data_dir>/mock/chat.json
    int max_query = 3;
    std::uint64_t seed = 0;
    std::vector<std::string> cors_allow;

    /// Port in (0, 65536), writable workspace, known backend selector.
    void validate() const;
};

/// Builds the model backend for one new session.
using SessionBackendFactory = std::function<llm::BackendPtr()>;

/// Backend factory for the configured selector.
SessionBackendFactory backend_factory(const ServiceConfig& config);

/// Suggested prompts: the quoted human request of each tool's Example field.
nlohmann::json hints(const std::vector<agent::ToolDescriptor>& catalog);

/// Catalog view: the primary tools, plus the names of auxiliary ones.
nlohmann::json tools_json(const agent::ToolRegistry& registry);

/// Content type by file extension.
std::string content_type(const std::filesystem::path& file);

/// Reply body for one dispatch; attachment files become artifact URIs.
nlohmann::json reply_json(const agent::DispatchOutcome& outcome, agent::Session& session);

/// The HTTP service. start() binds and serves on a background thread;
/// stop() ends open streams and waits for in-flight dispatches.
class Service
{
public:
    Service(ServiceConfig config, std::shared_ptr<const agent::ToolRegistry> registry, SessionBackendFactory backend);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Throws BindError when the address cannot be bound.
    void start();
    void stop();
    /// Blocks until the server thread exits.
    void wait();

    [[nodiscard]] int port() const noexcept { return _config.port; }
    [[nodiscard]] bool running() const noexcept { return _running; }
    [[nodiscard]] const ServiceConfig& config() const noexcept { return _config; }

    agent::SessionPtr create_session();
    [[nodiscard]] agent::SessionPtr find_session(const std::string& id) const;

private:
    struct Entry
    {
        agent::SessionPtr session;
        std::shared_ptr<agent::Agent> agent;
    };
    [[nodiscard]] std::shared_ptr<Entry> entry(const std::string& id) const;
    void routes();

    ServiceConfig _config;
    std::shared_ptr<const agent::ToolRegistry> _registry;
    SessionBackendFactory _backend;
    std::unique_ptr<httplib::Server> _server;
    std::thread _thread;
    mutable std::mutex _mutex;
    std::map<std::string, std::shared_ptr<Entry>> _sessions;
    std::uint64_t _serial = 0;
    std::atomic<bool> _running {false};
    std::atomic<bool> _stopping {false};
};

} // namespace openti::service
