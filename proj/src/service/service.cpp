// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/llm/gateway.hpp>
#include <openti/service/service.hpp>
#include <openti/toolset/toolset.hpp>

#include <httplib.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <regex>

namespace openti::service
{

namespace fs = std::filesystem;
using nlohmann::json;

void ServiceConfig::validate() const
{
    require(port > 0 && port < 65536, "port must be in 1..65535");
    require(!workspace.empty(), "workspace is required");
    require(llm == "mock" || llm == "remote", "llm must be mock or remote");
    require(max_query >= 1, "max_query must be at least 1");
    std::error_code ec;
    fs::create_directories(workspace, ec);
    const auto probe = workspace / ".write_probe";
    {
        std::ofstream out(probe);
        if (!out)
            fail(Errc::IoError, "workspace is not writable: " + workspace.string());
    }
    fs::remove(probe, ec);
}

SessionBackendFactory backend_factory(const ServiceConfig& config)
{
    auto script = config.mock_script.empty() ? (config.data_dir / "mock" / "chat.json").string() : config.mock_script;
    llm::GatewaySettings s = llm::settings_from_env(script);
    s.kind = config.llm == "remote" && !config.offline ? llm::BackendKind::remote : llm::BackendKind::mock;
    if (s.kind == llm::BackendKind::remote)
        require(!s.endpoint.empty(), "remote backend needs OPENTI_LLM_ENDPOINT");
    auto shared = llm::make_backend(s);
    return [shared] { return shared; };
}

json hints(const std::vector<agent::ToolDescriptor>& catalog)
{
    static const std::regex quoted(R"re(Human ask "([^"]+)")re");
    json out = json::array();
    for (const auto& d: catalog)
    {
        std::smatch m;
        if (std::regex_search(d.example, m, quoted))
            out.push_back({{"tool", d.name}, {"prompt", m[1].str()}});
    }
    return out;
}

json tools_json(const agent::ToolRegistry& registry)
{
    json tools = json::array();
    json aux = json::array();
    for (const auto& t: registry.tools())
    {
        const auto& d = t.descriptor;
        if (toolset::is_auxiliary(d.name))
        {
            aux.push_back(d.name);
            continue;
        }
        json params = json::array();
        for (const auto& p: d.params)
        {
            json pj {{"name", p.name}, {"type", p.type_label()}, {"required", p.required}, {"doc", p.doc}};
            if (!p.enum_values.empty())
                pj["enum"] = p.enum_values;
            params.push_back(std::move(pj));
        }
        tools.push_back({{"name", d.name}, {"description", d.description}, {"params", std::move(params)}});
    }
    return {{"tools", std::move(tools)}, {"auxiliary", std::move(aux)}};
}

std::string content_type(const fs::path& file)
{
    static const std::map<std::string, std::string> types {
        {".svg", "image/svg+xml"}, {".png", "image/png"},      {".json", "application/json"},
        {".jsonl", "application/x-ndjson"}, {".csv", "text/csv"}, {".osm", "application/xml"},
        {".xml", "application/xml"}, {".txt", "text/plain"},   {".html", "text/html"}};
    const auto it = types.find(to_lower(file.extension().string()));
    return it == types.end() ? "application/octet-stream" : it->second;
}

json reply_json(const agent::DispatchOutcome& outcome, agent::Session& session)
{
    json atts = json::array();
    for (const auto& a: outcome.attachments)
    {
        std::string uri = a.target;
        if (a.kind != agent::Attachment::Kind::link)
        {
            const auto name = session.add_artifact(a.target, a.kind, a.label);
            if (!name)
                continue;
            uri = "/api/artifacts/" + session.id() + "/" + *name;
        }
        atts.push_back({{"kind", agent::to_string(a.kind)}, {"uri", uri}, {"label", a.label}});
    }
    return {{"reply", outcome.reply}, {"outcome", agent::to_string(outcome.status)}, {"attachments", std::move(atts)}};
}

namespace
{

int http_status(Errc code)
{
    switch (code)
    {
    case Errc::NotFound:
        return 404;
    case Errc::InvalidArgument:
    case Errc::MissingParams:
    case Errc::TypeMismatch:
    case Errc::SchemaError:
        return 400;
    default:
        return 500;
    }
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message)
{
    res.status = status;
    res.set_content(json {{"error", {{"code", code}, {"message", message}}}}.dump(), "application/json");
}

void send_json(httplib::Response& res, const json& body, int status = 200)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

std::string random_suffix()
{
    static std::mutex m;
    static std::mt19937_64 rng {std::random_device {}()};
    std::lock_guard lock(m);
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (auto v = rng(), i = decltype(v) {0}; i < 8; ++i, v >>= 4)
        s += hex[v & 15];
    return s;
}

} // namespace

Service::Service(ServiceConfig config, std::shared_ptr<const agent::ToolRegistry> registry,
                 SessionBackendFactory backend)
    : _config(std::move(config)), _registry(std::move(registry)), _backend(std::move(backend))
{
    _config.validate();
    require(_registry != nullptr, "service needs a tool registry");
    require(static_cast<bool>(_backend), "service needs a backend factory");
    _config.workspace = fs::absolute(_config.workspace);
}

Service::~Service()
{
    stop();
}

agent::SessionPtr Service::create_session()
{
    std::string id;
    {
        std::lock_guard lock(_mutex);
        id = "s" + std::to_string(++_serial) + "-" + random_suffix();
    }
    auto e = std::make_shared<Entry>();
    e->session = std::make_shared<agent::Session>(id, _config.workspace);
    agent::AgentConfig ac;
    ac.max_query = _config.max_query;
    ac.data_dir = _config.data_dir;
    ac.offline = _config.offline;
    ac.seed = _config.seed;
    e->agent = std::make_shared<agent::Agent>(_registry, _backend(), ac);
    std::lock_guard lock(_mutex);
    _sessions[id] = e;
    return e->session;
}

std::shared_ptr<Service::Entry> Service::entry(const std::string& id) const
{
    std::lock_guard lock(_mutex);
    const auto it = _sessions.find(id);
    return it == _sessions.end() ? nullptr : it->second;
}

agent::SessionPtr Service::find_session(const std::string& id) const
{
    const auto e = entry(id);
    return e ? e->session : nullptr;
}

void Service::routes()
{
    auto& s = *_server;

    s.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
        const auto origin = req.get_header_value("Origin");
        const auto& allow = _config.cors_allow;
        if (!origin.empty() &&
            (std::find(allow.begin(), allow.end(), origin) != allow.end() ||
             std::find(allow.begin(), allow.end(), "*") != allow.end()))
        {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID");
        }
        if (req.method == "OPTIONS")
        {
            res.status = 204;
            return httplib::Server::HandlerResponse::Handled;
        }
        return httplib::Server::HandlerResponse::Unhandled;
    });

    s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try
        {
            std::rethrow_exception(ep);
        }
        catch (const Error& e)
        {
            send_error(res, http_status(e.code()), to_string(e.code()), e.what());
        }
        catch (const json::exception& e)
        {
            send_error(res, 400, "InvalidArgument", e.what());
        }
        catch (const std::exception& e)
        {
            send_error(res, 500, "ServiceError", e.what());
        }
    });

    s.Post("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, {{"session_id", create_session()->id()}}, 201);
    });

    s.Get(R"(/api/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const auto e = entry(req.matches[1]);
        if (!e)
            return send_error(res, 404, "NotFound", "unknown session");
        send_json(res, e->session->snapshot().to_json());
    });

    s.Post(R"(/api/sessions/([^/]+)/messages)", [this](const httplib::Request& req, httplib::Response& res) {
        const auto e = entry(req.matches[1]);
        if (!e)
            return send_error(res, 404, "NotFound", "unknown session");
        const auto body = json::parse(req.body);
        if (!body.is_object() || !body.contains("text") || !body["text"].is_string() ||
            trim(body["text"].get<std::string>()).empty())
            return send_error(res, 400, "InvalidArgument", "body must be {\"text\": <non-empty string>}");
        const auto outcome = e->agent->dispatch(*e->session, body["text"].get<std::string>());
        send_json(res, reply_json(outcome, *e->session));
    });

    s.Get(R"(/api/sessions/([^/]+)/stream)", [this](const httplib::Request& req, httplib::Response& res) {
        const auto e = entry(req.matches[1]);
        if (!e)
            return send_error(res, 404, "NotFound", "unknown session");
        std::size_t from = 0;
        auto last = req.get_header_value("Last-Event-ID");
        if (req.has_param("from"))
            last = req.get_param_value("from");
        if (!last.empty())
            from = std::stoul(last);
        res.set_header("Cache-Control", "no-cache");
        auto session = e->session;
        res.set_chunked_content_provider(
            "text/event-stream", [this, session, next = from](std::size_t, httplib::DataSink& sink) mutable {
                while (!_stopping && sink.is_writable())
                {
                    const auto events = session->wait_trace(next, std::chrono::milliseconds(200));
                    for (const auto& ev: events)
                    {
                        const auto frame = "id: " + std::to_string(ev.timestamp) + "\nevent: trace\ndata: " +
                                           ev.to_json().dump() + "\n\n";
                        if (!sink.write(frame.data(), frame.size()))
                            return false;
                        ++next;
                    }
                    if (session->closed())
                        break;
                    if (events.empty())
                    {
                        static const std::string ping = ": keep-alive\n\n";
                        if (!sink.write(ping.data(), ping.size()))
                            return false;
                    }
                }
                sink.done();
                return true;
            });
    });

    s.Get("/api/tools", [this](const httplib::Request&, httplib::Response& res) { send_json(res, tools_json(*_registry)); });

    s.Get("/api/hints", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, {{"hints", hints(_registry->catalog())}});
    });

    s.Get(R"(/api/artifacts/([^/]+)/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
        const auto e = entry(req.matches[1]);
        if (!e)
            return send_error(res, 404, "NotFound", "unknown session");
        std::error_code ec;
        const auto root = fs::weakly_canonical(e->session->artifacts_dir(), ec);
        const auto file = fs::weakly_canonical(root / fs::path(req.matches[2].str()).relative_path(), ec);
        const auto rel = file.lexically_relative(root);
        if (ec || rel.empty() || *rel.begin() == ".." || !fs::is_regular_file(file))
            return send_error(res, 404, "NotFound", "no such artifact");
        res.set_content(read_file(file.string()), content_type(file));
    });
}

void Service::start()
{
    require(!_running, "service already running");
    _stopping = false;
    _server = std::make_unique<httplib::Server>();
    _server->set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    routes();
    if (!_server->bind_to_port(_config.host, _config.port))
        fail(Errc::BindError, "cannot bind " + _config.host + ":" + std::to_string(_config.port),
             {_config.host, std::to_string(_config.port)});
    _running = true;
    _thread = std::thread([this] { _server->listen_after_bind(); });
    _server->wait_until_ready();
}

void Service::stop()
{
    if (!_server)
        return;
    _stopping = true;
    {
        std::lock_guard lock(_mutex);
        for (auto& [id, e]: _sessions)
            e->session->close();
    }
    _server->stop();
    wait();
    _running = false;
    _server.reset();
}

void Service::wait()
{
    if (_thread.joinable())
        _thread.join();
}

} // namespace openti::service
