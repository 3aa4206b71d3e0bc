// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/url.hpp>
#include <openti/llm/remote_backend.hpp>

#include <httplib.h>

#include <thread>

namespace openti::llm
{

RemoteBackend::RemoteBackend(RemoteConfig config): _config(std::move(config))
{
    require(!_config.endpoint.empty(), "remote LLM endpoint is not configured");
    auto parts = split_url(_config.endpoint);
    _origin = parts.origin;
    _path = parts.path;
    const std::string suffix = "/chat/completions";
    if (_path.size() < suffix.size() || _path.compare(_path.size() - suffix.size(), suffix.size(), suffix) != 0)
    {
        if (!_path.empty() && _path.back() == '/')
            _path.pop_back();
        _path += suffix;
    }
}

ChatResponse RemoteBackend::do_complete(const ChatRequest& request)
{
    auto body = request.to_openai_json();
    if (body["model"].get<std::string>().empty())
        body["model"] = _config.model;
    const auto payload = body.dump();

    httplib::Headers headers;
    if (!_config.api_key.empty())
        headers.emplace("Authorization", "Bearer " + _config.api_key);

    std::string last_failure;
    for (int attempt = 0; attempt <= _config.max_retries; ++attempt)
    {
        if (attempt > 0)
            std::this_thread::sleep_for(_config.backoff_base * (1 << (attempt - 1)));

        httplib::Client client(_origin);
        client.set_connection_timeout(_config.connect_timeout);
        client.set_read_timeout(_config.timeout);
        auto res = client.Post(_path, headers, payload, "application/json");
        if (!res)
        {
            last_failure = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403)
            fail(Errc::AuthError, "endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
        if (res->status == 429 || res->status >= 500)
        {
            last_failure = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            fail(Errc::ServiceError, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));

        auto doc = nlohmann::json::parse(res->body, nullptr, false);
        if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
            fail(Errc::ServiceError, "malformed chat-completions response");
        const auto& choice = doc["choices"][0];
        ChatResponse out;
        if (choice.contains("message") && choice["message"].contains("content")
            && choice["message"]["content"].is_string())
            out.content = choice["message"]["content"].get<std::string>();
        const auto finish = choice.value("finish_reason", std::string("stop"));
        out.finish_reason = finish == "length" ? FinishReason::length : FinishReason::stop;
        if (doc.contains("usage"))
        {
            out.usage.prompt_tokens = doc["usage"].value("prompt_tokens", 0);
            out.usage.completion_tokens = doc["usage"].value("completion_tokens", 0);
        }
        return out;
    }
    fail(Errc::NetworkError, "LLM endpoint unreachable after " + std::to_string(_config.max_retries)
                                 + " retries (" + last_failure + ")");
}

} // namespace openti::llm
