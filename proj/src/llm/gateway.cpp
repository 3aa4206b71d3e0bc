// SPDX-License-Identifier: Apache-2.0
#include <openti/core/env.hpp>
#include <openti/core/error.hpp>
#include <openti/llm/gateway.hpp>
#include <openti/llm/mock_backend.hpp>
#include <openti/llm/remote_backend.hpp>

namespace openti::llm
{

GatewaySettings settings_from_env(const std::string& mock_script)
{
    GatewaySettings s;
    s.mock_script = mock_script;
    s.endpoint = env_var("OPENTI_LLM_ENDPOINT").value_or("");
    s.api_key = env_var("OPENTI_LLM_API_KEY").value_or("");
    s.model = env_var("OPENTI_LLM_MODEL").value_or(s.model);
    s.kind = (offline_from_env() || s.endpoint.empty()) ? BackendKind::mock : BackendKind::remote;
    return s;
}

BackendPtr make_backend(const GatewaySettings& settings)
{
    if (settings.kind == BackendKind::remote)
    {
        RemoteConfig cfg;
        cfg.endpoint = settings.endpoint;
        cfg.api_key = settings.api_key;
        cfg.model = settings.model;
        return std::make_shared<RemoteBackend>(std::move(cfg));
    }
    require(!settings.mock_script.empty(), "mock backend selected but no script file given");
    return std::make_shared<MockBackend>(MockBackend::from_file(settings.mock_script));
}

} // namespace openti::llm
