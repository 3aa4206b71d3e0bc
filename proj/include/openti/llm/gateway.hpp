// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/llm/chat.hpp>

#include <optional>
#include <string>

namespace openti::llm
{

enum class BackendKind
{
    mock,
    remote,
};

struct GatewaySettings
{
    BackendKind kind = BackendKind::mock;
    std::string mock_script;  // path; required for mock
    std::string endpoint;
    std::string api_key;
    std::string model = "gpt-3.5-turbo";
};

/// Reads OPENTI_LLM_ENDPOINT / _API_KEY / _MODEL. OPENTI_OFFLINE=1 or a
/// missing endpoint selects the mock backend with `mock_script`.
GatewaySettings settings_from_env(const std::string& mock_script);

BackendPtr make_backend(const GatewaySettings& settings);

/// Single entry point for one completion on a given backend.
inline ChatResponse complete(const ChatRequest& request, LlmBackend& backend)
{
    return backend.complete(request);
}

} // namespace openti::llm
