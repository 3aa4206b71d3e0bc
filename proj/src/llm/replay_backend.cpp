// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/llm/replay_backend.hpp>

#include <algorithm>

namespace openti::llm
{

ReplayBackend::ReplayBackend(std::vector<std::string> completions): _completions(std::move(completions))
{
    require(!_completions.empty(), "replay transcript has no completions");
}

ChatResponse ReplayBackend::do_complete(const ChatRequest&)
{
    const auto i = std::min(_calls.fetch_add(1), _completions.size() - 1);
    ChatResponse out;
    out.content = _completions[i];
    out.usage.completion_tokens = approx_tokens(out.content);
    return out;
}

} // namespace openti::llm
