// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/llm/chat.hpp>

#include <atomic>
#include <string>
#include <vector>

namespace openti::llm
{

/// Serves a recorded transcript: the i-th call returns completions[i]; once
/// exhausted the final completion repeats. One instance per replayed trial.
class ReplayBackend final : public LlmBackend
{
public:
    explicit ReplayBackend(std::vector<std::string> completions);

    [[nodiscard]] std::string name() const override { return "replay"; }
    [[nodiscard]] std::size_t calls() const noexcept { return _calls.load(); }

private:
    ChatResponse do_complete(const ChatRequest& request) override;

    std::vector<std::string> _completions;
    std::atomic<std::size_t> _calls {0};
};

} // namespace openti::llm
