// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/agent/tool.hpp>

#include <cstddef>
#include <string_view>
#include <vector>

namespace openti::agent
{

struct RegisteredTool
{
    ToolDescriptor descriptor;
    ToolHandler handler;
};

/// Ordered tool catalog. Populated at startup, read-only afterwards.
class ToolRegistry
{
public:
    /// Throws InvalidArgument on an invalid descriptor, DuplicateName on reuse.
    /// Returns the catalog index.
    std::size_t register_tool(ToolDescriptor descriptor, ToolHandler handler);

    [[nodiscard]] const RegisteredTool* find(std::string_view name) const noexcept;
    [[nodiscard]] std::vector<ToolDescriptor> catalog() const;
    [[nodiscard]] const std::vector<RegisteredTool>& tools() const noexcept { return _tools; }
    [[nodiscard]] std::size_t size() const noexcept { return _tools.size(); }
    [[nodiscard]] bool empty() const noexcept { return _tools.empty(); }

private:
    std::vector<RegisteredTool> _tools;
};

/// Renders the catalog for the model. For each tool a signature line
/// `Tool: name(param, ...)` then every unmasked field as `[Label] text`, in
/// the fixed order of kPromptFields; the action grammar closes the prompt.
std::string render_system_prompt(const std::vector<ToolDescriptor>& catalog, const AblationMask& mask = {});

} // namespace openti::agent
