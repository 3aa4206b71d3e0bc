// SPDX-License-Identifier: Apache-2.0
#include <openti/agent/registry.hpp>
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>

#include <sstream>

namespace openti::agent
{

std::size_t ToolRegistry::register_tool(ToolDescriptor descriptor, ToolHandler handler)
{
    descriptor.validate();
    require(static_cast<bool>(handler), "tool '" + descriptor.name + "' has no handler");
    if (find(descriptor.name))
        fail(Errc::DuplicateName, "tool '" + descriptor.name + "' is already registered", {descriptor.name});
    _tools.push_back({std::move(descriptor), std::move(handler)});
    return _tools.size() - 1;
}

const RegisteredTool* ToolRegistry::find(std::string_view name) const noexcept
{
    for (const auto& t: _tools)
        if (t.descriptor.name == name)
            return &t;
    return nullptr;
}

std::vector<ToolDescriptor> ToolRegistry::catalog() const
{
    std::vector<ToolDescriptor> out;
    out.reserve(_tools.size());
    for (const auto& t: _tools)
        out.push_back(t.descriptor);
    return out;
}

std::string render_system_prompt(const std::vector<ToolDescriptor>& catalog, const AblationMask& mask)
{
    require(!catalog.empty(), "cannot render a prompt for an empty catalog");
    std::ostringstream out;
    out << "You are a traffic analysis assistant. You can call the tools listed below.\n";
    for (const auto& tool: catalog)
    {
        std::vector<std::string> names;
        for (const auto& p: tool.params)
            names.push_back(p.required ? p.name : p.name + "?");
        out << "\nTool: " << tool.name << "(" << join(names, ", ") << ")\n";
        for (auto f: kPromptFields)
        {
            if (mask.count(f) || tool.field(f).empty())
                continue;
            out << "[" << label(f) << "] " << tool.field(f) << "\n";
        }
    }
    out << "\n" << llm::action_grammar() << "\n";
    return out.str();
}

} // namespace openti::agent
