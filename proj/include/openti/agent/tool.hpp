// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <openti/llm/action.hpp>
#include <openti/llm/chat.hpp>

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace openti::agent
{

enum class ParamType
{
    text,
    bbox,
    path,
    integer,
    real,
    enumeration,
};

std::string_view to_string(ParamType type) noexcept;

struct ParamSpec
{
    std::string name;
    ParamType type = ParamType::text;
    bool required = true;
    std::string doc;
    std::vector<std::string> enum_values; // enumeration only

    [[nodiscard]] std::string type_label() const;
};

/// The five independently removable prompt components, in render order.
enum class PromptField
{
    description,
    format_restriction,
    example,
    reflection,
    emphasis,
};

inline constexpr std::array<PromptField, 5> kPromptFields {
    PromptField::description, PromptField::format_restriction, PromptField::example, PromptField::reflection,
    PromptField::emphasis};

/// "Description", "Format Restriction", ...
std::string_view label(PromptField field) noexcept;

/// Accepts the label ("Format Restriction") or snake_case ("format_restriction"), case-insensitively.
std::optional<PromptField> prompt_field_from_string(std::string_view name);

using AblationMask = std::set<PromptField>;

struct ToolDescriptor
{
    std::string name;
    std::string description;
    std::string format_restriction;
    std::string example;
    std::string reflection;
    std::string emphasis;
    std::vector<ParamSpec> params;

    [[nodiscard]] const std::string& field(PromptField f) const noexcept;

    /// Identifier-shaped name, non-empty description, documented required
    /// params, unique param names, enum params with values.
    void validate() const;
};

struct Attachment
{
    enum class Kind
    {
        image,
        file,
        link,
        table,
    };
    Kind kind = Kind::file;
    std::string target; // filesystem path for image/file/table, URL for link
    std::string label;
};

std::string_view to_string(Attachment::Kind kind) noexcept;

struct ToolResult
{
    std::string text;
    std::vector<Attachment> attachments;
};

/// What a handler may touch: its session's artifact directory, the bundled
/// fixtures, the run seed, and optionally a model for narrative output.
struct ToolContext
{
    std::filesystem::path artifacts_dir;
    std::filesystem::path data_dir;
    bool offline = true;
    std::uint64_t seed = 0;
    llm::BackendPtr llm;

    /// Absolute paths pass through; relative ones resolve against the
    /// artifact directory first, then the data directory.
    [[nodiscard]] std::filesystem::path resolve(const std::string& p) const;
};

using ToolHandler = std::function<ToolResult(const nlohmann::json& params, ToolContext& ctx)>;

/// Coerces the action's arguments to the descriptor's declared types.
/// Unknown arguments are dropped. Throws MissingParams (details = names) or
/// TypeMismatch (details = {param, expected}).
nlohmann::json extract_params(const ToolDescriptor& descriptor, const llm::AgentAction& action);

} // namespace openti::agent
