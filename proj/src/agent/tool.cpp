// SPDX-License-Identifier: Apache-2.0
#include <openti/agent/tool.hpp>
#include <openti/core/bbox.hpp>
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace openti::agent
{

std::string_view to_string(ParamType type) noexcept
{
    switch (type)
    {
        case ParamType::text: return "text";
        case ParamType::bbox: return "bbox";
        case ParamType::path: return "path";
        case ParamType::integer: return "integer";
        case ParamType::real: return "real";
        case ParamType::enumeration: return "enum";
    }
    return "text";
}

std::string ParamSpec::type_label() const
{
    if (type == ParamType::enumeration)
        return "enum(" + join(enum_values, "|") + ")";
    if (type == ParamType::bbox)
        return "bbox [min_lon, min_lat, max_lon, max_lat]";
    return std::string(to_string(type));
}

std::string_view label(PromptField field) noexcept
{
    switch (field)
    {
        case PromptField::description: return "Description";
        case PromptField::format_restriction: return "Format Restriction";
        case PromptField::example: return "Example";
        case PromptField::reflection: return "Reflection";
        case PromptField::emphasis: return "Emphasis";
    }
    return "";
}

std::optional<PromptField> prompt_field_from_string(std::string_view name)
{
    auto norm = to_lower(trim(name));
    for (auto& c: norm)
        if (c == '_' || c == '-')
            c = ' ';
    for (auto f: kPromptFields)
        if (to_lower(label(f)) == norm)
            return f;
    return std::nullopt;
}

const std::string& ToolDescriptor::field(PromptField f) const noexcept
{
    switch (f)
    {
        case PromptField::description: return description;
        case PromptField::format_restriction: return format_restriction;
        case PromptField::example: return example;
        case PromptField::reflection: return reflection;
        case PromptField::emphasis: return emphasis;
    }
    return description;
}

void ToolDescriptor::validate() const
{
    require(!name.empty(), "tool name is empty");
    for (std::size_t i = 0; i < name.size(); ++i)
    {
        const auto c = static_cast<unsigned char>(name[i]);
        require(std::isalnum(c) || c == '_' || (i == 0 ? false : c == '-'),
                "tool name '" + name + "' is not an identifier");
    }
    require(!std::isdigit(static_cast<unsigned char>(name[0])), "tool name '" + name + "' starts with a digit");
    require(!trim(description).empty(), "tool '" + name + "' has an empty description");
    std::set<std::string> seen;
    for (const auto& p: params)
    {
        require(!p.name.empty(), "tool '" + name + "' has an unnamed parameter");
        require(seen.insert(p.name).second, "tool '" + name + "' repeats parameter '" + p.name + "'");
        if (p.required)
            require(!trim(p.doc).empty(), "required parameter '" + p.name + "' of '" + name + "' is undocumented");
        if (p.type == ParamType::enumeration)
            require(!p.enum_values.empty(), "enum parameter '" + p.name + "' lists no values");
    }
}

std::string_view to_string(Attachment::Kind kind) noexcept
{
    switch (kind)
    {
        case Attachment::Kind::image: return "image";
        case Attachment::Kind::file: return "file";
        case Attachment::Kind::link: return "link";
        case Attachment::Kind::table: return "table";
    }
    return "file";
}

std::filesystem::path ToolContext::resolve(const std::string& p) const
{
    std::filesystem::path path(p);
    if (path.is_absolute())
        return path;
    if (!artifacts_dir.empty() && std::filesystem::exists(artifacts_dir / path))
        return artifacts_dir / path;
    if (!data_dir.empty() && std::filesystem::exists(data_dir / path))
        return data_dir / path;
    return artifacts_dir.empty() ? path : artifacts_dir / path;
}

namespace
{

[[noreturn]] void mismatch(const ParamSpec& spec, const nlohmann::json& got)
{
    fail(Errc::TypeMismatch,
         "parameter '" + spec.name + "' expects " + spec.type_label() + ", got " + got.dump(),
         {spec.name, spec.type_label()});
}

std::optional<double> as_number(const nlohmann::json& v)
{
    if (v.is_number())
        return v.get<double>();
    if (v.is_string())
    {
        const auto s = trim(v.get<std::string>());
        if (s.empty())
            return std::nullopt;
        char* end = nullptr;
        const double d = std::strtod(s.c_str(), &end);
        if (end && *end == '\0' && std::isfinite(d))
            return d;
    }
    return std::nullopt;
}

nlohmann::json coerce_bbox(const ParamSpec& spec, const nlohmann::json& v)
{
    nlohmann::json arr = v;
    if (v.is_string())
    {
        auto s = trim(v.get<std::string>());
        if (!s.empty() && s.front() == '[' && s.back() == ']')
            s = s.substr(1, s.size() - 2);
        arr = nlohmann::json::array();
        for (const auto& part: split(s, ','))
            arr.push_back(trim(part));
    }
    if (!arr.is_array() || arr.size() != 4)
        mismatch(spec, v);
    std::array<double, 4> vals {};
    for (std::size_t i = 0; i < 4; ++i)
    {
        const auto d = as_number(arr[i]);
        if (!d)
            mismatch(spec, v);
        vals[i] = *d;
    }
    const BBox box {vals[0], vals[1], vals[2], vals[3]};
    if (!box.valid())
        mismatch(spec, v);
    return nlohmann::json(vals);
}

nlohmann::json coerce(const ParamSpec& spec, const nlohmann::json& v)
{
    switch (spec.type)
    {
        case ParamType::text:
            if (v.is_string())
                return v;
            if (v.is_number() || v.is_boolean())
                return v.dump();
            mismatch(spec, v);
        case ParamType::path:
            if (v.is_string() && !trim(v.get<std::string>()).empty())
                return trim(v.get<std::string>());
            mismatch(spec, v);
        case ParamType::integer:
        {
            const auto d = as_number(v);
            if (!d || std::floor(*d) != *d)
                mismatch(spec, v);
            return static_cast<std::int64_t>(*d);
        }
        case ParamType::real:
        {
            const auto d = as_number(v);
            if (!d)
                mismatch(spec, v);
            return *d;
        }
        case ParamType::enumeration:
            if (v.is_string())
            {
                const auto s = to_lower(trim(v.get<std::string>()));
                for (const auto& allowed: spec.enum_values)
                    if (to_lower(allowed) == s)
                        return allowed;
            }
            mismatch(spec, v);
        case ParamType::bbox: return coerce_bbox(spec, v);
    }
    mismatch(spec, v);
}

} // namespace

nlohmann::json extract_params(const ToolDescriptor& descriptor, const llm::AgentAction& action)
{
    require(action.kind == llm::ActionKind::tool_call && action.tool_name == descriptor.name,
            "extract_params called with an action for a different tool");
    const auto& args = action.arguments;
    nlohmann::json out = nlohmann::json::object();
    std::vector<std::string> missing;
    for (const auto& spec: descriptor.params)
    {
        const bool present = args.is_object() && args.contains(spec.name) && !args[spec.name].is_null();
        if (!present)
        {
            if (spec.required)
                missing.push_back(spec.name);
            continue;
        }
        out[spec.name] = coerce(spec, args[spec.name]);
    }
    if (!missing.empty())
        fail(Errc::MissingParams, "missing required parameters: " + join(missing, ", "), missing);
    return out;
}

} // namespace openti::agent
