// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/sim/metrics.hpp>

#include <fstream>

namespace openti::sim
{

using nlohmann::json;

json MetricsReport::to_json() const
{
    json counts = json::object();
    for (const auto& [link, hours]: per_link_counts)
    {
        json h = json::object();
        for (const auto& [hour, n]: hours)
            h[std::to_string(hour)] = n;
        counts[std::to_string(link)] = h;
    }
    return {{"att_s", att_s},
            {"throughput", throughput},
            {"avg_queue", avg_queue},
            {"avg_delay_s", avg_delay_s},
            {"total_reward", total_reward},
            {"per_link_counts", counts},
            {"no_arrivals", no_arrivals}};
}

namespace
{

const json& field(const json& j, const char* name)
{
    if (!j.contains(name))
        fail(Errc::SchemaError, std::string("metrics.json lacks field '") + name + "'", {name});
    return j.at(name);
}

double number(const json& j, const char* name)
{
    const auto& v = field(j, name);
    if (!v.is_number())
        fail(Errc::SchemaError, std::string("metrics.json field '") + name + "' is not a number", {name});
    return v.get<double>();
}

long long integer_key(const std::string& s, const char* what)
{
    std::size_t used = 0;
    long long v = 0;
    try
    {
        v = std::stoll(s, &used);
    }
    catch (const std::exception&)
    {
        used = 0;
    }
    if (used == 0 || used != s.size())
        fail(Errc::SchemaError, std::string("metrics.json per_link_counts has a non-integer ") + what + " '" + s + "'",
             {"per_link_counts"});
    return v;
}

} // namespace

MetricsReport MetricsReport::from_json(const json& j)
{
    if (!j.is_object())
        fail(Errc::SchemaError, "metrics.json is not an object");
    MetricsReport m;
    m.att_s = number(j, "att_s");
    const auto& tp = field(j, "throughput");
    if (!tp.is_number_integer() || tp.get<long long>() < 0)
        fail(Errc::SchemaError, "metrics.json field 'throughput' is not a non-negative integer", {"throughput"});
    m.throughput = tp.get<int>();
    m.avg_queue = number(j, "avg_queue");
    m.avg_delay_s = number(j, "avg_delay_s");
    m.total_reward = number(j, "total_reward");
    const auto& counts = field(j, "per_link_counts");
    if (!counts.is_object())
        fail(Errc::SchemaError, "metrics.json field 'per_link_counts' is not an object", {"per_link_counts"});
    for (const auto& [link, hours]: counts.items())
    {
        if (!hours.is_object())
            fail(Errc::SchemaError, "metrics.json per_link_counts entries must be objects", {"per_link_counts"});
        auto& row = m.per_link_counts[integer_key(link, "link id")];
        for (const auto& [hour, n]: hours.items())
        {
            if (!n.is_number_integer())
                fail(Errc::SchemaError, "metrics.json per_link_counts values must be integers", {"per_link_counts"});
            row[static_cast<int>(integer_key(hour, "hour"))] = n.get<int>();
        }
    }
    if (j.contains("no_arrivals") && j.at("no_arrivals").is_boolean())
        m.no_arrivals = j.at("no_arrivals").get<bool>();
    else
        m.no_arrivals = m.throughput == 0;
    return m;
}

void write_metrics_json(const MetricsReport& report, const std::filesystem::path& path)
{
    write_file(path.string(), report.to_json().dump(2) + "\n");
}

MetricsReport read_metrics_json(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(Errc::IoError, "cannot open " + path.string());
    json j;
    try
    {
        j = json::parse(in);
    }
    catch (const json::parse_error& e)
    {
        fail(Errc::SchemaError, "metrics.json is not valid JSON: " + std::string(e.what()));
    }
    return MetricsReport::from_json(j);
}

} // namespace openti::sim
