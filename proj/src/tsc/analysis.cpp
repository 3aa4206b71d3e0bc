// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/tsc/analysis.hpp>
#include <openti/tsc/training.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace openti::tsc
{

namespace
{

const std::vector<std::pair<std::string, std::string>> kMetrics {
    {"att_s", "ATT (s)"},
    {"throughput", "Throughput (veh)"},
    {"avg_queue", "Queue (veh)"},
    {"avg_delay_s", "Delay (s)"},
    {"total_reward", "Reward"},
};

double metric_value(const sim::MetricsReport& m, const std::string& name)
{
    if (name == "att_s")
        return m.att_s;
    if (name == "throughput")
        return m.throughput;
    if (name == "avg_queue")
        return m.avg_queue;
    if (name == "avg_delay_s")
        return m.avg_delay_s;
    return m.total_reward;
}

sim::MetricsReport load_json_log(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(Errc::UnreadableLog, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        fail(Errc::UnreadableLog, path.filename().string() + " line " + std::to_string(line) + ": not valid JSON",
             {std::to_string(line)});
    }
    return sim::MetricsReport::from_json(j);
}

} // namespace

bool larger_is_better(std::string_view metric)
{
    return metric == "throughput" || metric == "total_reward";
}

sim::MetricsReport load_log(const std::filesystem::path& path)
{
    auto p = path;
    if (std::filesystem::is_directory(p))
    {
        if (std::filesystem::exists(p / "metrics.json"))
            p /= "metrics.json";
        else if (std::filesystem::exists(p / "training_curve.csv"))
            p /= "training_curve.csv";
        else
            fail(Errc::UnreadableLog, path.string() + " holds neither metrics.json nor training_curve.csv");
    }
    if (!std::filesystem::exists(p))
        fail(Errc::UnreadableLog, "no such log " + p.string());
    if (p.extension() == ".csv")
    {
        const auto curve = read_training_curve(p);
        if (curve.empty())
            fail(Errc::UnreadableLog, p.filename().string() + " has no episodes");
        const auto& r = curve.records.back();
        sim::MetricsReport m;
        m.att_s = r.att_s;
        m.throughput = r.throughput;
        m.avg_queue = r.avg_queue;
        m.avg_delay_s = r.avg_delay_s;
        m.total_reward = r.total_reward;
        m.no_arrivals = r.throughput == 0;
        return m;
    }
    return load_json_log(p);
}

LogAnalysis analyze_logs(const std::filesystem::path& a, const std::optional<std::filesystem::path>& b)
{
    LogAnalysis out;
    out.a = load_log(a);
    std::ostringstream t;
    if (!b)
    {
        t << "Log " << a.string() << ":\n";
        for (const auto& [key, label]: kMetrics)
            t << "  " << label << ": " << format_general(metric_value(out.a, key)) << "\n";
        if (out.a.no_arrivals)
            t << "  No vehicle arrived; ATT and delay carry no information.\n";
        out.text = t.str();
        return out;
    }
    out.b = load_log(*b);
    int wins_a = 0, wins_b = 0;
    t << "Comparison (delta = b - a)\n  a: " << a.string() << "\n  b: " << b->string() << "\n";
    for (const auto& [key, label]: kMetrics)
    {
        MetricDelta d;
        d.metric = key;
        d.a = metric_value(out.a, key);
        d.b = metric_value(*out.b, key);
        d.delta = d.b - d.a;
        if (std::abs(d.delta) < 1e-9)
            d.better = "tie";
        else if ((d.delta > 0) == larger_is_better(key))
            d.better = "b";
        else
            d.better = "a";
        wins_a += d.better == "a";
        wins_b += d.better == "b";
        t << "  " << label << ": a=" << format_general(d.a) << " b=" << format_general(d.b)
          << " delta=" << format_general(d.delta) << " -> "
          << (d.better == "tie" ? std::string("tie") : d.better + " better") << "\n";
        out.rows.push_back(d);
    }
    out.verdict = wins_a == wins_b ? "tie" : (wins_a > wins_b ? "a" : "b");
    t << "Verdict: " << (out.verdict == "tie" ? std::string("tie") : out.verdict + " performs better") << " ("
      << wins_a << " metrics favour a, " << wins_b << " favour b).\n";
    out.text = t.str();
    return out;
}

std::string explain_result(const sim::MetricsReport& m, llm::LlmBackend* llm, const std::string& model_id)
{
    std::ostringstream t;
    t << "Simulation result\n";
    t << "- Average travel time (ATT): " << format_fixed(m.att_s, 1)
      << " s, the mean time an arrived vehicle spent between departure and destination.\n";
    t << "- Throughput (TP): " << m.throughput << " vehicles reached their destinations.\n";
    t << "- Average queue: " << format_fixed(m.avg_queue, 2)
      << " vehicles waiting to pass, averaged over every simulated second.\n";
    t << "- Average delay: " << format_fixed(m.avg_delay_s, 1)
      << " s per arrived vehicle beyond its free-flow travel time.\n";
    t << "- Total reward: " << format_general(m.total_reward)
      << ", minus the waiting vehicles summed over decision steps; closer to 0 means fewer waiting vehicles.\n";
    if (m.no_arrivals)
        t << "Caveat: no vehicle reached its destination, so ATT and delay are reported as 0 and say nothing "
             "about travel conditions.\n";
    if (!m.per_link_counts.empty())
    {
        long total = 0;
        for (const auto& [link, hours]: m.per_link_counts)
            for (const auto& [h, n]: hours)
                total += n;
        t << "- Link counters: " << m.per_link_counts.size() << " links observed, " << total
          << " link entries in total.\n";
    }
    std::string text = t.str();
    if (llm)
    {
        llm::ChatRequest req;
        req.model_id = model_id;
        req.messages = {{llm::Role::system, "You interpret traffic simulation metrics for a transportation "
                                            "engineer. Answer in at most three sentences."},
                        {llm::Role::user, "Explain these results:\n" + text}};
        const auto resp = llm->complete(req);
        text += "\nModel-generated summary (" + llm->name() + ", unverified):\n" + trim(resp.content) + "\n";
    }
    return text;
}

} // namespace openti::tsc
