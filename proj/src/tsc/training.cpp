// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/sim/simulator.hpp>
#include <openti/tsc/training.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace openti::tsc
{

EpisodeRecord EpisodeRecord::from_metrics(int episode, const sim::MetricsReport& m)
{
    return {episode, m.total_reward, m.att_s, m.throughput, m.avg_queue, m.avg_delay_s};
}

void TrainingCurve::validate() const
{
    for (std::size_t i = 0; i < records.size(); ++i)
        require(records[i].episode == static_cast<int>(i), "training curve episodes must run 0, 1, 2, ...");
}

void write_training_curve(const TrainingCurve& curve, const std::filesystem::path& path)
{
    curve.validate();
    std::ostringstream o;
    o << "episode,total_reward,att_s,throughput,avg_queue,avg_delay_s\n";
    for (const auto& r: curve.records)
        o << r.episode << ',' << format_fixed(r.total_reward, 6) << ',' << format_fixed(r.att_s, 6) << ','
          << r.throughput << ',' << format_fixed(r.avg_queue, 6) << ',' << format_fixed(r.avg_delay_s, 6) << '\n';
    write_file(path.string(), o.str());
}

TrainingCurve read_training_curve(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(Errc::UnreadableLog, "cannot open " + path.string());
    const std::string header = "episode,total_reward,att_s,throughput,avg_queue,avg_delay_s";
    std::string line;
    auto where = [&](int n) { return path.filename().string() + " line " + std::to_string(n); };
    if (!std::getline(in, line) || trim(line) != header)
        fail(Errc::UnreadableLog, where(1) + ": expected header '" + header + "'", {"1"});
    TrainingCurve c;
    int n = 1;
    while (std::getline(in, line))
    {
        ++n;
        if (trim(line).empty())
            continue;
        const auto cells = split(trim(line), ',');
        if (cells.size() != 6)
            fail(Errc::UnreadableLog, where(n) + ": expected 6 fields", {std::to_string(n)});
        double v[6];
        for (int i = 0; i < 6; ++i)
        {
            char* end = nullptr;
            v[i] = std::strtod(cells[i].c_str(), &end);
            if (cells[i].empty() || *end != '\0' || !std::isfinite(v[i]))
                fail(Errc::UnreadableLog, where(n) + ": '" + cells[i] + "' is not a number", {std::to_string(n)});
        }
        EpisodeRecord r {static_cast<int>(v[0]), v[1], v[2], static_cast<int>(v[3]), v[4], v[5]};
        if (r.episode != static_cast<int>(c.records.size()))
            fail(Errc::UnreadableLog, where(n) + ": episodes must run 0, 1, 2, ...", {std::to_string(n)});
        c.records.push_back(r);
    }
    return c;
}

TrainingResult train_qlearning(const sim::Scenario& scenario, int episodes, const PolicySpec& spec)
{
    require(episodes >= 1, "episodes must be at least 1");
    if (spec.kind != PolicyKind::qlearning)
        fail(Errc::InvalidSpec, "training needs a qlearning policy", {"kind"});
    spec.validate();
    TrainingResult out;
    out.policy = std::make_shared<QLearningController>(qlearning_params(spec));
    for (int e = 0; e < episodes; ++e)
    {
        out.policy->set_episode(scenario.seed, e);
        const auto m = sim::run(scenario, *out.policy).second;
        if (!out.policy->all_finite())
            fail(Errc::SimFailure, "Q-table diverged in episode " + std::to_string(e));
        out.curve.records.push_back(EpisodeRecord::from_metrics(e, m));
    }
    return out;
}

namespace
{

struct Panel
{
    std::string title;
    std::vector<double> values;
    std::string color;
};

void draw_panel(std::ostringstream& o, const Panel& p, double x0, double y0, double w, double h)
{
    double lo = *std::min_element(p.values.begin(), p.values.end());
    double hi = *std::max_element(p.values.begin(), p.values.end());
    if (hi - lo < 1e-9)
    {
        lo -= 1.0;
        hi += 1.0;
    }
    const std::size_t n = p.values.size();
    auto px = [&](std::size_t i) { return n == 1 ? x0 + w / 2 : x0 + w * static_cast<double>(i) / (n - 1); };
    auto py = [&](double v) { return y0 + h - h * (v - lo) / (hi - lo); };
    o << "<rect x=\"" << format_fixed(x0, 1) << "\" y=\"" << format_fixed(y0, 1) << "\" width=\"" << format_fixed(w, 1)
      << "\" height=\"" << format_fixed(h, 1) << "\" fill=\"none\" stroke=\"#888\"/>\n";
    o << "<text x=\"" << format_fixed(x0, 1) << "\" y=\"" << format_fixed(y0 - 8, 1)
      << "\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(p.title) << "</text>\n";
    o << "<text x=\"" << format_fixed(x0 - 6, 1) << "\" y=\"" << format_fixed(y0 + 10, 1)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << format_general(hi) << "</text>\n";
    o << "<text x=\"" << format_fixed(x0 - 6, 1) << "\" y=\"" << format_fixed(y0 + h, 1)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << format_general(lo) << "</text>\n";
    if (n > 1)
    {
        o << "<polyline fill=\"none\" stroke=\"" << p.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < n; ++i)
            o << (i ? " " : "") << format_fixed(px(i), 2) << ',' << format_fixed(py(p.values[i]), 2);
        o << "\"/>\n";
    }
    for (std::size_t i = 0; i < n; ++i)
        o << "<circle cx=\"" << format_fixed(px(i), 2) << "\" cy=\"" << format_fixed(py(p.values[i]), 2)
          << "\" r=\"2.5\" fill=\"" << p.color << "\"/>\n";
}

} // namespace

std::string render_training_svg(const TrainingCurve& curve)
{
    if (curve.empty())
        fail(Errc::EmptyCurve, "training curve has no episodes");
    Panel reward {"total reward per episode", {}, "#1f77b4"};
    Panel att {"average travel time (s) per episode", {}, "#d62728"};
    for (const auto& r: curve.records)
    {
        reward.values.push_back(r.total_reward);
        att.values.push_back(r.att_s);
    }
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"520\">\n";
    draw_panel(o, reward, 80, 40, 600, 180);
    draw_panel(o, att, 80, 290, 600, 180);
    o << "<text x=\"380\" y=\"505\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">episode 0.."
      << curve.size() - 1 << "</text>\n";
    o << "</svg>\n";
    return o.str();
}

std::filesystem::path visualize_training(const TrainingCurve& curve, const std::filesystem::path& out_dir)
{
    const auto svg = render_training_svg(curve);
    std::filesystem::create_directories(out_dir);
    const auto p = out_dir / "training_curve.svg";
    write_file(p.string(), svg);
    return p;
}

ExperimentOutput run_experiment(const sim::Scenario& scenario, const PolicySpec& spec, int episodes,
                                const std::filesystem::path& out_dir)
{
    require(episodes >= 1, "episodes must be at least 1");
    spec.validate();
    std::filesystem::create_directories(out_dir);
    ExperimentOutput out;
    sim::MetricsReport last;
    if (spec.kind == PolicyKind::qlearning)
    {
        auto trained = train_qlearning(scenario, episodes, spec);
        out.curve = trained.curve;
        trained.policy->set_learning(false);
        trained.policy->set_epsilon(0.0);
        last = sim::run(scenario, *trained.policy).second;
        out.checkpoint = out_dir / "checkpoint.json";
        write_file(out.checkpoint.string(), trained.policy->checkpoint().dump(1) + "\n");
    }
    else
    {
        auto controller = make_policy(spec);
        for (int e = 0; e < episodes; ++e)
        {
            last = sim::run(scenario, *controller).second;
            out.curve.records.push_back(EpisodeRecord::from_metrics(e, last));
        }
    }
    out.final_metrics = last;
    out.metrics_json = out_dir / "metrics.json";
    sim::write_metrics_json(last, out.metrics_json);
    out.curve_csv = out_dir / "training_curve.csv";
    write_training_curve(out.curve, out.curve_csv);
    return out;
}

} // namespace openti::tsc
