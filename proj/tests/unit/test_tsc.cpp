// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <doctest.h>

#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/llm/mock_backend.hpp>
#include <openti/sim/simulator.hpp>
#include <openti/sim/synthetic.hpp>
#include <openti/tsc/analysis.hpp>
#include <openti/tsc/training.hpp>

#include <map>

using namespace openti;
using namespace openti::tsc;
using openti::test::TempDir;

namespace
{

std::size_t count_of(const std::string& s, const std::string& needle)
{
    std::size_t n = 0;
    for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1))
        ++n;
    return n;
}

PolicySpec spec(PolicyKind kind, nlohmann::json params = nlohmann::json::object())
{
    return {kind, std::move(params)};
}

// Forwards to a Q-learner and remembers, per (intersection, state, action),
// the reward that followed it.
class Recorder final : public sim::SignalController
{
public:
    explicit Recorder(QLearningController& q)
        : _q(q)
    {
    }
    std::string name() const override { return "recorder"; }
    void begin_episode(const sim::Scenario& s) override
    {
        _q.begin_episode(s);
        _pending.clear();
    }
    sim::TscAction act(const sim::TscObservation& o, const network::SignalizedIntersection& si) override
    {
        auto it = _pending.find(o.intersection_id);
        if (it != _pending.end())
        {
            int queue = 0;
            for (int v: o.queue_per_approach)
                queue += v;
            last[{o.intersection_id, it->second.first, it->second.second}] = -queue;
        }
        const auto a = _q.act(o, si);
        _pending[o.intersection_id] = {_q.state_key(o), a.phase_index};
        return a;
    }
    std::map<std::tuple<std::int64_t, std::string, int>, double> last;

private:
    QLearningController& _q;
    std::map<std::int64_t, std::pair<std::string, int>> _pending;
};

} // namespace

TEST_CASE("fixed-time plans are periodic")
{
    const auto s = sim::make_single_intersection_scenario(200, 200, 1, 0, 1);
    FixedTimeController c(30);
    const auto res = sim::run(s, c, 400).first;
    REQUIRE(res.phase_changes.size() >= 6);
    // Switch at 30, then every green_s + all-red seconds.
    for (std::size_t i = 0; i < res.phase_changes.size(); ++i)
    {
        CHECK(res.phase_changes[i].time_s == 30 + static_cast<int>(i) * (30 + sim::kAllRedSeconds));
        CHECK(res.phase_changes[i].to_phase == static_cast<int>((i + 1) % 2));
    }
    // Period |phases| * (green + lost time).
    for (std::size_t i = 2; i < res.phase_changes.size(); ++i)
        CHECK(res.phase_changes[i].time_s - res.phase_changes[i - 2].time_s == 2 * (30 + sim::kAllRedSeconds));
}

TEST_CASE("SOTL holds the phase without demand and respects min green")
{
    const auto empty = sim::make_single_intersection_scenario(0, 0);
    SotlController idle;
    CHECK(sim::run(empty, idle).first.phase_changes.empty());

    for (int interval: {1, 10})
    {
        const auto s = sim::make_single_intersection_scenario(500, 300, 1, 4, interval);
        SotlController c(30, 10, 3);
        const auto res = sim::run(s, c).first;
        REQUIRE(res.phase_changes.size() > 4);
        int green_from = 0;
        for (const auto& ch: res.phase_changes)
        {
            CHECK(ch.time_s - green_from >= 10);
            green_from = ch.time_s + sim::kAllRedSeconds;
        }
        for (std::size_t i = 1; i < res.phase_changes.size(); ++i)
            CHECK(res.phase_changes[i].time_s - res.phase_changes[i - 1].time_s >= 10 + sim::kAllRedSeconds);
    }
}

TEST_CASE("Q-learning tie-break and update rule")
{
    QLearningController::Params p;
    p.epsilon0 = 0.0;
    QLearningController fresh(p);
    fresh.set_episode(0, 0);
    network::SignalizedIntersection si;
    si.phases.resize(3);
    for (int phase = 0; phase < 3; ++phase)
        for (auto q: {std::vector<int> {0, 0}, std::vector<int> {9, 2}, std::vector<int> {3, 12}})
        {
            QLearningController c(p);
            c.set_episode(0, 0);
            sim::TscObservation o {7, q, phase, 0, 0, false};
            CHECK(c.act(o, si).phase_index == 0);
        }
    CHECK(fresh.bucket(0) == 0);
    CHECK(fresh.bucket(1) == 1);
    CHECK(fresh.bucket(3) == 1);
    CHECK(fresh.bucket(4) == 2);
    CHECK(fresh.bucket(8) == 3);
    CHECK(fresh.bucket(40) == 3);

    // gamma = 0, alpha = 1: each visited Q(s,a) is the last reward that followed it.
    p.alpha = 1.0;
    p.gamma = 0.0;
    p.epsilon0 = 0.5;
    QLearningController q(p);
    Recorder rec(q);
    const auto s = sim::make_grid_scenario(2, 2, 900, 1.0, 1, 3);
    for (int e = 0; e < 3; ++e)
    {
        q.set_episode(s.seed, e);
        sim::run(s, rec);
    }
    REQUIRE(rec.last.size() > 20);
    for (const auto& [key, r]: rec.last)
    {
        const auto* values = q.q_values(std::get<0>(key), std::get<1>(key));
        REQUIRE(values != nullptr);
        CHECK((*values)[static_cast<std::size_t>(std::get<2>(key))] == r);
    }
}

TEST_CASE("Q-learning training")
{
    const auto s = sim::make_single_intersection_scenario(450, 120, 1, 0);
    const auto one = train_qlearning(s, 1, spec(PolicyKind::qlearning));
    CHECK(one.curve.size() == 1);
    CHECK(one.curve.records[0].episode == 0);

    const auto trained = train_qlearning(s, 30, spec(PolicyKind::qlearning));
    REQUIRE(trained.curve.size() == 30);
    CHECK(trained.policy->all_finite());
    double first = 0, last = 0;
    for (int i = 0; i < 5; ++i)
    {
        first += trained.curve.records[i].total_reward / 5;
        last += trained.curve.records[25 + i].total_reward / 5;
    }
    CHECK(last >= first);

    // Same seed, same curve.
    CHECK(train_qlearning(s, 3, spec(PolicyKind::qlearning)).curve ==
          TrainingCurve {{trained.curve.records.begin(), trained.curve.records.begin() + 3}});

    QLearningController restored(trained.policy->params());
    restored.load_checkpoint(trained.policy->checkpoint());
    CHECK(restored.checkpoint() == trained.policy->checkpoint());
    CHECK(restored.table_size() == trained.policy->table_size());

    CHECK_THROWS_AS(train_qlearning(s, 0, spec(PolicyKind::qlearning)), Error);
    CHECK_THROWS_AS(train_qlearning(s, 2, spec(PolicyKind::sotl)), Error);
}

TEST_CASE("policy specs")
{
    CHECK(policy_kind_from_string("Fixed Time") == PolicyKind::fixedtime);
    CHECK(policy_kind_from_string("SOTL") == PolicyKind::sotl);
    CHECK(make_policy(spec(PolicyKind::fixedtime))->name() == "fixedtime");
    CHECK(make_policy(spec(PolicyKind::sotl, {{"theta", 50}}))->name() == "sotl");
    CHECK(make_policy(spec(PolicyKind::qlearning, {{"bins", {0, 2, 5}}}))->name() == "qlearning");
    for (const auto& bad: {spec(PolicyKind::fixedtime, {{"green_s", 0}}), spec(PolicyKind::sotl, {{"theta", -1}}),
                           spec(PolicyKind::sotl, {{"colour", 2}}), spec(PolicyKind::qlearning, {{"alpha", 2}}),
                           spec(PolicyKind::qlearning, {{"bins", {1, 4}}}), spec(PolicyKind::chatzero)})
    {
        try
        {
            make_policy(bad);
            FAIL("expected InvalidSpec");
        }
        catch (const Error& e)
        {
            CHECK(e.code() == Errc::InvalidSpec);
        }
    }
    CHECK_THROWS_AS(policy_kind_from_string("webster"), Error);
    CHECK(PolicySpec::from_json({{"kind", "sotl"}, {"params", {{"mu", 2}}}}).number("mu") == 2);
}

TEST_CASE("training curves: csv and chart")
{
    TempDir dir;
    TrainingCurve c {{{0, -120.5, 80.25, 40, 1.5, 6.0}, {1, -100.0, 75.0, 42, 1.25, 5.5}}};
    write_training_curve(c, dir / "training_curve.csv");
    CHECK(read_training_curve(dir / "training_curve.csv") == c);

    write_file((dir / "bad.csv").string(),
               "episode,total_reward,att_s,throughput,avg_queue,avg_delay_s\n0,1,2,3,4,5\n1,x,2,3,4,5\n");
    try
    {
        read_training_curve(dir / "bad.csv");
        FAIL("expected UnreadableLog");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == Errc::UnreadableLog);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    const auto svg = render_training_svg(c);
    CHECK(count_of(svg, "<polyline") == 2);
    CHECK(count_of(svg, "<circle") == 4);
    CHECK(render_training_svg(c) == svg);
    const TrainingCurve single {{c.records[0]}};
    const auto one = render_training_svg(single);
    CHECK(count_of(one, "<polyline") == 0);
    CHECK(count_of(one, "<circle") == 2); // one marker per series
    CHECK(visualize_training(c, dir / "out").filename() == "training_curve.svg");
    try
    {
        render_training_svg({});
        FAIL("expected EmptyCurve");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == Errc::EmptyCurve);
    }
}

TEST_CASE("log analysis")
{
    TempDir dir;
    sim::MetricsReport a;
    a.att_s = 120;
    a.throughput = 50;
    a.avg_queue = 3;
    a.avg_delay_s = 40;
    a.total_reward = -900;
    auto b = a;
    b.att_s = 100;
    std::filesystem::create_directories(dir / "a");
    std::filesystem::create_directories(dir / "b");
    sim::write_metrics_json(a, dir / "a" / "metrics.json");
    sim::write_metrics_json(b, dir / "b" / "metrics.json");

    const auto cmp = analyze_logs(dir / "a", dir / "b");
    REQUIRE(cmp.rows.size() == 5);
    CHECK(cmp.rows[0].metric == "att_s");
    CHECK(cmp.rows[0].delta == -20.0);
    CHECK(cmp.rows[0].better == "b");
    CHECK(cmp.verdict == "b");
    CHECK(cmp.text.find("ATT (s): a=120 b=100 delta=-20 -> b better") != std::string::npos);

    const auto same = analyze_logs(dir / "a" / "metrics.json", dir / "a" / "metrics.json");
    for (const auto& r: same.rows)
    {
        CHECK(r.delta == 0.0);
        CHECK(r.better == "tie");
    }
    CHECK(same.verdict == "tie");

    // Larger throughput and reward are better.
    auto c = a;
    c.throughput = 60;
    c.total_reward = -1000;
    sim::write_metrics_json(c, dir / "c.json");
    const auto tc = analyze_logs(dir / "a" / "metrics.json", dir / "c.json");
    CHECK(tc.rows[1].better == "b");
    CHECK(tc.rows[4].better == "a");

    const auto single = analyze_logs(dir / "a");
    CHECK(single.rows.empty());
    CHECK(single.text.find("ATT (s): 120") != std::string::npos);

    write_training_curve({{{0, -5, 10, 3, 0.5, 1}}}, dir / "training_curve.csv");
    CHECK(load_log(dir / "training_curve.csv").throughput == 3);

    write_file((dir / "broken.json").string(), "{\n  \"att_s\": 1,\n  \"throughput\": ,\n}\n");
    try
    {
        analyze_logs(dir / "broken.json");
        FAIL("expected UnreadableLog");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == Errc::UnreadableLog);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(analyze_logs(dir / "missing"), Error);
}

TEST_CASE("result explanations")
{
    sim::MetricsReport m;
    m.no_arrivals = true;
    const auto text = explain_result(m);
    CHECK(text.find("Caveat: no vehicle reached its destination") != std::string::npos);
    CHECK(explain_result(m) == text);

    m.no_arrivals = false;
    m.throughput = 12;
    m.att_s = 95.5;
    CHECK(explain_result(m).find("Caveat") == std::string::npos);
    CHECK(explain_result(m).find("95.5 s") != std::string::npos);

    llm::MockBackend mock(std::vector<llm::ScriptRule> {{"Explain these results", {"Traffic flowed smoothly with short queues."}}});
    const auto with = explain_result(m, &mock);
    CHECK(with.rfind(explain_result(m), 0) == 0);
    CHECK(with.find("Model-generated summary (mock, unverified):\nTraffic flowed smoothly with short queues.") !=
          std::string::npos);
}

TEST_CASE("policy experiments write their logs")
{
    TempDir dir;
    const auto s = sim::make_single_intersection_scenario(300, 100);
    const auto ft = run_experiment(s, spec(PolicyKind::fixedtime), 2, dir / "ft");
    CHECK(ft.curve.size() == 2);
    CHECK(ft.curve.records[0].total_reward == ft.curve.records[1].total_reward);
    CHECK(std::filesystem::exists(ft.metrics_json));
    CHECK(std::filesystem::exists(ft.curve_csv));
    const auto ql = run_experiment(s, spec(PolicyKind::qlearning), 3, dir / "ql");
    CHECK(std::filesystem::exists(ql.checkpoint));
    CHECK(read_training_curve(ql.curve_csv).size() == 3);
    const auto cmp = analyze_logs(dir / "ft", dir / "ql");
    CHECK(cmp.rows.size() == 5);
}

TEST_CASE("asymmetric intersection: SOTL beats fixed time, Q-learning improves")
{
    const auto s = sim::make_asymmetric_scenario(0);
    auto fixed = make_policy(spec(PolicyKind::fixedtime, {{"green_s", 30}}));
    auto sotl = make_policy(spec(PolicyKind::sotl));
    const auto fm = sim::run(s, *fixed).second;
    const auto sm = sim::run(s, *sotl).second;
    CHECK(sm.att_s < fm.att_s);

    const auto trained = train_qlearning(s, 30, spec(PolicyKind::qlearning));
    double first = 0, last = 0;
    for (std::size_t i = 0; i < 5; ++i)
    {
        first += trained.curve.records[i].total_reward / 5;
        last += trained.curve.records[25 + i].total_reward / 5;
    }
    CHECK(last >= first);
}
