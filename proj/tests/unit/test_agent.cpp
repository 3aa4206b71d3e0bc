// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <doctest.h>

#include <openti/agent/dispatcher.hpp>
#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/llm/mock_backend.hpp>

#include <fstream>
#include <thread>

using namespace openti;
using namespace openti::agent;
using openti::test::CountingBackend;
using openti::test::TempDir;

namespace
{

ToolDescriptor query_area_descriptor()
{
    ToolDescriptor d;
    d.name = "queryAreaRange";
    d.description = "You are designed to respond with longitudes and latitudes information of a location.";
    d.format_restriction = "The format of your output is a 4 value array [min_long, min_lat, max_long, max_lat].";
    d.example = "Human ask \"Where is Arizona State University, Tempe Campus\", you need to output "
                "[-111.9431, 33.4154, -111.9239, 33.4280].";
    d.reflection = "You should respond directly with what you know and then stop.";
    d.emphasis = "You have a specific tool to directly query the location.";
    d.params = {{"place", ParamType::text, true, "place name to locate", {}}};
    return d;
}

ToolDescriptor download_descriptor()
{
    ToolDescriptor d;
    d.name = "autoDownloadOpenStreetMapFile";
    d.description = "Download OpenStreetMap data for a bounding box.";
    d.format_restriction = "bbox is [min_long, min_lat, max_long, max_lat].";
    d.example = "Download the map of ASU.";
    d.reflection = "Only download once.";
    d.emphasis = "This tool downloads map files.";
    d.params = {{"bbox", ParamType::bbox, true, "area to download", {}}};
    return d;
}

const char* kAsu = "[-111.9431, 33.4154, -111.9239, 33.428]";

std::shared_ptr<ToolRegistry> make_registry(int* query_runs = nullptr)
{
    auto reg = std::make_shared<ToolRegistry>();
    reg->register_tool(query_area_descriptor(), [query_runs](const nlohmann::json& p, ToolContext&) {
        if (query_runs)
            ++*query_runs;
        if (p["place"].get<std::string>() == "explode")
            fail(Errc::NotFound, "no such place");
        return ToolResult {kAsu, {}};
    });
    reg->register_tool(download_descriptor(), [](const nlohmann::json& p, ToolContext& ctx) {
        const auto path = ctx.artifacts_dir / "map.osm";
        write_file(path.string(), "<osm/>");
        return ToolResult {"saved " + path.string(), {{Attachment::Kind::file, path.string(), "map"}}};
    });
    return reg;
}

llm::BackendPtr mock(std::vector<llm::ScriptRule> rules)
{
    return std::make_shared<llm::MockBackend>(std::move(rules));
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1))
        ++n;
    return n;
}

const std::string kQueryCall = R"({"action":"queryAreaRange","action_input":{"place":"Arizona State University, Tempe Campus"}})";

} // namespace

TEST_CASE("registry counts, rejects duplicates and invalid descriptors")
{
    ToolRegistry reg;
    auto handler = [](const nlohmann::json&, ToolContext&) { return ToolResult {"x", {}}; };
    reg.register_tool(query_area_descriptor(), handler);
    CHECK(reg.size() == 1);
    CHECK(reg.find("queryAreaRange") != nullptr);

    try
    {
        reg.register_tool(query_area_descriptor(), handler);
        FAIL("expected DuplicateName");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == Errc::DuplicateName);
    }

    auto empty = download_descriptor();
    empty.description = "  ";
    CHECK_THROWS_AS(reg.register_tool(empty, handler), Error);

    auto undocumented = download_descriptor();
    undocumented.params[0].doc.clear();
    CHECK_THROWS_AS(reg.register_tool(undocumented, handler), Error);
    CHECK(reg.size() == 1);
}

TEST_CASE("system prompt labels follow the ablation mask")
{
    const std::vector<ToolDescriptor> one {query_area_descriptor()};
    const auto full = render_system_prompt(one);
    for (auto f: kPromptFields)
        CHECK(count_occurrences(full, "[" + std::string(label(f)) + "]") == 1);
    CHECK(full.find(llm::action_grammar()) != std::string::npos);

    const auto no_emph = render_system_prompt(one, {PromptField::emphasis});
    CHECK(no_emph.find("[Emphasis]") == std::string::npos);
    CHECK(no_emph.find(query_area_descriptor().emphasis) == std::string::npos);
    CHECK(no_emph.find("[Reflection]") != std::string::npos);

    const AblationMask all(kPromptFields.begin(), kPromptFields.end());
    const auto bare = render_system_prompt(one, all);
    for (auto f: kPromptFields)
    {
        CHECK(bare.find("[" + std::string(label(f)) + "]") == std::string::npos);
        CHECK(bare.find(query_area_descriptor().field(f)) == std::string::npos);
    }
    CHECK(bare.find("queryAreaRange") != std::string::npos);
    CHECK(bare.find(llm::action_grammar()) != std::string::npos);

    CHECK_THROWS_AS(render_system_prompt({}), Error);
}

TEST_CASE("masking only removes labeled blocks")
{
    const std::vector<ToolDescriptor> cat {query_area_descriptor(), download_descriptor()};
    // Every subset pair (A, B) with B inside the complement of A: the lines of
    // render(A) must appear in order within render(B ∪ ... ) is the same as
    // render(larger mask) being a line-subsequence of render(smaller mask).
    for (unsigned a = 0; a < 32; ++a)
        for (unsigned b = 0; b < 32; ++b)
        {
            if ((a & b) != b)
                continue; // need mask_b ⊆ mask_a
            AblationMask ma, mb;
            for (unsigned i = 0; i < 5; ++i)
            {
                if (a & (1u << i))
                    ma.insert(kPromptFields[i]);
                if (b & (1u << i))
                    mb.insert(kPromptFields[i]);
            }
            const auto small = split(render_system_prompt(cat, ma), '\n');
            const auto big = split(render_system_prompt(cat, mb), '\n');
            std::size_t j = 0;
            for (const auto& line: big)
                if (j < small.size() && small[j] == line)
                    ++j;
            CHECK(j == small.size());
        }
}

TEST_CASE("prompt field names parse from labels and snake case")
{
    CHECK(prompt_field_from_string("Format Restriction") == PromptField::format_restriction);
    CHECK(prompt_field_from_string("format_restriction") == PromptField::format_restriction);
    CHECK(prompt_field_from_string("EMPHASIS") == PromptField::emphasis);
    CHECK_FALSE(prompt_field_from_string("tone").has_value());
}

TEST_CASE("extract_params coerces and validates")
{
    const auto dl = download_descriptor();
    auto good = llm::AgentAction::tool_call(dl.name, {{"bbox", {-111.9431, 33.4154, -111.9239, 33.4280}}});
    const auto p = extract_params(dl, good);
    CHECK(p["bbox"].size() == 4);
    CHECK(p["bbox"][0].get<double>() == doctest::Approx(-111.9431));
    CHECK(p["bbox"][3].get<double>() == doctest::Approx(33.4280));

    auto as_text = llm::AgentAction::tool_call(dl.name, {{"bbox", "-111.9431, 33.4154, -111.9239, 33.4280"}});
    CHECK(extract_params(dl, as_text)["bbox"][2].get<double>() == doctest::Approx(-111.9239));

    auto short_box = llm::AgentAction::tool_call(dl.name, {{"bbox", {33.4, -111.9}}});
    try
    {
        extract_params(dl, short_box);
        FAIL("expected TypeMismatch");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == Errc::TypeMismatch);
        REQUIRE(e.details().size() == 2);
        CHECK(e.details()[0] == "bbox");
    }

    auto swapped = llm::AgentAction::tool_call(dl.name, {{"bbox", {33.4154, -111.9431, 33.4280, -111.9239}}});
    CHECK_THROWS_AS(extract_params(dl, swapped), Error);

    const auto qa = query_area_descriptor();
    try
    {
        extract_params(qa, llm::AgentAction::tool_call(qa.name, nlohmann::json::object()));
        FAIL("expected MissingParams");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == Errc::MissingParams);
        CHECK(e.details() == std::vector<std::string> {"place"});
    }

    ToolDescriptor typed;
    typed.name = "typed";
    typed.description = "typed params";
    typed.params = {{"n", ParamType::integer, true, "count", {}},
                    {"x", ParamType::real, false, "scale", {}},
                    {"algo", ParamType::enumeration, true, "algorithm", {"fixedtime", "sotl"}}};
    auto act = llm::AgentAction::tool_call("typed", {{"n", "5"}, {"x", 2}, {"algo", "SOTL"}, {"extra", 1}});
    const auto tp = extract_params(typed, act);
    CHECK(tp["n"].get<std::int64_t>() == 5);
    CHECK(tp["x"].get<double>() == 2.0);
    CHECK(tp["algo"] == "sotl");
    CHECK_FALSE(tp.contains("extra"));
    CHECK_THROWS_AS(extract_params(typed, llm::AgentAction::tool_call("typed", {{"n", 1.5}, {"algo", "sotl"}})), Error);
    CHECK_THROWS_AS(extract_params(typed, llm::AgentAction::tool_call("typed", {{"n", 1}, {"algo", "dqn"}})), Error);
}

TEST_CASE("dispatch happy path: correct queryAreaRange call")
{
    TempDir ws;
    auto backend = mock({{"where is Arizona State", {kQueryCall, R"({"action":"final","answer":"Here is the area."})"}}});
    Agent agent(make_registry(), backend);
    Session s("s1", ws.path());
    const auto out = agent.dispatch(s, "Where is Arizona State University, Tempe Campus?",
                                    {.require_tool = true, .expected_tool = "queryAreaRange"});
    CHECK(out.status == DispatchStatus::ok);
    REQUIRE(out.matched_tool.has_value());
    CHECK(*out.matched_tool == "queryAreaRange");
    CHECK(out.retries_used == 0);
    CHECK(out.reply.find("-111.9431") != std::string::npos);
    CHECK(out.reply.find("Here is the area.") != std::string::npos);

    const auto st = s.snapshot();
    REQUIRE(st.transcript.size() == 2);
    CHECK(st.transcript[1].speaker == Speaker::agent);
    CHECK(st.transcript[1].text == out.reply);
    std::ifstream trace(s.trace_path());
    std::string line;
    int lines = 0;
    while (std::getline(trace, line))
    {
        CHECK(nlohmann::json::parse(line).contains("kind"));
        ++lines;
    }
    CHECK(lines == static_cast<int>(st.trace.size()));
}

TEST_CASE("dispatch mismatch: download request answered with queryAreaRange")
{
    TempDir ws;
    auto backend = mock({{"download", {R"({"action":"queryAreaRange","action_input":{"place":"ASU"}})"}}});
    Agent agent(make_registry(), backend);
    Session s("s2", ws.path());
    const auto out = agent.dispatch(s, "Can you help me download the map of Arizona State University?",
                                    {.expected_tool = "autoDownloadOpenStreetMapFile"});
    CHECK(out.status == DispatchStatus::mismatch);
    CHECK(out.matched_tool == std::optional<std::string>("queryAreaRange"));
    CHECK(out.reply.rfind("Query failed", 0) == 0);
}

TEST_CASE("dispatch mismatch: unregistered tool after one repair")
{
    TempDir ws;
    auto counting = std::make_shared<CountingBackend>(
        mock({{"download", {R"({"action":"fetchMap","action_input":{}})"}}}));
    Agent agent(make_registry(), counting);
    Session s("s3", ws.path());
    const auto out = agent.dispatch(s, "download the map", {});
    CHECK(out.status == DispatchStatus::mismatch);
    CHECK(counting->calls() == 2);
    CHECK(out.retries_used == 1);
}

TEST_CASE("dispatch no_api_call: prose answer to a tool task")
{
    TempDir ws;
    auto backend = mock({{"where is", {"Arizona State University is in Tempe, Arizona."}}});
    Agent agent(make_registry(), backend);
    Session s("s4", ws.path());
    const auto out = agent.dispatch(s, "Where is Arizona State University?", {.require_tool = true});
    CHECK(out.status == DispatchStatus::no_api_call);

    Session s2("s4b", ws.path());
    const auto chat = agent.dispatch(s2, "Where is Arizona State University?");
    CHECK(chat.status == DispatchStatus::ok);
    CHECK(chat.reply == "Arizona State University is in Tempe, Arizona.");

    auto final_only = mock({{"where is", {R"({"action":"final","answer":"Tempe."})"}}});
    Agent agent2(make_registry(), final_only);
    Session s3("s4c", ws.path());
    CHECK(agent2.dispatch(s3, "where is ASU", {.expected_tool = "queryAreaRange"}).status ==
          DispatchStatus::no_api_call);
}

TEST_CASE("dispatch error_raise: malformed object after repair")
{
    TempDir ws;
    auto counting = std::make_shared<CountingBackend>(mock({{".", {R"({"action": queryAreaRange, oops})"}}}));
    Agent agent(make_registry(), counting);
    Session s("s5", ws.path());
    const auto out = agent.dispatch(s, "where is ASU", {.require_tool = true});
    CHECK(out.status == DispatchStatus::error_raise);
    CHECK(counting->calls() == 2);
}

TEST_CASE("dispatch repairs a malformed reply")
{
    TempDir ws;
    auto backend = mock({{".", {"{broken", kQueryCall, R"({"action":"final","answer":"ok"})"}}});
    Agent agent(make_registry(), backend);
    Session s("s6", ws.path());
    const auto out = agent.dispatch(s, "where is ASU", {.expected_tool = "queryAreaRange"});
    CHECK(out.status == DispatchStatus::ok);
    CHECK(out.retries_used == 1);
}

TEST_CASE("missing params trigger Alert Required Info turns")
{
    TempDir ws;
    auto counting = std::make_shared<CountingBackend>(mock({{".", {R"({"action":"queryAreaRange","action_input":{}})",
                                                                   kQueryCall,
                                                                   R"({"action":"final","answer":"ok"})"}}}));
    Agent agent(make_registry(), counting);
    Session s("s7", ws.path());
    const auto out = agent.dispatch(s, "where is ASU", {.expected_tool = "queryAreaRange"});
    CHECK(out.status == DispatchStatus::ok);
    CHECK(out.param_retries == 1);
    CHECK(counting->calls() == 3);

    auto never = std::make_shared<CountingBackend>(mock({{".", {R"({"action":"queryAreaRange","action_input":{}})"}}}));
    Agent stubborn(make_registry(), never);
    Session s2("s7b", ws.path());
    const auto bad = stubborn.dispatch(s2, "where is ASU", {.expected_tool = "queryAreaRange", .max_query = 2});
    CHECK(bad.status == DispatchStatus::error_raise);
    CHECK(bad.param_retries == 2);
    CHECK(bad.retries_used == 2);
    CHECK(never->calls() == 3);
}

TEST_CASE("handler errors are retried then classified error_raise")
{
    TempDir ws;
    int runs = 0;
    auto counting = std::make_shared<CountingBackend>(
        mock({{".", {R"({"action":"queryAreaRange","action_input":{"place":"explode"}})"}}}));
    Agent agent(make_registry(&runs), counting);
    Session s("s8", ws.path());
    const auto out = agent.dispatch(s, "where is explode", {.expected_tool = "queryAreaRange", .max_query = 3});
    CHECK(out.status == DispatchStatus::error_raise);
    CHECK(runs == 4);
    CHECK(out.response_retries == 3);
    CHECK(counting->calls() <= 1 + 2 * 3);

    // Trace completeness: each execution has one action and one observation or error.
    const auto trace = s.snapshot().trace;
    int actions = 0, errors = 0;
    for (const auto& e: trace)
    {
        if (e.kind == TraceKind::action)
        {
            ++actions;
            CHECK(e.tool_name.has_value());
        }
        if (e.kind == TraceKind::error)
            ++errors;
    }
    CHECK(actions == runs);
    CHECK(errors == runs);
    for (std::size_t i = 0; i < trace.size(); ++i)
        CHECK(trace[i].timestamp == i + 1);
}

TEST_CASE("multi-step chain: locate then download, artifacts registered")
{
    TempDir ws;
    auto backend = mock({{"download", {kQueryCall,
                                       std::string(R"({"action":"autoDownloadOpenStreetMapFile","action_input":{"bbox":)") +
                                           kAsu + "}}",
                                       R"({"action":"final","answer":"Downloaded."})"}}});
    Agent agent(make_registry(), backend);
    Session s("s9", ws.path());
    const auto out = agent.dispatch(s, "download the map of ASU", {.expected_tool = "autoDownloadOpenStreetMapFile"});
    CHECK(out.status == DispatchStatus::ok);
    CHECK(out.calls.size() == 2);
    REQUIRE(out.attachments.size() == 1);
    const auto st = s.snapshot();
    REQUIRE(st.artifacts.size() == 1);
    CHECK(st.artifacts[0].name == "map.osm");
    CHECK(std::filesystem::exists(st.artifacts[0].path));
}

TEST_CASE("LLM call count never exceeds 1 + 2*max_query")
{
    TempDir ws;
    const std::vector<std::string> scripts {
        "{not json",
        R"({"action":"nope","action_input":{}})",
        R"({"action":"queryAreaRange","action_input":{}})",
        R"({"action":"queryAreaRange","action_input":{"place":"explode"}})",
    };
    int n = 0;
    for (int mq = 1; mq <= 4; ++mq)
        for (const auto& first: scripts)
            for (const auto& second: scripts)
            {
                auto counting = std::make_shared<CountingBackend>(mock({{".", {first, second}}}));
                Agent agent(make_registry(), counting);
                Session s("b" + std::to_string(n++), ws.path());
                const auto out = agent.dispatch(s, "anything", {.require_tool = true, .max_query = mq});
                CHECK(counting->calls() <= 1 + 2 * mq);
                CHECK(out.llm_calls == counting->calls());
                CHECK(out.retries_used <= mq);
                CHECK(out.status != DispatchStatus::ok);
            }

    // A chain that keeps calling fresh tools is also cut off.
    auto chatty = std::make_shared<CountingBackend>(mock({{".", {
        R"({"action":"queryAreaRange","action_input":{"place":"a"}})",
        R"({"action":"queryAreaRange","action_input":{"place":"b"}})",
        R"({"action":"queryAreaRange","action_input":{"place":"c"}})",
        R"({"action":"queryAreaRange","action_input":{"place":"d"}})",
        R"({"action":"queryAreaRange","action_input":{"place":"e"}})"}}}));
    Agent agent(make_registry(), chatty);
    Session s("chatty", ws.path());
    const auto out = agent.dispatch(s, "go", {.max_query = 1});
    CHECK(chatty->calls() == 3);
    CHECK(out.status == DispatchStatus::ok);
}

TEST_CASE("backend failures become error_raise")
{
    TempDir ws;
    Agent agent(make_registry(), mock({{"^never$", {"x"}}}));
    Session s("s10", ws.path());
    const auto out = agent.dispatch(s, "unscripted");
    CHECK(out.status == DispatchStatus::error_raise);
    CHECK(out.failure_reason.find("ScriptMiss") != std::string::npos);
}

TEST_CASE("sessions dispatch independently")
{
    TempDir ws;
    auto backend = mock({{".", {kQueryCall, R"({"action":"final","answer":"done"})"}}});
    Agent agent(make_registry(), backend);
    Session a("a", ws.path()), b("b", ws.path());
    std::thread ta([&] {
        for (int i = 0; i < 5; ++i)
            agent.dispatch(a, "where is ASU");
    });
    std::thread tb([&] {
        for (int i = 0; i < 5; ++i)
            agent.dispatch(b, "where is ASU");
    });
    ta.join();
    tb.join();
    CHECK(a.snapshot().transcript.size() == 10);
    CHECK(b.snapshot().transcript.size() == 10);
    CHECK(a.trace_size() == b.trace_size());
}

TEST_CASE("session ids and artifact jail")
{
    TempDir ws;
    CHECK_THROWS_AS(Session("../x", ws.path()), Error);
    Session s("ok", ws.path());
    write_file((ws / "outside.txt").string(), "x");
    CHECK_FALSE(s.add_artifact(ws / "outside.txt", Attachment::Kind::file, "").has_value());
    write_file((s.artifacts_dir() / "sub/in.txt").string(), "x");
    CHECK(s.add_artifact(s.artifacts_dir() / "sub/in.txt", Attachment::Kind::file, "") == std::optional<std::string>("sub/in.txt"));
}
