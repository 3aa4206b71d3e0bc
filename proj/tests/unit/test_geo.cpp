// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <doctest.h>

#include <openti/core/error.hpp>
#include <openti/core/text.hpp>
#include <openti/geo/geo.hpp>
#include <openti/network/gmns.hpp>
#include <openti/network/osm.hpp>

#include <httplib.h>

#include <thread>

using namespace openti;
using namespace openti::geo;
using openti::test::TempDir;
namespace fs = std::filesystem;

namespace
{

const BBox kAsu {-111.9431, 33.4154, -111.9239, 33.4280};

GeoConfig offline()
{
    GeoConfig c;
    c.offline = true;
    c.data_dir = test::data_dir();
    return c;
}

Errc code_of(auto&& fn)
{
    try
    {
        fn();
    }
    catch (const Error& e)
    {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::InvalidArgument;
}

std::size_t count(const std::string& hay, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1))
        ++n;
    return n;
}

struct FakeServices
{
    httplib::Server server;
    int port = 0;
    std::thread thread;
    std::string last_query;

    FakeServices()
    {
        server.Get("/search", [this](const httplib::Request& req, httplib::Response& res) {
            last_query = req.get_param_value("q");
            if (req.get_param_value("format") != "json" || req.get_param_value("limit") != "1")
                res.status = 400;
            else if (last_query == "nowhere")
                res.set_content("[]", "application/json");
            else if (last_query == "boom")
                res.status = 503;
            else
                res.set_content(
                    R"([{"display_name":"Sedona","boundingbox":["34.8390","34.8890","-111.8120","-111.7390"]}])",
                    "application/json");
        });
        server.Get("/api/0.6/map", [](const httplib::Request& req, httplib::Response& res) {
            res.set_content("<?xml version=\"1.0\"?>\n<osm version=\"0.6\"><!-- " + req.get_param_value("bbox") +
                                " --></osm>\n",
                            "application/xml");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~FakeServices()
    {
        server.stop();
        thread.join();
    }
    GeoConfig config() const
    {
        GeoConfig c;
        c.offline = false;
        c.geocoder_url = "http://127.0.0.1:" + std::to_string(port) + "/search";
        c.osm_api_url = "http://127.0.0.1:" + std::to_string(port) + "/api/0.6/map";
        c.timeout = std::chrono::milliseconds(2000);
        return c;
    }
};

} // namespace

TEST_CASE("offline geocoding")
{
    CHECK(query_area_range("Arizona State University, Tempe Campus", offline()) == kAsu);
    CHECK(query_area_range("  asu tempe ", offline()) == kAsu);
    CHECK(query_area_range("the Dubai Mall area", offline()) == BBox {55.274, 25.194, 55.282, 25.199});
    CHECK(code_of([] { query_area_range("", offline()); }) == Errc::InvalidArgument);
    CHECK(code_of([] { query_area_range("   ", offline()); }) == Errc::InvalidArgument);
    CHECK(code_of([] { query_area_range("zzqx-nonexistent-place-99", offline()); }) == Errc::NotFound);
}

TEST_CASE("fixture table has at least three valid places")
{
    const auto doc = nlohmann::json::parse(read_file((test::data_dir() / "geocoder.json").string()));
    CHECK(doc.size() >= 3);
    for (const auto& e: doc)
        CHECK(BBox::from_array(e.at("bbox").get<std::array<double, 4>>()).valid());
}

TEST_CASE("remote geocoder protocol")
{
    FakeServices svc;
    const auto box = query_area_range("Sedona, AZ", svc.config());
    CHECK(box == BBox {-111.8120, 34.8390, -111.7390, 34.8890});
    CHECK(svc.last_query == "Sedona, AZ");
    CHECK(code_of([&] { query_area_range("nowhere", svc.config()); }) == Errc::NotFound);
    CHECK(code_of([&] { query_area_range("boom", svc.config()); }) == Errc::ServiceError);

    TempDir tmp;
    const auto file = download_osm(kAsu, tmp.path(), svc.config());
    const auto body = read_file(file.string());
    CHECK(body.find("<osm") != std::string::npos);
    CHECK(body.find("-111.9431,33.4154,-111.9239,33.428") != std::string::npos);
}

TEST_CASE("offline download copies the covering extract")
{
    TempDir tmp;
    const auto file = download_osm(kAsu, tmp.path(), offline());
    CHECK(file.filename() == "map_-111.9431_33.4154_-111.9239_33.428.osm");
    CHECK(std::filesystem::file_size(file) > 0);
    const auto body = read_file(file.string());
    CHECK(body.find("<osm") != std::string::npos);
    const auto bounds = network::osm_bounds(file.string());
    REQUIRE(bounds.has_value());
    CHECK(std::abs(bounds->min_lon - kAsu.min_lon) <= 1e-6);
    CHECK(std::abs(bounds->min_lat - kAsu.min_lat) <= 1e-6);
    CHECK(std::abs(bounds->max_lon - kAsu.max_lon) <= 1e-6);
    CHECK(std::abs(bounds->max_lat - kAsu.max_lat) <= 1e-6);
    CHECK(body == read_file((test::data_dir() / "osm/asu.osm").string()));

    const auto inner = download_osm({-111.94, 33.42, -111.93, 33.425}, tmp / "inner", offline());
    CHECK(read_file(inner.string()) == body);
    const auto again = download_osm(kAsu, tmp / "again", offline());
    CHECK(read_file(again.string()) == body);

    CHECK(code_of([&] { download_osm({-112.0, 33.0, -110.0, 35.0}, tmp.path(), offline()); }) == Errc::AreaTooLarge);
    CHECK(code_of([&] { download_osm({10.0, 10.0, 10.1, 10.1}, tmp.path(), offline()); }) == Errc::NoFixture);
    CHECK(code_of([&] { download_osm({1.0, 1.0, 0.0, 2.0}, tmp.path(), offline()); }) == Errc::InvalidArgument);
}

TEST_CASE("show_on_map")
{
    TempDir tmp;
    const auto art = show_on_map(kAsu, tmp.path());
    CHECK(art.share_link == "https://www.openstreetmap.org/?bbox=-111.9431,33.4154,-111.9239,33.428");
    CHECK(art.share_link.size() > 34);
    CHECK(std::filesystem::file_size(art.svg_path) > 0);
    const auto svg = read_file(art.svg_path.string());
    CHECK(svg.find("width=\"1000\"") != std::string::npos);
    CHECK(render_area_svg(kAsu) == svg);

    network::RoadNetwork empty;
    CHECK(code_of([&] { show_on_map(empty, tmp.path()); }) == Errc::EmptyNetwork);

    network::RoadNetwork toy;
    toy.add_node({1, -111.94, 33.42, network::Control::none});
    toy.add_node({2, -111.93, 33.42, network::Control::none});
    toy.add_link({1, 1, 2, 930.0, 1, 10.0, {network::Mode::drive}});
    const auto m = show_on_map(toy, tmp.path());
    const auto toy_svg = read_file(m.svg_path.string());
    CHECK(count(toy_svg, "<polyline") == 1);
    CHECK(count(toy_svg, "<circle") == 2);
    CHECK(render_network_svg(toy) == toy_svg);
    CHECK(m.bbox.valid());
}

TEST_CASE("offline ASU flow from place name to bike network map")
{
    TempDir tmp;
    geo::GeoConfig cfg;
    cfg.offline = true;
    cfg.data_dir = test::data_dir();
    const auto bbox = geo::query_area_range("Arizona State University, Tempe Campus", cfg);
    CHECK(bbox == BBox {-111.9431, 33.4154, -111.9239, 33.4280});
    const auto osm = geo::download_osm(bbox, tmp.path(), cfg);
    const auto net = network::parse_osm(osm.string());
    const auto bike = network::filter_network(net, network::Mode::bike, tmp.path());
    CHECK_FALSE(bike.network.links().empty());
    const auto back = network::read_gmns(bike.dir);
    CHECK(network::equivalent(bike.network, back));
    const auto map = geo::show_on_map(back, tmp.path());
    CHECK(fs::exists(map.svg_path));
    CHECK(map.share_link == geo::share_link(map.bbox));
    CHECK(bbox.contains_point(map.bbox.min_lon, map.bbox.min_lat));
    CHECK(bbox.contains_point(map.bbox.max_lon, map.bbox.max_lat));
}
