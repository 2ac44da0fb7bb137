#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "doctest.h"

#include "cellgraph/geomap.hpp"

using namespace cellgraph;

namespace {

CellSector sector(double azimuth, double beamwidth) {
    CellSector s;
    s.cell_id = "S";
    s.azimuth_deg = azimuth;
    s.beamwidth_deg = beamwidth;
    return s;
}

// Inside iff some copy of the bearing shifted by a whole turn falls within
// [azimuth - w/2, azimuth + w/2].
bool in_sector_by_unwrapping(double azimuth, double beamwidth, double bearing) {
    for (int k = -2; k <= 2; ++k) {
        const double b = bearing + 360.0 * k;
        if (b >= azimuth - beamwidth / 2 && b <= azimuth + beamwidth / 2) return true;
    }
    return false;
}

CallRecord sighting(const std::string& who, const std::string& cell, std::int64_t t) {
    CallRecord r;
    r.caller = who;
    r.callee = "999";
    r.start = Timestamp{t};
    r.cell_id = cell;
    return r;
}

CellRegistry cells(std::initializer_list<const char*> ids) {
    CellRegistry reg;
    double lat = 38.0;
    for (const char* id : ids) {
        CellSector s;
        s.cell_id = id;
        s.lat = lat;
        s.lon = 15.5;
        s.azimuth_deg = 90;
        s.beamwidth_deg = 120;
        s.range_m = 2000;
        reg.add(s);
        lat += 0.01;
    }
    return reg;
}

}  // namespace

TEST_CASE("sector membership") {
    CHECK(contains_bearing(sector(90, 120), 30));
    CHECK_FALSE(contains_bearing(sector(90, 120), 151));
    CHECK(contains_bearing(sector(90, 120), 150));
    CHECK(contains_bearing(sector(350, 40), 5));
    CHECK(contains_bearing(sector(350, 40), 330));
    CHECK_FALSE(contains_bearing(sector(350, 40), 11));
    for (int b = 0; b < 360; ++b) CHECK(contains_bearing(sector(17, 360), b));
    CHECK_THROWS_AS(contains_bearing(sector(0, 10), 360.0), InvalidArgument);
    CHECK_THROWS_AS(contains_bearing(sector(0, 10), -1.0), InvalidArgument);
}

TEST_CASE("sector membership matches the unwrapping oracle") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> az(0, 359), bw(1, 360);
    for (int s = 0; s < 200; ++s) {
        const double a = az(rng), w = bw(rng);
        for (int b = 0; b < 360; ++b) CHECK(contains_bearing(sector(a, w), b) == in_sector_by_unwrapping(a, w, b));
    }
}

TEST_CASE("angular difference range") {
    CHECK(angular_difference(5, 350) == 15.0);
    CHECK(angular_difference(350, 5) == -15.0);
    CHECK(angular_difference(180, 0) == 180.0);
    CHECK(angular_difference(0, 180) == 180.0);
}

TEST_CASE("two calls from one cell make one zone") {
    const auto reg = cells({"CELL0042"});
    const std::vector<CallRecord> records{sighting("1", "CELL0042", 10), sighting("2", "CELL0042", 20)};
    const auto frame = build_geo_frame(records, reg, make_window(Timestamp{0}, Timestamp{100}));
    REQUIRE(frame.zones.size() == 1);
    CHECK(frame.zones[0].contact_count == 2);
    CHECK(frame.zones[0].members == std::set<std::string>{"1", "2"});
    CHECK(frame.zones[0].color == zone_color("CELL0042"));
    CHECK(frame.displacements.empty());
}

TEST_CASE("a trajectory becomes a displacement chain") {
    const auto reg = cells({"C1", "C2", "C3"});
    // out of order on purpose, plus another subscriber standing still
    const std::vector<CallRecord> records{sighting("7", "C3", 300), sighting("7", "C1", 100), sighting("8", "C2", 150),
                                          sighting("7", "C2", 200), sighting("7", "C2", 250), sighting("8", "C2", 400)};
    const auto frame = build_geo_frame(records, reg, make_window(Timestamp{0}, Timestamp{1000}));
    const std::vector<DisplacementEdge> want{{"7", "C1", "C2", Timestamp{100}, Timestamp{200}},
                                             {"7", "C2", "C3", Timestamp{250}, Timestamp{300}}};
    CHECK(frame.displacements == want);
}

TEST_CASE("same-second transitions are counted, not emitted") {
    const auto reg = cells({"C1", "C2"});
    const std::vector<CallRecord> records{sighting("7", "C1", 100), sighting("7", "C2", 100)};
    const auto frame = build_geo_frame(records, reg, make_window(Timestamp{0}, Timestamp{1000}));
    CHECK(frame.displacements.empty());
    CHECK(frame.simultaneous_transitions == 1);
}

TEST_CASE("fixture frames conserve counts and partition over windows") {
    std::ifstream cdr(CELLGRAPH_TEST_DATA "/cdr_1k.csv"), bts(CELLGRAPH_TEST_DATA "/bts.csv");
    const auto records = parse_cdr(cdr).records;
    const auto reg = parse_bts(bts);
    const Timestamp a{records.front().start.epoch_seconds()};
    const Timestamp c{records.back().start.epoch_seconds() + 1};
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Timestamp b{a.epoch_seconds() + static_cast<std::int64_t>(rng() % (c.epoch_seconds() - a.epoch_seconds()))};
        if (!(a < b)) continue;
        const auto whole = build_geo_frame(records, reg, make_window(a, c));
        const auto left = build_geo_frame(records, reg, make_window(a, b));
        const auto right = build_geo_frame(records, reg, make_window(b, c));
        for (const auto* f : {&whole, &left, &right}) {
            std::size_t total = f->unresolved_records;
            for (const auto& z : f->zones) {
                total += z.contact_count;
                CHECK(z.contact_count >= 1);
            }
            CHECK(total == f->in_window_records);
            std::set<std::string> ids;
            for (const auto& z : f->zones) ids.insert(z.cell_id);
            for (const auto& d : f->displacements) {
                CHECK(ids.count(d.from_zone));
                CHECK(ids.count(d.to_zone));
                CHECK(d.depart < d.arrive);
            }
            // per subscriber the chain is time ordered
            for (std::size_t k = 1; k < f->displacements.size(); ++k) {
                const auto& p = f->displacements[k - 1];
                const auto& q = f->displacements[k];
                if (p.subscriber == q.subscriber) CHECK(p.arrive <= q.depart);
                else CHECK(p.subscriber < q.subscriber);
            }
        }
        CHECK(whole.in_window_records == records.size());
        CHECK(whole.unresolved_records == 2);
        std::map<std::string, std::size_t> sum;
        for (const auto* f : {&left, &right}) {
            for (const auto& z : f->zones) sum[z.cell_id] += z.contact_count;
        }
        std::map<std::string, std::size_t> expect;
        for (const auto& z : whole.zones) expect[z.cell_id] = z.contact_count;
        CHECK(sum == expect);
        CHECK(left.in_window_records + right.in_window_records == whole.in_window_records);
    }
}

TEST_CASE("zone size follows contact count") {
    for (std::size_t k = 1; k < 500; ++k) CHECK(zone_size(k) < zone_size(k + 1));
    CHECK(zone_color("CELL0001") == zone_color("CELL0001"));
}

TEST_CASE("sector midpoint placement") {
    const auto reg = cells({"C1"});
    const std::vector<CallRecord> records{sighting("7", "C1", 100)};
    GeoOptions opts;
    opts.placement = ZonePlacement::sector_midpoint;
    const auto f = build_geo_frame(records, reg, make_window(Timestamp{0}, Timestamp{1000}), opts);
    REQUIRE(f.zones.size() == 1);
    // azimuth 90: due east by 1 km, latitude essentially unchanged
    CHECK(f.zones[0].position.lat == doctest::Approx(38.0).epsilon(1e-6));
    const double east_m = (f.zones[0].position.lon - 15.5) * M_PI / 180 * 6371008.8 * std::cos(38.0 * M_PI / 180);
    CHECK(east_m == doctest::Approx(1000.0).epsilon(1e-3));
}

TEST_CASE("Web Mercator projection") {
    const auto world = Viewport::world(1024, 768);
    const Vec2 c = project(0, 0, world);
    CHECK(c.x == doctest::Approx(512));
    CHECK(c.y == doctest::Approx(384));
    CHECK(std::abs(project(kMercatorMaxLat, 0, world).y) <= 1e-6 * world.height);
    CHECK(std::abs(project(-kMercatorMaxLat, 0, world).y - world.height) <= 1e-6 * world.height);
    CHECK(project(10, 20, world).x < project(10, 20.001, world).x);
    CHECK(project(10, 20, world).y < project(9.999, 20, world).y);
    CHECK_THROWS_AS(project(85.06, 0, world), InvalidArgument);
    CHECK_THROWS_AS(project(-90, 0, world), InvalidArgument);

    // a city-scale viewport maps its corners onto the canvas corners
    const Viewport city{800, 600, 15.5, 15.7, 38.1, 38.3};
    const Vec2 nw = project(38.3, 15.5, city), se = project(38.1, 15.7, city);
    CHECK(nw.x == doctest::Approx(0).scale(1));
    CHECK(nw.y == doctest::Approx(0).scale(1));
    CHECK(se.x == doctest::Approx(800));
    CHECK(se.y == doctest::Approx(600));
}
