#include "cellgraph/geomap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

namespace cellgraph {

namespace {

constexpr double kEarthRadiusM = 6371008.8;

double radians(double deg) { return deg * std::numbers::pi / 180.0; }
double degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

double mercator_y(double lat_deg) {
    return std::log(std::tan(std::numbers::pi / 4.0 + radians(lat_deg) / 2.0));
}

// Tableau 10 plus two extras.
constexpr std::array<const char*, 12> kPalette = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
                                                  "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#1f77b4", "#17becf"};

}  // namespace

double angular_difference(double bearing_deg, double azimuth_deg) {
    double d = std::fmod(bearing_deg - azimuth_deg, 360.0);
    if (d <= -180.0) d += 360.0;
    if (d > 180.0) d -= 360.0;
    return d;
}

bool contains_bearing(const CellSector& sector, double bearing_deg) {
    if (!(bearing_deg >= 0.0 && bearing_deg < 360.0)) {
        throw InvalidArgument("bearing must lie in [0, 360)");
    }
    if (sector.beamwidth_deg >= 360.0) return true;
    return std::abs(angular_difference(bearing_deg, sector.azimuth_deg)) <= sector.beamwidth_deg / 2.0;
}

GeoPoint destination(GeoPoint origin, double bearing_deg, double distance_m) {
    const double phi1 = radians(origin.lat);
    const double lambda1 = radians(origin.lon);
    const double theta = radians(bearing_deg);
    const double delta = distance_m / kEarthRadiusM;
    const double phi2 =
        std::asin(std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(theta));
    const double lambda2 = lambda1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                                                std::cos(delta) - std::sin(phi1) * std::sin(phi2));
    double lon = std::fmod(degrees(lambda2) + 540.0, 360.0) - 180.0;
    return {degrees(phi2), lon};
}

std::string zone_color(std::string_view zone_id) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : zone_id) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return kPalette[h % kPalette.size()];
}

double zone_size(std::size_t count) { return 4.0 + 3.0 * std::sqrt(static_cast<double>(count)); }

Vec2 project(double lat, double lon, const Viewport& viewport) {
    if (!(std::abs(lat) <= kMercatorMaxLat)) {
        throw InvalidArgument("latitude beyond the Web Mercator cutoff");
    }
    if (!(viewport.width > 0 && viewport.height > 0 && viewport.east > viewport.west &&
          viewport.north > viewport.south)) {
        throw InvalidArgument("degenerate viewport");
    }
    const double x = (lon - viewport.west) / (viewport.east - viewport.west) * viewport.width;
    const double top = mercator_y(viewport.north);
    const double bottom = mercator_y(viewport.south);
    const double y = (top - mercator_y(lat)) / (top - bottom) * viewport.height;
    return {x, y};
}

GeoFrame build_geo_frame(std::span<const CallRecord> records, const CellRegistry& registry, TimeWindow window,
                         const GeoOptions& options) {
    if (!(window.start < window.end)) throw InvalidArgument("build_geo_frame: inverted window");
    GeoFrame frame;
    frame.window = window;
    frame.viewport = options.viewport;
    frame.placement = options.placement;

    struct Sighting {
        Timestamp at;
        std::size_t sequence;
        const CellSector* cell;
    };
    std::map<std::string, GeoZone> zones;
    std::map<std::string, std::vector<Sighting>> sightings;
    std::size_t sequence = 0;
    for (const auto& r : records) {
        if (!window.contains(r.start)) continue;
        ++frame.in_window_records;
        const CellSector* cell = r.cell_id ? registry.find(*r.cell_id) : nullptr;
        if (!cell) {
            ++frame.unresolved_records;
            continue;
        }
        auto [it, fresh] = zones.try_emplace(cell->cell_id);
        GeoZone& zone = it->second;
        if (fresh) {
            zone.cell_id = cell->cell_id;
            zone.color = zone_color(cell->cell_id);
            const GeoPoint site{cell->lat, cell->lon};
            zone.position = options.placement == ZonePlacement::cell_site
                                ? site
                                : destination(site, cell->azimuth_deg, cell->range_m / 2.0);
        }
        ++zone.contact_count;
        zone.members.insert(r.caller);
        sightings[r.caller].push_back({r.start, sequence++, cell});
    }

    frame.zones.reserve(zones.size());
    for (auto& [id, zone] : zones) {
        zone.size = zone_size(zone.contact_count);
        frame.zones.push_back(std::move(zone));
    }
    for (auto& [subscriber, list] : sightings) {
        std::stable_sort(list.begin(), list.end(), [](const Sighting& a, const Sighting& b) { return a.at < b.at; });
        for (std::size_t k = 1; k < list.size(); ++k) {
            const auto& prev = list[k - 1];
            const auto& cur = list[k];
            if (prev.cell == cur.cell) continue;
            if (!(prev.at < cur.at)) {
                ++frame.simultaneous_transitions;
                continue;
            }
            frame.displacements.push_back({subscriber, prev.cell->cell_id, cur.cell->cell_id, prev.at, cur.at});
        }
    }
    return frame;
}

}  // namespace cellgraph
