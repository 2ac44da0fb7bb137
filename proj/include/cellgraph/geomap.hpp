#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cellgraph/cdr.hpp"
#include "cellgraph/core.hpp"

namespace cellgraph {

/// True iff the bearing lies within beamwidth/2 of the sector azimuth,
/// both edges inclusive. Bearing must be in [0, 360).
bool contains_bearing(const CellSector& sector, double bearing_deg);

/// Signed difference bearing - azimuth normalized into (-180, 180].
double angular_difference(double bearing_deg, double azimuth_deg);

enum class ZonePlacement {
    cell_site,       // antenna coordinates
    sector_midpoint  // half range along the azimuth
};

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
};

/// Destination on a spherical earth after `distance_m` along `bearing_deg`.
GeoPoint destination(GeoPoint origin, double bearing_deg, double distance_m);

struct GeoZone {
    std::string cell_id;
    GeoPoint position;
    std::size_t contact_count = 0;
    std::set<std::string> members;
    std::string color;
    /// Display radius; strictly increasing in contact_count.
    double size = 0.0;
};

struct DisplacementEdge {
    std::string subscriber;
    std::string from_zone;
    std::string to_zone;
    Timestamp depart;
    Timestamp arrive;

    bool operator==(const DisplacementEdge&) const = default;
};

/// Geographic bounding box mapped onto a width x height canvas.
struct Viewport {
    double width = 1024.0;
    double height = 1024.0;
    double west = -180.0;
    double east = 180.0;
    double south = -85.05112878;
    double north = 85.05112878;

    static Viewport world(double width, double height) { return Viewport{width, height}; }
};

struct GeoFrame {
    TimeWindow window;
    std::vector<GeoZone> zones;                  // by cell id
    std::vector<DisplacementEdge> displacements;  // by subscriber, then time
    std::size_t in_window_records = 0;
    std::size_t unresolved_records = 0;
    /// Consecutive sightings of one subscriber in different cells with the
    /// same timestamp; dropped because a displacement needs depart < arrive.
    std::size_t simultaneous_transitions = 0;
    Viewport viewport;
    ZonePlacement placement = ZonePlacement::cell_site;
};

struct GeoOptions {
    ZonePlacement placement = ZonePlacement::cell_site;
    Viewport viewport;
};

/// Groups in-window records by the caller-side cell and chains each
/// caller's consecutive sightings into displacement edges.
GeoFrame build_geo_frame(std::span<const CallRecord> records, const CellRegistry& registry, TimeWindow window,
                         const GeoOptions& options = {});

/// Stable categorical color for a zone id.
std::string zone_color(std::string_view zone_id);

/// Display radius for a zone with `count` contacts.
double zone_size(std::size_t count);

inline constexpr double kMercatorMaxLat = 85.05113;

/// Web Mercator forward projection into the viewport. x grows with
/// longitude, y grows southward. Throws InvalidArgument for |lat| beyond
/// kMercatorMaxLat.
Vec2 project(double lat, double lon, const Viewport& viewport);

}  // namespace cellgraph
