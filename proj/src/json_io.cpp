#include "cellgraph/json_io.hpp"

#include <charconv>

namespace cellgraph {

std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

namespace {

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

json window_json(const TimeWindow& w) {
    return json{{"start", w.start.to_iso8601()}, {"end", w.end.to_iso8601()}};
}

}  // namespace

json to_json(const CrimeNetwork& network) {
    json nodes = json::array();
    for (const auto& n : network.nodes()) {
        nodes.push_back({{"id", n.id},
                         {"label", n.info.label},
                         {"suspect", n.info.suspect},
                         {"crime_type", optional_string(n.info.crime_type)},
                         {"address", optional_string(n.info.address)},
                         {"photo_ref", optional_string(n.info.photo_ref)}});
    }
    json edges = json::array();
    for (const auto& e : network.edges()) {
        edges.push_back({{"source", network.nodes()[e.source].id},
                         {"target", network.nodes()[e.target].id},
                         {"call_count", e.call_count},
                         {"total_duration", e.total_duration},
                         {"first_seen", e.first_seen.to_iso8601()},
                         {"last_seen", e.last_seen.to_iso8601()},
                         {"forward_count", e.forward_count},
                         {"backward_count", e.backward_count},
                         {"weight", e.weight},
                         {"class", std::string(to_string(network.edge_class(e)))}});
    }
    const auto& prov = network.provenance();
    return json{{"directed", network.edge_mode() == EdgeMode::directed},
                {"weight", network.weight_mode() == WeightMode::count ? "count" : "duration"},
                {"provenance",
                 {{"dataset_id", prov.dataset_id}, {"window", prov.window ? window_json(*prov.window) : json(nullptr)}}},
                {"crime_palette", std::vector<std::string>(network.crime_palette().begin(), network.crime_palette().end())},
                {"nodes", std::move(nodes)},
                {"edges", std::move(edges)}};
}

json to_json(const GeoFrame& frame) {
    json zones = json::array();
    for (const auto& z : frame.zones) {
        zones.push_back({{"cell_id", z.cell_id},
                         {"lat", z.position.lat},
                         {"lon", z.position.lon},
                         {"count", z.contact_count},
                         {"color", z.color},
                         {"size", z.size},
                         {"members", std::vector<std::string>(z.members.begin(), z.members.end())}});
    }
    json displacements = json::array();
    for (const auto& d : frame.displacements) {
        displacements.push_back({{"subscriber", d.subscriber},
                                 {"from", d.from_zone},
                                 {"to", d.to_zone},
                                 {"depart", d.depart.to_iso8601()},
                                 {"arrive", d.arrive.to_iso8601()}});
    }
    const auto& vp = frame.viewport;
    return json{{"window", window_json(frame.window)},
                {"zones", std::move(zones)},
                {"displacements", std::move(displacements)},
                {"diagnostics",
                 {{"in_window_records", frame.in_window_records},
                  {"unresolved_records", frame.unresolved_records},
                  {"simultaneous_transitions", frame.simultaneous_transitions}}},
                {"projection",
                 {{"kind", "web_mercator"},
                  {"placement", frame.placement == ZonePlacement::cell_site ? "cell_site" : "sector_midpoint"},
                  {"width", vp.width},
                  {"height", vp.height},
                  {"west", vp.west},
                  {"east", vp.east},
                  {"south", vp.south},
                  {"north", vp.north}}}};
}

json to_json(const LayoutParams& p) {
    return json{{"spring_stiffness", p.spring_stiffness},     {"spring_rest_length", p.spring_rest_length},
                {"repulsion_constant", p.repulsion_constant}, {"gravity_strength", p.gravity_strength},
                {"viscosity", p.viscosity},                   {"theta", p.theta},
                {"time_step", p.time_step},                   {"max_speed", p.max_speed}};
}

LayoutParams params_from_json(const json& patch, LayoutParams base) {
    if (!patch.is_object()) throw InvalidArgument("layout params must be a JSON object");
    for (const auto& [key, value] : patch.items()) {
        double* field = key == "spring_stiffness"     ? &base.spring_stiffness
                        : key == "spring_rest_length" ? &base.spring_rest_length
                        : key == "repulsion_constant" ? &base.repulsion_constant
                        : key == "gravity_strength"   ? &base.gravity_strength
                        : key == "viscosity"          ? &base.viscosity
                        : key == "theta"              ? &base.theta
                        : key == "time_step"          ? &base.time_step
                        : key == "max_speed"          ? &base.max_speed
                                                      : nullptr;
        if (!field) throw InvalidArgument("unknown layout parameter '" + key + "'");
        if (!value.is_number()) throw InvalidArgument("layout parameter '" + key + "' must be a number");
        *field = value.get<double>();
    }
    base.validate();
    return base;
}

json frame_to_json(const LayoutFrame& frame, const FrameAnnotations& extra) {
    json nodes = json::array();
    for (std::size_t i = 0; i < frame.size(); ++i) {
        nodes.push_back({{"id", (*frame.ids)[i]},
                         {"x", frame.positions[i].x},
                         {"y", frame.positions[i].y},
                         {"vx", frame.velocities[i].x},
                         {"vy", frame.velocities[i].y},
                         {"community", frame.groups && i < frame.groups->size() ? (*frame.groups)[i] : 0}});
    }
    json centers = json::array();
    for (const auto& c : frame.centers) centers.push_back({{"x", c.x}, {"y", c.y}});

    json out;
    if (extra.seq) out["seq"] = *extra.seq;
    out["tick"] = frame.tick;
    out["mode"] = std::string(to_string(frame.mode));
    out["converged"] = extra.converged;
    if (extra.heartbeat) out["heartbeat"] = true;
    if (extra.focus) {
        out["focus"] = {{"node_id", extra.focus_node ? json(*extra.focus_node) : json(nullptr)},
                        {"x", extra.focus->focus.x},
                        {"y", extra.focus->focus.y},
                        {"d", extra.focus->distortion},
                        {"radius", extra.focus->radius}};
    } else {
        out["focus"] = nullptr;
    }
    out["window"] = extra.window ? window_json(*extra.window) : json(nullptr);
    out["centers"] = std::move(centers);
    out["canvas"] = {{"width", frame.canvas.width}, {"height", frame.canvas.height}};
    out["nodes"] = std::move(nodes);
    out["energy"] = frame.kinetic_energy;
    return out;
}

void write_metrics_csv(std::ostream& out, const CrimeNetwork& network, const CentralityReport& report,
                       const CommunityAssignment& communities) {
    out << "node_id,degree,weighted_degree,betweenness,community\n";
    for (std::size_t i = 0; i < network.node_count(); ++i) {
        out << network.nodes()[i].id << ',' << report.degree[i] << ',' << format_double(report.weighted_degree[i])
            << ',' << format_double(report.node_betweenness[i]) << ',' << communities.membership[i] << '\n';
    }
}

}  // namespace cellgraph
