#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"

#include "cellgraph/analytics.hpp"
#include "cellgraph/fisheye.hpp"
#include "cellgraph/geomap.hpp"
#include "cellgraph/layout.hpp"
#include "cellgraph/network.hpp"

namespace cellgraph {

using json = nlohmann::ordered_json;

json to_json(const CrimeNetwork& network);
json to_json(const GeoFrame& frame);
json to_json(const LayoutParams& params);

/// Applies the fields present in `patch` over `base`; unknown keys are
/// rejected. The result is validated.
LayoutParams params_from_json(const json& patch, LayoutParams base = {});

/// Extra per-frame metadata that does not live in the simulation.
struct FrameAnnotations {
    std::optional<std::size_t> seq;
    std::optional<std::string> focus_node;
    std::optional<FisheyeSpec> focus;
    std::optional<TimeWindow> window;
    bool converged = false;
    bool heartbeat = false;
};

/// `{tick, mode, nodes:[{id,x,y,vx,vy,community}], energy, ...}`.
json frame_to_json(const LayoutFrame& frame, const FrameAnnotations& extra = {});

/// CSV `node_id,degree,weighted_degree,betweenness,community`.
void write_metrics_csv(std::ostream& out, const CrimeNetwork& network, const CentralityReport& report,
                       const CommunityAssignment& communities);

/// Shortest text that reads back to the same double.
std::string format_double(double value);

}  // namespace cellgraph
