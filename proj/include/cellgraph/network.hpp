#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cellgraph/cdr.hpp"
#include "cellgraph/core.hpp"

namespace cellgraph {

enum class EdgeMode { undirected, directed };
enum class WeightMode { count, duration };

/// Investigative annotations for one subscriber; loaded from a side-car file.
struct NodeAnnotation {
    std::string label;
    bool suspect = false;
    std::optional<std::string> crime_type;
    std::optional<std::string> address;
    std::optional<std::string> photo_ref;

    bool operator==(const NodeAnnotation&) const = default;
};

struct Annotations {
    std::map<std::string, NodeAnnotation, std::less<>> by_subscriber;
    /// Declared crime-type categories, sorted.
    std::vector<std::string> crime_palette;
};

/// Reads `subscriber_id,label,suspect,crime_type,address,photo_ref`.
Annotations parse_annotations(std::istream& input);

struct Node {
    std::string id;
    NodeAnnotation info;

    bool operator==(const Node&) const = default;
};

enum class EdgeClass { personal, bridge, organization };
std::string_view to_string(EdgeClass c);

struct Edge {
    std::size_t source = 0;  // node index; source < target in undirected mode
    std::size_t target = 0;
    std::int64_t call_count = 0;
    std::int64_t total_duration = 0;
    Timestamp first_seen;
    Timestamp last_seen;
    /// Calls placed source→target and target→source; direction kept for display.
    std::int64_t forward_count = 0;
    std::int64_t backward_count = 0;
    double weight = 1.0;

    bool operator==(const Edge&) const = default;
};

struct Provenance {
    std::string dataset_id;
    std::optional<TimeWindow> window;

    bool operator==(const Provenance&) const = default;
};

struct Neighbor {
    std::size_t node;
    std::size_t edge;
};

/// Immutable weighted call graph. Nodes are ordered by id; edges by
/// (source, target). Any modification goes through a builder and yields a
/// new instance.
class CrimeNetwork {
public:
    CrimeNetwork() = default;

    std::span<const Node> nodes() const { return nodes_; }
    std::span<const Edge> edges() const { return edges_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    EdgeMode edge_mode() const { return edge_mode_; }
    WeightMode weight_mode() const { return weight_mode_; }
    const Provenance& provenance() const { return provenance_; }
    std::span<const std::string> crime_palette() const { return crime_palette_; }

    std::optional<std::size_t> index_of(std::string_view id) const;
    /// Throws NotFound.
    std::size_t require_index(std::string_view id) const;

    /// Incident edges of a node regardless of direction, ordered by neighbor index.
    std::span<const Neighbor> neighbors(std::size_t node) const;

    EdgeClass edge_class(const Edge& e) const;

    /// Same graph with annotations attached (nodes absent from the graph are ignored).
    CrimeNetwork with_annotations(const Annotations& annotations) const;
    CrimeNetwork with_provenance(Provenance provenance) const;

    /// Induced subgraph on the given node indices.
    CrimeNetwork induced(const std::vector<std::size_t>& keep) const;

    bool operator==(const CrimeNetwork& o) const {
        return nodes_ == o.nodes_ && edges_ == o.edges_ && edge_mode_ == o.edge_mode_ &&
               weight_mode_ == o.weight_mode_ && provenance_ == o.provenance_ &&
               crime_palette_ == o.crime_palette_;
    }

private:
    friend CrimeNetwork build_network(std::span<const CallRecord>, EdgeMode, WeightMode);
    void index();

    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    EdgeMode edge_mode_ = EdgeMode::undirected;
    WeightMode weight_mode_ = WeightMode::count;
    Provenance provenance_;
    std::vector<std::string> crime_palette_;
    std::vector<std::size_t> adjacency_offsets_;
    std::vector<Neighbor> adjacency_;
};

CrimeNetwork build_network(std::span<const CallRecord> records, EdgeMode mode = EdgeMode::undirected,
                           WeightMode weight = WeightMode::count);

/// Network of the records with start in [window.start, window.end).
CrimeNetwork filter_window(std::span<const CallRecord> records, TimeWindow window,
                           EdgeMode mode = EdgeMode::undirected, WeightMode weight = WeightMode::count);

/// Induced subgraph on every node within `radius` hops of any seed (edges
/// traversed in both directions). Throws NotFound for an unknown seed.
CrimeNetwork ego_expand(const CrimeNetwork& network, const std::set<std::string>& seeds, std::size_t radius);

}  // namespace cellgraph
