#include "cellgraph/network.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <limits>
#include <unordered_map>

namespace cellgraph {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

bool parse_flag(std::string_view raw) {
    std::string v(trim(raw));
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "1" || v == "true" || v == "yes" || v == "y") return true;
    if (v.empty() || v == "0" || v == "false" || v == "no" || v == "n") return false;
    throw InvalidArgument("bad suspect flag '" + std::string(raw) + "'");
}

std::optional<std::string> optional_text(std::string_view raw) {
    raw = trim(raw);
    if (raw.empty()) return std::nullopt;
    return std::string(raw);
}

}  // namespace

std::string_view to_string(EdgeClass c) {
    switch (c) {
        case EdgeClass::personal: return "personal";
        case EdgeClass::bridge: return "bridge";
        case EdgeClass::organization: return "organization";
    }
    return "personal";
}

Annotations parse_annotations(std::istream& input) {
    static const std::vector<std::string> columns = {"subscriber_id", "label", "suspect",
                                                     "crime_type", "address", "photo_ref"};
    std::string line;
    if (!csv::read_line(input, line)) {
        throw ParseError(1, "malformed header: empty input");
    }
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = csv::split_line(line);
    if (header.size() != columns.size()) {
        throw ParseError(1, "malformed header: expected subscriber_id,label,suspect,crime_type,address,photo_ref");
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (trim(header[i]) != columns[i]) {
            throw ParseError(1, "malformed header: column " + std::to_string(i + 1) + " must be '" + columns[i] + "'");
        }
    }
    Annotations out;
    std::set<std::string> palette;
    std::size_t line_no = 1;
    while (csv::read_line(input, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            const auto f = csv::split_line(line);
            if (f.size() != columns.size()) {
                throw InvalidArgument("expected 6 fields, got " + std::to_string(f.size()));
            }
            NodeAnnotation a;
            a.label = std::string(trim(f[1]));
            a.suspect = parse_flag(f[2]);
            a.crime_type = optional_text(f[3]);
            a.address = optional_text(f[4]);
            a.photo_ref = optional_text(f[5]);
            if (a.crime_type) palette.insert(*a.crime_type);
            auto id = normalize_subscriber(f[0]);
            if (!out.by_subscriber.emplace(id, std::move(a)).second) {
                throw InvalidArgument("duplicate subscriber_id '" + id + "'");
            }
        } catch (const InvalidArgument& e) {
            throw ParseError(line_no, e.what());
        }
    }
    out.crime_palette.assign(palette.begin(), palette.end());
    return out;
}

std::optional<std::size_t> CrimeNetwork::index_of(std::string_view id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const Node& n, std::string_view key) { return n.id < key; });
    if (it == nodes_.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
}

std::size_t CrimeNetwork::require_index(std::string_view id) const {
    auto idx = index_of(id);
    if (!idx) throw NotFound("unknown node id '" + std::string(id) + "'");
    return *idx;
}

std::span<const Neighbor> CrimeNetwork::neighbors(std::size_t node) const {
    return std::span<const Neighbor>(adjacency_).subspan(adjacency_offsets_[node],
                                                         adjacency_offsets_[node + 1] - adjacency_offsets_[node]);
}

EdgeClass CrimeNetwork::edge_class(const Edge& e) const {
    const int suspects = (nodes_[e.source].info.suspect ? 1 : 0) + (nodes_[e.target].info.suspect ? 1 : 0);
    return suspects == 2 ? EdgeClass::organization : suspects == 1 ? EdgeClass::bridge : EdgeClass::personal;
}

void CrimeNetwork::index() {
    adjacency_offsets_.assign(nodes_.size() + 1, 0);
    for (const auto& e : edges_) {
        ++adjacency_offsets_[e.source + 1];
        ++adjacency_offsets_[e.target + 1];
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) adjacency_offsets_[i + 1] += adjacency_offsets_[i];
    adjacency_.assign(adjacency_offsets_.back(), Neighbor{0, 0});
    std::vector<std::size_t> fill(adjacency_offsets_.begin(), adjacency_offsets_.end() - 1);
    for (std::size_t k = 0; k < edges_.size(); ++k) {
        adjacency_[fill[edges_[k].source]++] = {edges_[k].target, k};
        adjacency_[fill[edges_[k].target]++] = {edges_[k].source, k};
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(adjacency_offsets_[i]),
                  adjacency_.begin() + static_cast<std::ptrdiff_t>(adjacency_offsets_[i + 1]),
                  [](const Neighbor& a, const Neighbor& b) { return a.node != b.node ? a.node < b.node : a.edge < b.edge; });
    }
}

CrimeNetwork CrimeNetwork::with_annotations(const Annotations& annotations) const {
    CrimeNetwork out = *this;
    for (auto& node : out.nodes_) {
        auto it = annotations.by_subscriber.find(node.id);
        node.info = it != annotations.by_subscriber.end() ? it->second : NodeAnnotation{};
    }
    out.crime_palette_ = annotations.crime_palette;
    return out;
}

CrimeNetwork CrimeNetwork::with_provenance(Provenance provenance) const {
    CrimeNetwork out = *this;
    out.provenance_ = std::move(provenance);
    return out;
}

CrimeNetwork CrimeNetwork::induced(const std::vector<std::size_t>& keep) const {
    std::vector<std::size_t> sorted = keep;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    constexpr auto none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> remap(nodes_.size(), none);
    CrimeNetwork out;
    out.edge_mode_ = edge_mode_;
    out.weight_mode_ = weight_mode_;
    out.provenance_ = provenance_;
    out.crime_palette_ = crime_palette_;
    for (std::size_t i : sorted) {
        if (i >= nodes_.size()) throw InvalidArgument("induced: node index out of range");
        remap[i] = out.nodes_.size();
        out.nodes_.push_back(nodes_[i]);
    }
    for (const auto& e : edges_) {
        if (remap[e.source] != none && remap[e.target] != none) {
            Edge copy = e;
            copy.source = remap[e.source];
            copy.target = remap[e.target];
            out.edges_.push_back(copy);
        }
    }
    out.index();
    return out;
}

CrimeNetwork build_network(std::span<const CallRecord> records, EdgeMode mode, WeightMode weight) {
    CrimeNetwork net;
    net.edge_mode_ = mode;
    net.weight_mode_ = weight;

    std::vector<std::string> ids;
    ids.reserve(records.size() * 2);
    for (const auto& r : records) {
        if (r.caller == r.callee) {
            throw InvalidArgument("build_network: self-call for subscriber " + r.caller);
        }
        ids.push_back(r.caller);
        ids.push_back(r.callee);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::unordered_map<std::string_view, std::size_t> index;
    index.reserve(ids.size());
    net.nodes_.reserve(ids.size());
    for (auto& id : ids) net.nodes_.push_back(Node{std::move(id), {}});
    for (std::size_t i = 0; i < net.nodes_.size(); ++i) index.emplace(net.nodes_[i].id, i);

    // Aggregation uses commutative operations only (sum, min, max), so the
    // result does not depend on record order.
    std::map<std::pair<std::size_t, std::size_t>, Edge> edges;
    for (const auto& r : records) {
        const std::size_t from = index.at(r.caller);
        const std::size_t to = index.at(r.callee);
        const bool swap = mode == EdgeMode::undirected && to < from;
        const auto key = swap ? std::pair{to, from} : std::pair{from, to};
        auto [it, fresh] = edges.try_emplace(key);
        Edge& e = it->second;
        if (fresh) {
            e.source = key.first;
            e.target = key.second;
            e.first_seen = r.start;
            e.last_seen = r.start;
        }
        e.call_count += 1;
        e.total_duration += r.duration_s;
        e.first_seen = std::min(e.first_seen, r.start);
        e.last_seen = std::max(e.last_seen, r.start);
        (swap ? e.backward_count : e.forward_count) += 1;
    }
    net.edges_.reserve(edges.size());
    for (auto& [key, e] : edges) {
        const auto raw = weight == WeightMode::count ? e.call_count : e.total_duration;
        e.weight = static_cast<double>(std::max<std::int64_t>(raw, 1));
        net.edges_.push_back(e);
    }
    net.index();
    return net;
}

CrimeNetwork filter_window(std::span<const CallRecord> records, TimeWindow window, EdgeMode mode, WeightMode weight) {
    if (!(window.start < window.end)) {
        throw InvalidArgument("filter_window: inverted window");
    }
    std::vector<CallRecord> kept;
    for (const auto& r : records) {
        if (window.contains(r.start)) kept.push_back(r);
    }
    auto net = build_network(kept, mode, weight);
    return net.with_provenance(Provenance{{}, window});
}

CrimeNetwork ego_expand(const CrimeNetwork& network, const std::set<std::string>& seeds, std::size_t radius) {
    constexpr auto unreached = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> dist(network.node_count(), unreached);
    std::deque<std::size_t> queue;
    for (const auto& id : seeds) {
        const auto i = network.require_index(id);
        if (dist[i] == unreached) {
            dist[i] = 0;
            queue.push_back(i);
        }
    }
    std::vector<std::size_t> keep;
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        keep.push_back(u);
        if (dist[u] == radius) continue;
        for (const auto& nb : network.neighbors(u)) {
            if (dist[nb.node] == unreached) {
                dist[nb.node] = dist[u] + 1;
                queue.push_back(nb.node);
            }
        }
    }
    return network.induced(keep);
}

}  // namespace cellgraph
