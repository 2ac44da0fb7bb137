#include "cellgraph/analytics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace cellgraph {

std::vector<std::size_t> CommunityAssignment::community_sizes() const {
    std::vector<std::size_t> sizes(community_count, 0);
    for (auto c : membership) ++sizes.at(c);
    return sizes;
}

std::size_t compact_labels(std::vector<std::size_t>& labels) {
    std::map<std::size_t, std::size_t> remap;
    for (auto& l : labels) {
        auto [it, fresh] = remap.try_emplace(l, remap.size());
        l = it->second;
    }
    return remap.size();
}

CentralityReport centrality(const CrimeNetwork& network, bool weighted, Execution execution) {
    const auto graph = LinkGraph::from_network(network);
    const auto b = execution == Execution::parallel ? kernels::brandes_parallel(graph, weighted)
                                                    : kernels::brandes_serial(graph, weighted);
    CentralityReport report;
    report.degree.resize(network.node_count());
    report.weighted_degree.assign(network.node_count(), 0.0);
    for (std::size_t i = 0; i < network.node_count(); ++i) {
        const auto nbrs = network.neighbors(i);
        report.degree[i] = nbrs.size();
        for (const auto& nb : nbrs) report.weighted_degree[i] += network.edges()[nb.edge].weight;
    }
    report.node_betweenness = b.node;
    report.edge_betweenness.resize(network.edge_count());
    for (std::size_t e = 0; e < network.edge_count(); ++e) {
        report.edge_betweenness[e] = b.link[graph.edge_link[e]];
    }
    return report;
}

double modularity(const LinkGraph& graph, std::span<const std::size_t> membership) {
    if (membership.size() != graph.node_count) {
        throw InvalidArgument("modularity: assignment does not cover every node");
    }
    double two_m = 0.0;
    std::vector<double> strength(graph.node_count, 0.0);
    for (std::size_t l = 0; l < graph.links.size(); ++l) {
        const auto [u, v] = graph.links[l];
        strength[u] += graph.link_weight[l];
        strength[v] += graph.link_weight[l];
        two_m += 2.0 * graph.link_weight[l];
    }
    if (two_m == 0.0) return 0.0;
    const std::size_t k = membership.empty() ? 0 : *std::max_element(membership.begin(), membership.end()) + 1;
    std::vector<double> inside(k, 0.0);
    std::vector<double> total(k, 0.0);
    for (std::size_t l = 0; l < graph.links.size(); ++l) {
        const auto [u, v] = graph.links[l];
        if (membership[u] == membership[v]) inside[membership[u]] += 2.0 * graph.link_weight[l];
    }
    for (std::size_t i = 0; i < graph.node_count; ++i) total[membership[i]] += strength[i];
    double q = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        const double a = total[c] / two_m;
        q += inside[c] / two_m - a * a;
    }
    return q;
}

double modularity(const CrimeNetwork& network, std::span<const std::size_t> membership) {
    return modularity(LinkGraph::from_network(network), membership);
}

double modularity(const CrimeNetwork& network, const CommunityAssignment& assignment) {
    return modularity(network, assignment.membership);
}

namespace {

struct LevelGraph {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj;  // no self entries, sorted
    std::vector<double> self_loop;
    std::vector<double> strength;  // 2 * self_loop + sum of adjacent weights
    double two_m = 0.0;

    std::size_t size() const { return adj.size(); }
};

LevelGraph level_from(const LinkGraph& g) {
    LevelGraph lg;
    lg.adj.resize(g.node_count);
    lg.self_loop.assign(g.node_count, 0.0);
    lg.strength.assign(g.node_count, 0.0);
    for (std::size_t v = 0; v < g.node_count; ++v) {
        for (std::size_t k = g.offsets[v]; k < g.offsets[v + 1]; ++k) {
            const double w = g.link_weight[g.link_of[k]];
            lg.adj[v].emplace_back(g.targets[k], w);
            lg.strength[v] += w;
        }
        lg.two_m += lg.strength[v];
    }
    return lg;
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<std::size_t>& community, std::size_t count) {
    LevelGraph out;
    out.adj.resize(count);
    out.self_loop.assign(count, 0.0);
    out.strength.assign(count, 0.0);
    out.two_m = g.two_m;
    std::vector<std::map<std::size_t, double>> rows(count);
    for (std::size_t v = 0; v < g.size(); ++v) {
        const auto cv = community[v];
        out.self_loop[cv] += g.self_loop[v];
        out.strength[cv] += g.strength[v];
        for (const auto& [u, w] : g.adj[v]) {
            const auto cu = community[u];
            if (cu == cv) {
                out.self_loop[cv] += w / 2.0;  // seen once from each endpoint
            } else {
                rows[cv][cu] += w;
            }
        }
    }
    for (std::size_t c = 0; c < count; ++c) out.adj[c].assign(rows[c].begin(), rows[c].end());
    return out;
}

// One local-moving phase. Community ids are visit ranks, so the outcome is
// determined by the visit order alone. Returns whether any node moved.
bool local_moving(const LevelGraph& g, const std::vector<std::size_t>& order, std::vector<std::size_t>& community) {
    const std::size_t n = g.size();
    community.assign(n, 0);
    std::vector<double> total(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        community[order[r]] = r;
        total[r] = g.strength[order[r]];
    }
    if (g.two_m == 0.0) return false;

    std::vector<double> link_to(n, 0.0);
    std::vector<char> touched_flag(n, 0);
    std::vector<std::size_t> touched;
    bool moved_any = false;
    bool moved = true;
    while (moved) {
        moved = false;
        for (const auto v : order) {
            const auto current = community[v];
            const double k = g.strength[v];
            touched.clear();
            for (const auto& [u, w] : g.adj[v]) {
                const auto c = community[u];
                if (!touched_flag[c]) {
                    touched_flag[c] = 1;
                    touched.push_back(c);
                }
                link_to[c] += w;
            }
            std::sort(touched.begin(), touched.end());

            total[current] -= k;
            auto gain = [&](std::size_t c) { return link_to[c] - total[c] * k / g.two_m; };
            const double tolerance = 1e-12 * std::max(1.0, k);
            std::size_t best = current;
            double best_gain = touched_flag[current] ? gain(current) : -total[current] * k / g.two_m;
            for (const auto c : touched) {
                if (c == current) continue;
                const double candidate = gain(c);
                if (candidate > best_gain + tolerance) {
                    best = c;
                    best_gain = candidate;
                }
            }
            total[best] += k;
            community[v] = best;
            if (best != current) moved = true;

            for (const auto c : touched) {
                link_to[c] = 0.0;
                touched_flag[c] = 0;
            }
        }
        moved_any = moved_any || moved;
    }
    return moved_any;
}

}  // namespace

CommunityAssignment louvain(const LinkGraph& graph, const LouvainOptions& options) {
    const std::size_t n = graph.node_count;
    std::vector<std::size_t> membership(n);
    std::iota(membership.begin(), membership.end(), 0);

    if (options.visit_order) {
        auto check = *options.visit_order;
        std::sort(check.begin(), check.end());
        for (std::size_t i = 0; i < check.size(); ++i) {
            if (check.size() != n || check[i] != i) throw InvalidArgument("louvain: visit order is not a permutation");
        }
    }

    CommunityAssignment result;
    std::mt19937_64 rng(options.seed);
    LevelGraph level = level_from(graph);
    bool first = true;
    while (level.size() > 0) {
        std::vector<std::size_t> order(level.size());
        if (first && options.visit_order) {
            order = *options.visit_order;
        } else {
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
        }
        first = false;

        std::vector<std::size_t> community;
        if (!local_moving(level, order, community)) break;

        // renumber by first appearance along the visit order
        std::vector<std::size_t> renumber(level.size(), level.size());
        std::size_t count = 0;
        for (const auto v : order) {
            if (renumber[community[v]] == level.size()) renumber[community[v]] = count++;
        }
        for (auto& c : community) c = renumber[c];
        for (auto& m : membership) m = community[m];
        result.level_modularity.push_back(modularity(graph, membership));
        if (count == level.size()) break;
        level = aggregate(level, community, count);
    }

    result.community_count = compact_labels(membership);
    result.membership = std::move(membership);
    result.modularity = modularity(graph, result.membership);
    return result;
}

CommunityAssignment louvain(const CrimeNetwork& network, std::uint64_t seed) {
    return louvain(LinkGraph::from_network(network), LouvainOptions{seed, std::nullopt});
}

CommunityAssignment group_by_crime_type(const CrimeNetwork& network) {
    const auto palette = network.crime_palette();
    std::vector<std::size_t> labels(network.node_count());
    for (std::size_t i = 0; i < network.node_count(); ++i) {
        const auto& crime = network.nodes()[i].info.crime_type;
        auto it = crime ? std::find(palette.begin(), palette.end(), *crime) : palette.end();
        labels[i] = static_cast<std::size_t>(it - palette.begin());
    }
    // contiguous, in palette order, unassigned last
    std::vector<std::size_t> present(labels);
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    CommunityAssignment out;
    out.membership.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.membership[i] = static_cast<std::size_t>(std::lower_bound(present.begin(), present.end(), labels[i]) -
                                                     present.begin());
    }
    out.community_count = present.size();
    out.modularity = modularity(network, out.membership);
    return out;
}

}  // namespace cellgraph
