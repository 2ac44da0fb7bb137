#pragma once

// Data-parallel kernels. Each OpenMP kernel has a serial counterpart that is
// kept as the reference for tests and benchmarks. Parallel kernels produce
// results that do not depend on the thread count or schedule.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "cellgraph/core.hpp"

namespace cellgraph {

class CrimeNetwork;

/// Undirected, index-based view of a network used by the numeric kernels.
/// Parallel directed edges collapse into one link with summed weight.
struct LinkGraph {
    std::size_t node_count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> links;  // (u, v), u < v
    std::vector<double> link_weight;
    std::vector<std::size_t> offsets;  // CSR over nodes
    std::vector<std::size_t> targets;
    std::vector<std::size_t> link_of;  // link index of each CSR entry
    /// For each network edge, the link it maps to.
    std::vector<std::size_t> edge_link;

    static LinkGraph from_network(const CrimeNetwork& network);
    static LinkGraph from_links(std::size_t node_count, std::vector<std::pair<std::size_t, std::size_t>> links,
                                std::vector<double> weights = {});
};

struct Betweenness {
    std::vector<double> node;
    std::vector<double> link;
};

namespace kernels {

/// Brandes accumulation over all sources, one after another. Unnormalized,
/// each unordered pair counted once. Weighted mode uses 1/weight lengths.
Betweenness brandes_serial(const LinkGraph& graph, bool weighted);

/// Same result as brandes_serial (to rounding); sources are processed in
/// fixed-size blocks in parallel and the block sums are reduced in order.
Betweenness brandes_parallel(const LinkGraph& graph, bool weighted);

/// Exact O(n^2) repulsion: F_i = sum_j k * m_i * m_j / d^2 along (p_i - p_j).
/// Coincident pairs contribute nothing.
std::vector<Vec2> repulsion_exact(std::span<const Vec2> positions, std::span<const double> masses,
                                  double constant);

/// Barnes-Hut repulsion over a quadtree; cells with size/distance < theta
/// are treated as point masses at their center of mass. Per-node evaluation
/// runs in parallel. theta = 0 reproduces repulsion_exact.
std::vector<Vec2> repulsion_barnes_hut(std::span<const Vec2> positions, std::span<const double> masses,
                                       double constant, double theta);

/// Serial variant of repulsion_barnes_hut, for benchmarking.
std::vector<Vec2> repulsion_barnes_hut_serial(std::span<const Vec2> positions, std::span<const double> masses,
                                              double constant, double theta);

}  // namespace kernels

}  // namespace cellgraph
