#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cellgraph/kernels.hpp"
#include "cellgraph/network.hpp"

namespace cellgraph {

/// Partition of a network's nodes, indexed like `CrimeNetwork::nodes()`.
struct CommunityAssignment {
    std::vector<std::size_t> membership;
    std::size_t community_count = 0;
    double modularity = 0.0;
    /// Modularity after each Louvain level (empty for other producers).
    std::vector<double> level_modularity;

    std::vector<std::size_t> community_sizes() const;
};

struct CentralityReport {
    std::vector<std::size_t> degree;
    std::vector<double> weighted_degree;
    std::vector<double> node_betweenness;
    /// Indexed like `CrimeNetwork::edges()`. In directed networks both
    /// directions of a pair report the betweenness of their shared link.
    std::vector<double> edge_betweenness;
};

enum class Execution { serial, parallel };

/// Degree, weighted degree and Brandes betweenness (unnormalized) over the
/// undirected projection. Weighted mode uses 1/weight edge lengths.
CentralityReport centrality(const CrimeNetwork& network, bool weighted, Execution execution = Execution::parallel);

/// Newman-Girvan modularity with edge weights. Throws InvalidArgument when
/// the membership does not cover every node.
double modularity(const LinkGraph& graph, std::span<const std::size_t> membership);
double modularity(const CrimeNetwork& network, std::span<const std::size_t> membership);
double modularity(const CrimeNetwork& network, const CommunityAssignment& assignment);

struct LouvainOptions {
    std::uint64_t seed = 0;
    /// Level-0 visit order; a seeded shuffle when absent.
    std::optional<std::vector<std::size_t>> visit_order;
};

CommunityAssignment louvain(const LinkGraph& graph, const LouvainOptions& options);
CommunityAssignment louvain(const CrimeNetwork& network, std::uint64_t seed);

/// Groups nodes by crime type in palette order; nodes without one form a
/// trailing group. Used for the semantic layout.
CommunityAssignment group_by_crime_type(const CrimeNetwork& network);

/// Renumbers labels to 0..k-1 in order of first appearance.
std::size_t compact_labels(std::vector<std::size_t>& labels);

}  // namespace cellgraph
