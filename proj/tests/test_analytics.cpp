#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"

#include "cellgraph/analytics.hpp"
#include "oracles.hpp"

using namespace cellgraph;

namespace {

LinkGraph graph_of(int n, const oracle::EdgeList& edges, std::vector<double> weights = {}) {
    std::vector<std::pair<std::size_t, std::size_t>> links;
    for (auto [u, v] : edges) links.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
    return LinkGraph::from_links(static_cast<std::size_t>(n), links, std::move(weights));
}

CrimeNetwork network_of(int n, const oracle::EdgeList& edges) {
    std::vector<CallRecord> records;
    for (auto [u, v] : edges) {
        CallRecord r;
        r.caller = std::to_string(100 + u);
        r.callee = std::to_string(100 + v);
        records.push_back(r);
    }
    (void)n;
    return build_network(records);
}

// Library link index for each oracle edge.
std::vector<std::size_t> link_index(const LinkGraph& g, const oracle::EdgeList& edges) {
    std::vector<std::size_t> out;
    for (auto [u, v] : edges) {
        const auto key = std::make_pair(static_cast<std::size_t>(std::min(u, v)), static_cast<std::size_t>(std::max(u, v)));
        out.push_back(static_cast<std::size_t>(std::find(g.links.begin(), g.links.end(), key) - g.links.begin()));
    }
    return out;
}

void check_against_oracle(int n, const oracle::EdgeList& edges, const std::vector<double>& weights) {
    const auto g = graph_of(n, edges, weights);
    const auto expected = oracle::betweenness_by_paths(n, edges, weights);
    const auto where = link_index(g, edges);
    for (const auto& got : {kernels::brandes_serial(g, !weights.empty()), kernels::brandes_parallel(g, !weights.empty())}) {
        for (int i = 0; i < n; ++i) CHECK(got.node[i] == doctest::Approx(expected.node[i]).epsilon(1e-9));
        for (std::size_t e = 0; e < edges.size(); ++e) {
            CHECK(got.link[where[e]] == doctest::Approx(expected.edge[e]).epsilon(1e-9));
        }
    }
}

}  // namespace

TEST_CASE("betweenness of small named graphs") {
    SUBCASE("triangle") {
        const auto b = kernels::brandes_serial(graph_of(3, {{0, 1}, {1, 2}, {0, 2}}), false);
        CHECK(b.node == std::vector<double>{0, 0, 0});
        CHECK(b.link == std::vector<double>{1, 1, 1});
    }
    SUBCASE("path") {
        const auto b = kernels::brandes_serial(graph_of(3, {{0, 1}, {1, 2}}), false);
        CHECK(b.node == std::vector<double>{0, 1, 0});
        CHECK(b.link == std::vector<double>{2, 2});
    }
    SUBCASE("star with four leaves") {
        const auto b = kernels::brandes_serial(graph_of(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}), false);
        CHECK(b.node[0] == 6.0);
        for (int i = 1; i < 5; ++i) CHECK(b.node[i] == 0.0);
    }
    SUBCASE("square splits credit") {
        // pairs (0,2) and (1,3) each have two shortest paths
        const auto b = kernels::brandes_serial(graph_of(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}), false);
        for (double x : b.node) CHECK(x == doctest::Approx(0.5));
    }
}

TEST_CASE("Brandes equals path enumeration on random connected graphs") {
    std::mt19937_64 rng(2024);
    for (int n = 2; n <= 7; ++n) {
        for (int trial = 0; trial < 25; ++trial) {
            const auto edges = oracle::random_connected_graph(n, 0.2 + 0.1 * (trial % 6), rng);
            check_against_oracle(n, edges, {});
        }
    }
}

TEST_CASE("weighted Brandes equals path enumeration") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> w(1, 4);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 3 + trial % 5;
        const auto edges = oracle::random_connected_graph(n, 0.5, rng);
        std::vector<double> weights;
        for (std::size_t e = 0; e < edges.size(); ++e) weights.push_back(w(rng));
        check_against_oracle(n, edges, weights);
    }
}

TEST_CASE("parallel Brandes does not depend on the schedule") {
    std::ifstream in(CELLGRAPH_TEST_DATA "/cdr_1k.csv");
    const auto net = build_network(parse_cdr(in).records);
    const auto g = LinkGraph::from_network(net);
    const auto serial = kernels::brandes_serial(g, true);
    const auto a = kernels::brandes_parallel(g, true);
    const auto b = kernels::brandes_parallel(g, true);
    CHECK(a.node == b.node);
    CHECK(a.link == b.link);
    for (std::size_t i = 0; i < serial.node.size(); ++i) CHECK(a.node[i] == doctest::Approx(serial.node[i]).epsilon(1e-12));
}

TEST_CASE("centrality report over a network") {
    const auto net = network_of(5, {{0, 1}, {0, 1}, {1, 2}, {2, 3}});
    const auto r = centrality(net, false);
    CHECK(r.degree == std::vector<std::size_t>{1, 2, 2, 1});
    CHECK(r.weighted_degree == std::vector<double>{2, 3, 2, 1});
    CHECK(r.node_betweenness == std::vector<double>{0, 2, 2, 0});
    CHECK(r.edge_betweenness == std::vector<double>{3, 4, 3});
    CHECK(centrality(net, false, Execution::serial).node_betweenness == r.node_betweenness);

    // with 1/weight lengths the doubled edge is shorter but the path is still unique
    CHECK(centrality(net, true).node_betweenness == std::vector<double>{0, 2, 2, 0});
}

TEST_CASE("modularity by direct evaluation") {
    const oracle::EdgeList k3{{0, 1}, {1, 2}, {0, 2}};
    CHECK(modularity(graph_of(3, k3), std::vector<std::size_t>{0, 0, 0}) == doctest::Approx(0.0));

    const oracle::EdgeList two_k3{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
    CHECK(modularity(graph_of(6, two_k3), std::vector<std::size_t>{0, 0, 0, 1, 1, 1}) == doctest::Approx(0.5));
    CHECK(oracle::modularity_by_matrix(6, two_k3, {0, 0, 0, 1, 1, 1}) == doctest::Approx(0.5));

    CHECK(modularity(graph_of(2, {{0, 1}}), std::vector<std::size_t>{0, 1}) == doctest::Approx(-0.5));
    CHECK(modularity(graph_of(1, {}), std::vector<std::size_t>{0}) == 0.0);
    CHECK_THROWS_AS(modularity(graph_of(3, k3), std::vector<std::size_t>{0, 0}), InvalidArgument);
}

TEST_CASE("modularity agrees with the matrix oracle on random partitions") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 9;
        const auto edges = oracle::random_connected_graph(n, 0.4, rng);
        std::vector<double> weights;
        for (std::size_t e = 0; e < edges.size(); ++e) weights.push_back(1 + static_cast<double>(rng() % 5));
        std::vector<int> labels(n);
        std::vector<std::size_t> membership(n);
        for (int i = 0; i < n; ++i) membership[i] = labels[i] = static_cast<int>(rng() % 3);
        const double q = modularity(graph_of(n, edges, weights), membership);
        CHECK(q == doctest::Approx(oracle::modularity_by_matrix(n, edges, labels, weights)).epsilon(1e-12));
        CHECK(q >= -0.5);
        CHECK(q <= 1.0);
    }
}

TEST_CASE("Louvain on trivial inputs") {
    const auto one = louvain(graph_of(1, {}), {});
    CHECK(one.membership == std::vector<std::size_t>{0});
    CHECK(one.community_count == 1);
    CHECK(one.modularity == 0.0);

    const auto empty = louvain(graph_of(0, {}), {});
    CHECK(empty.membership.empty());
    CHECK(empty.community_count == 0);
}

TEST_CASE("Louvain recovers two cliques joined by a bridge") {
    const auto edges = oracle::two_cliques(5);
    const auto best = oracle::max_modularity_partition(10, edges);
    CHECK(best.partitions == 115975);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto a = louvain(graph_of(10, edges), {seed});
        CHECK(a.community_count == 2);
        for (int i = 0; i < 10; ++i) CHECK((a.membership[i] == a.membership[0]) == (i < 5));
        CHECK(a.modularity == doctest::Approx(best.modularity).epsilon(1e-9));
    }
}

TEST_CASE("Louvain is deterministic, monotone and self-consistent") {
    std::ifstream in(CELLGRAPH_TEST_DATA "/cdr_1k.csv");
    const auto net = build_network(parse_cdr(in).records);
    for (std::uint64_t seed : {0, 1, 7, 12345}) {
        const auto a = louvain(net, seed);
        const auto b = louvain(net, seed);
        CHECK(a.membership == b.membership);
        CHECK(a.modularity == b.modularity);
        CHECK(a.modularity == doctest::Approx(modularity(net, a)).epsilon(1e-12));
        // contiguous labels
        std::vector<bool> used(a.community_count, false);
        for (auto c : a.membership) {
            REQUIRE(c < a.community_count);
            used[c] = true;
        }
        CHECK(std::all_of(used.begin(), used.end(), [](bool u) { return u; }));
        // monotone across levels and at least the singleton partition
        std::vector<std::size_t> singletons(net.node_count());
        std::iota(singletons.begin(), singletons.end(), 0);
        double previous = modularity(net, singletons);
        for (double q : a.level_modularity) {
            CHECK(q >= previous - 1e-12);
            previous = q;
        }
        CHECK(a.modularity >= modularity(net, singletons));
    }
}

TEST_CASE("Louvain reaches the brute-force optimum on small graphs") {
    std::mt19937_64 rng(17);
    int optimal = 0, total = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 4 + trial % 5;
        const auto edges = oracle::random_connected_graph(n, 0.35, rng);
        const auto best = oracle::max_modularity_partition(n, edges);
        const auto a = louvain(graph_of(n, edges), {static_cast<std::uint64_t>(trial)});
        CHECK(a.modularity <= best.modularity + 1e-12);
        optimal += a.modularity > best.modularity - 1e-9;
        ++total;
    }
    // greedy, so not always optimal, but on graphs this small it almost always is
    CHECK(optimal * 10 >= total * 8);
}

TEST_CASE("relabelling nodes relabels the communities") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 12 + trial % 10;
        const auto edges = oracle::random_connected_graph(n, 0.25, rng);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const auto a = louvain(graph_of(n, edges), {0, order});

        // relabel node i as perm[i]; the same visit sequence in new labels is perm[order[k]]
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        oracle::EdgeList relabelled;
        for (auto [u, v] : edges) relabelled.push_back({static_cast<int>(perm[u]), static_cast<int>(perm[v])});
        std::vector<std::size_t> new_order(n);
        for (int k = 0; k < n; ++k) new_order[k] = perm[order[k]];
        const auto b = louvain(graph_of(n, relabelled), {0, new_order});

        CHECK(a.modularity == doctest::Approx(b.modularity).epsilon(1e-12));
        // community numbers follow node index, so compare the partitions themselves
        CHECK(a.community_count == b.community_count);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                CHECK((a.membership[i] == a.membership[j]) == (b.membership[perm[i]] == b.membership[perm[j]]));
            }
        }
    }
}

TEST_CASE("groups by crime type") {
    std::istringstream in("subscriber_id,label,suspect,crime_type,address,photo_ref\n"
                          "1,,true,theft,,\n2,,true,extortion,,\n4,,false,theft,,\n");
    std::vector<CallRecord> records;
    for (auto [a, b] : std::vector<std::pair<const char*, const char*>>{{"1", "2"}, {"2", "3"}, {"3", "4"}}) {
        CallRecord r;
        r.caller = a;
        r.callee = b;
        records.push_back(r);
    }
    const auto net = build_network(records).with_annotations(parse_annotations(in));
    const auto g = group_by_crime_type(net);
    // palette order: extortion, theft; unassigned last
    CHECK(g.membership == std::vector<std::size_t>{1, 0, 2, 1});
    CHECK(g.community_count == 3);
}

TEST_CASE("compact labels") {
    std::vector<std::size_t> labels{7, 3, 7, 9, 3};
    CHECK(compact_labels(labels) == 3);
    CHECK(labels == std::vector<std::size_t>{0, 1, 0, 2, 1});
}
