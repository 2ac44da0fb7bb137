#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <random>
#include <sstream>

#include "doctest.h"

#include "cellgraph/network.hpp"

using namespace cellgraph;

namespace {

CallRecord call(std::string a, std::string b, std::int64_t t, std::int64_t dur = 60) {
    CallRecord r;
    r.caller = std::move(a);
    r.callee = std::move(b);
    r.start = Timestamp{t};
    r.duration_s = dur;
    return r;
}

std::vector<CallRecord> load(const char* name) {
    std::ifstream in(std::string(CELLGRAPH_TEST_DATA "/") + name);
    REQUIRE(in);
    return parse_cdr(in).records;
}

std::set<std::string> node_ids(const CrimeNetwork& net) {
    std::set<std::string> out;
    for (const auto& n : net.nodes()) out.insert(n.id);
    return out;
}

std::set<std::pair<std::string, std::string>> edge_ids(const CrimeNetwork& net) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& e : net.edges()) out.insert({net.nodes()[e.source].id, net.nodes()[e.target].id});
    return out;
}

// Nodes within `radius` hops of the seeds, by plain BFS over an edge map.
std::set<std::string> bfs_ball(const std::vector<CallRecord>& records, const std::set<std::string>& seeds,
                               std::size_t radius) {
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& r : records) {
        adj[r.caller].insert(r.callee);
        adj[r.callee].insert(r.caller);
    }
    std::map<std::string, std::size_t> dist;
    std::queue<std::string> q;
    for (const auto& s : seeds) {
        dist[s] = 0;
        q.push(s);
    }
    while (!q.empty()) {
        const auto u = q.front();
        q.pop();
        if (dist[u] == radius) continue;
        for (const auto& v : adj[u]) {
            if (!dist.count(v)) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
        }
    }
    std::set<std::string> out;
    for (const auto& [id, d] : dist) out.insert(id);
    return out;
}

}  // namespace

TEST_CASE("repeated calls aggregate into one edge") {
    const std::vector<CallRecord> records{call("1", "2", 10, 5), call("1", "2", 20, 7), call("1", "2", 5, 1)};
    const auto net = build_network(records);
    CHECK(node_ids(net) == std::set<std::string>{"1", "2"});
    REQUIRE(net.edge_count() == 1);
    const auto& e = net.edges()[0];
    CHECK(e.call_count == 3);
    CHECK(e.total_duration == 13);
    CHECK(e.first_seen == Timestamp{5});
    CHECK(e.last_seen == Timestamp{20});
    CHECK(e.weight == 3.0);
}

TEST_CASE("edge mode decides how reciprocal calls aggregate") {
    const std::vector<CallRecord> records{call("1", "2", 10), call("2", "1", 20)};
    const auto undirected = build_network(records);
    REQUIRE(undirected.edge_count() == 1);
    CHECK(undirected.edges()[0].call_count == 2);
    CHECK(undirected.edges()[0].forward_count == 1);
    CHECK(undirected.edges()[0].backward_count == 1);

    const auto directed = build_network(records, EdgeMode::directed);
    REQUIRE(directed.edge_count() == 2);
    CHECK(directed.edges()[0].call_count == 1);
    CHECK(directed.edges()[1].call_count == 1);
    CHECK(directed.edge_mode() == EdgeMode::directed);
}

TEST_CASE("duration weighting keeps weights at least one") {
    const std::vector<CallRecord> records{call("1", "2", 10, 0), call("2", "3", 10, 40), call("3", "2", 11, 2)};
    const auto net = build_network(records, EdgeMode::undirected, WeightMode::duration);
    REQUIRE(net.edge_count() == 2);
    CHECK(net.edges()[0].weight == 1.0);
    CHECK(net.edges()[1].weight == 42.0);
}

TEST_CASE("75-subscriber fixture builds a 75-node network") {
    const auto records = load("cdr_75.csv");
    const auto net = build_network(records);
    CHECK(net.node_count() == 75);
    std::int64_t calls = 0;
    for (const auto& e : net.edges()) {
        calls += e.call_count;
        CHECK(e.source < e.target);
        CHECK(e.first_seen <= e.last_seen);
        CHECK(e.weight >= 1.0);
    }
    CHECK(calls == static_cast<std::int64_t>(records.size()));
    CHECK(std::is_sorted(net.nodes().begin(), net.nodes().end(),
                         [](const Node& a, const Node& b) { return a.id < b.id; }));
}

TEST_CASE("empty input gives an empty network") {
    const auto net = build_network(std::vector<CallRecord>{});
    CHECK(net.node_count() == 0);
    CHECK(net.edge_count() == 0);
}

TEST_CASE("record order does not matter") {
    auto records = load("cdr_1k.csv");
    const auto reference = build_network(records);
    const auto reference_directed = build_network(records, EdgeMode::directed, WeightMode::duration);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 5; ++i) {
        std::shuffle(records.begin(), records.end(), rng);
        CHECK(build_network(records) == reference);
        CHECK(build_network(records, EdgeMode::directed, WeightMode::duration) == reference_directed);
    }
}

TEST_CASE("window filtering is half-open") {
    const std::vector<CallRecord> records{call("1", "2", 10), call("2", "3", 20), call("3", "4", 30)};
    const auto net = filter_window(records, make_window(Timestamp{10}, Timestamp{30}));
    CHECK(node_ids(net) == std::set<std::string>{"1", "2", "3"});
    CHECK(net.edge_count() == 2);
    REQUIRE(net.provenance().window.has_value());
    CHECK(*net.provenance().window == TimeWindow{Timestamp{10}, Timestamp{30}});

    const auto all = filter_window(records, make_window(Timestamp{0}, Timestamp{31}));
    CHECK(all.nodes().size() == 4);
    CHECK(std::equal(all.edges().begin(), all.edges().end(), build_network(records).edges().begin()));

    CHECK(filter_window(records, make_window(Timestamp{31}, Timestamp{40})).node_count() == 0);
    CHECK_THROWS_AS(make_window(Timestamp{30}, Timestamp{10}), InvalidArgument);
    CHECK_THROWS_AS(make_window(Timestamp{30}, Timestamp{30}), InvalidArgument);
}

TEST_CASE("ego expansion on a path") {
    const std::vector<CallRecord> path{call("A", "B", 1), call("B", "C", 2), call("C", "D", 3)};
    const auto net = build_network(path);
    const auto ego = ego_expand(net, {"A"}, 2);
    CHECK(node_ids(ego) == bfs_ball(path, {"A"}, 2));
    CHECK(node_ids(ego) == std::set<std::string>{"A", "B", "C"});
    CHECK(edge_ids(ego) == std::set<std::pair<std::string, std::string>>{{"A", "B"}, {"B", "C"}});

    CHECK(node_ids(ego_expand(net, {"B", "D"}, 0)) == std::set<std::string>{"B", "D"});
    CHECK(ego_expand(net, {"B", "D"}, 0).edge_count() == 0);
    CHECK_THROWS_AS(ego_expand(net, {"Z"}, 1), NotFound);
}

TEST_CASE("star ego at radius one is the whole star") {
    const std::vector<CallRecord> star{call("0", "1", 1), call("0", "2", 1), call("3", "0", 1), call("0", "4", 1)};
    const auto net = build_network(star);
    CHECK(ego_expand(net, {"0"}, 1) == net);
}

TEST_CASE("ego expansion matches BFS and grows with the radius") {
    const auto records = load("cdr_1k.csv");
    const auto net = build_network(records);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        std::set<std::string> seeds;
        for (int k = 0; k < 1 + trial % 3; ++k) seeds.insert(net.nodes()[rng() % net.node_count()].id);
        std::set<std::string> previous;
        for (std::size_t r = 0; r <= 4; ++r) {
            const auto ego = ego_expand(net, seeds, r);
            const auto ids = node_ids(ego);
            CHECK(ids == bfs_ball(records, seeds, r));
            CHECK(std::includes(ids.begin(), ids.end(), previous.begin(), previous.end()));
            // induced: every network edge between kept nodes is kept
            std::size_t expected_edges = 0;
            for (const auto& e : net.edges()) {
                expected_edges += ids.count(net.nodes()[e.source].id) && ids.count(net.nodes()[e.target].id);
            }
            CHECK(ego.edge_count() == expected_edges);
            previous = ids;
        }
    }
}

TEST_CASE("ego at the diameter is the union of the seed components") {
    // two components: a 5-cycle and a triangle
    std::vector<CallRecord> records;
    for (int i = 0; i < 5; ++i) records.push_back(call("c" + std::to_string(i), "c" + std::to_string((i + 1) % 5), i));
    records.push_back(call("t0", "t1", 1));
    records.push_back(call("t1", "t2", 1));
    records.push_back(call("t2", "t0", 1));
    const auto net = build_network(records);
    const auto ego = ego_expand(net, {"c3"}, 8);
    CHECK(node_ids(ego) == std::set<std::string>{"c0", "c1", "c2", "c3", "c4"});
    CHECK(ego.edge_count() == 5);
    CHECK(ego_expand(net, {"c3", "t2"}, 8) == net);
}

TEST_CASE("annotations and edge classes") {
    std::istringstream in("subscriber_id,label,suspect,crime_type,address,photo_ref\n"
                          "1,Boss,true,extortion,Via Roma 1,p/1.jpg\n"
                          "2,Runner,yes,drug trafficking,,\n"
                          "3,Cousin,false,,,\n"
                          "99,Absent,true,fraud,,\n");
    const auto ann = parse_annotations(in);
    CHECK(ann.crime_palette == std::vector<std::string>{"drug trafficking", "extortion", "fraud"});
    const std::vector<CallRecord> records{call("1", "2", 1), call("2", "3", 2), call("3", "4", 3)};
    const auto net = build_network(records).with_annotations(ann);
    CHECK(net.node_count() == 4);
    CHECK(net.nodes()[0].info.label == "Boss");
    CHECK(net.nodes()[0].info.address == "Via Roma 1");
    CHECK_FALSE(net.nodes()[2].info.crime_type.has_value());
    CHECK(net.edge_class(net.edges()[0]) == EdgeClass::organization);
    CHECK(net.edge_class(net.edges()[1]) == EdgeClass::bridge);
    CHECK(net.edge_class(net.edges()[2]) == EdgeClass::personal);
    CHECK(to_string(EdgeClass::bridge) == "bridge");
}
