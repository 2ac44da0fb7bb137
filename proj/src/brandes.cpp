#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <queue>

#include "cellgraph/kernels.hpp"
#include "cellgraph/network.hpp"

namespace cellgraph {

LinkGraph LinkGraph::from_links(std::size_t node_count, std::vector<std::pair<std::size_t, std::size_t>> links,
                                std::vector<double> weights) {
    if (weights.empty()) weights.assign(links.size(), 1.0);
    if (weights.size() != links.size()) throw InvalidArgument("LinkGraph: weight count mismatch");

    std::map<std::pair<std::size_t, std::size_t>, double> merged;
    std::vector<std::pair<std::size_t, std::size_t>> keys;
    keys.reserve(links.size());
    for (std::size_t k = 0; k < links.size(); ++k) {
        auto [u, v] = links[k];
        if (u == v) throw InvalidArgument("LinkGraph: self-loop");
        if (u >= node_count || v >= node_count) throw InvalidArgument("LinkGraph: endpoint out of range");
        if (v < u) std::swap(u, v);
        merged[{u, v}] += weights[k];
        keys.emplace_back(u, v);
    }

    LinkGraph g;
    g.node_count = node_count;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> link_index;
    for (const auto& [key, w] : merged) {
        link_index.emplace(key, g.links.size());
        g.links.push_back(key);
        g.link_weight.push_back(w);
    }
    g.edge_link.reserve(keys.size());
    for (const auto& key : keys) g.edge_link.push_back(link_index.at(key));

    g.offsets.assign(node_count + 1, 0);
    for (const auto& [u, v] : g.links) {
        ++g.offsets[u + 1];
        ++g.offsets[v + 1];
    }
    for (std::size_t i = 0; i < node_count; ++i) g.offsets[i + 1] += g.offsets[i];
    g.targets.resize(g.offsets.back());
    g.link_of.resize(g.offsets.back());
    std::vector<std::size_t> fill(g.offsets.begin(), g.offsets.end() - 1);
    // links are sorted, so each adjacency row comes out sorted by target
    for (std::size_t l = 0; l < g.links.size(); ++l) {
        const auto [u, v] = g.links[l];
        g.targets[fill[u]] = v;
        g.link_of[fill[u]++] = l;
    }
    for (std::size_t l = 0; l < g.links.size(); ++l) {
        const auto [u, v] = g.links[l];
        g.targets[fill[v]] = u;
        g.link_of[fill[v]++] = l;
    }
    for (std::size_t i = 0; i < node_count; ++i) {
        std::vector<std::pair<std::size_t, std::size_t>> row;
        for (std::size_t k = g.offsets[i]; k < g.offsets[i + 1]; ++k) row.emplace_back(g.targets[k], g.link_of[k]);
        std::sort(row.begin(), row.end());
        for (std::size_t k = g.offsets[i]; k < g.offsets[i + 1]; ++k) {
            g.targets[k] = row[k - g.offsets[i]].first;
            g.link_of[k] = row[k - g.offsets[i]].second;
        }
    }
    return g;
}

LinkGraph LinkGraph::from_network(const CrimeNetwork& network) {
    std::vector<std::pair<std::size_t, std::size_t>> links;
    std::vector<double> weights;
    links.reserve(network.edge_count());
    weights.reserve(network.edge_count());
    for (const auto& e : network.edges()) {
        links.emplace_back(e.source, e.target);
        weights.push_back(e.weight);
    }
    return from_links(network.node_count(), std::move(links), std::move(weights));
}

namespace kernels {

namespace {

// Reusable per-source workspace.
struct BrandesWork {
    explicit BrandesWork(std::size_t n)
        : sigma(n), dist(n), delta(n), preds(n), order() { order.reserve(n); }

    std::vector<double> sigma;
    std::vector<double> dist;
    std::vector<double> delta;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> preds;  // (pred node, link)
    std::vector<std::size_t> order;  // nodes in non-decreasing distance
};

bool same_length(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

void single_source_hops(const LinkGraph& g, std::size_t s, BrandesWork& w) {
    std::deque<std::size_t> queue{s};
    w.dist[s] = 0;
    w.sigma[s] = 1;
    while (!queue.empty()) {
        const auto v = queue.front();
        queue.pop_front();
        w.order.push_back(v);
        for (std::size_t k = g.offsets[v]; k < g.offsets[v + 1]; ++k) {
            const auto u = g.targets[k];
            if (w.dist[u] < 0) {
                w.dist[u] = w.dist[v] + 1;
                queue.push_back(u);
            }
            if (w.dist[u] == w.dist[v] + 1) {
                w.sigma[u] += w.sigma[v];
                w.preds[u].emplace_back(v, g.link_of[k]);
            }
        }
    }
}

void single_source_weighted(const LinkGraph& g, std::size_t s, BrandesWork& w) {
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    std::vector<char> settled(g.node_count, 0);
    w.dist[s] = 0;
    w.sigma[s] = 1;
    heap.emplace(0.0, s);
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (settled[v] || d > w.dist[v]) continue;
        settled[v] = 1;
        w.order.push_back(v);
        for (std::size_t k = g.offsets[v]; k < g.offsets[v + 1]; ++k) {
            const auto u = g.targets[k];
            if (settled[u]) continue;
            const double candidate = w.dist[v] + 1.0 / g.link_weight[g.link_of[k]];
            if (w.dist[u] < 0 || (candidate < w.dist[u] && !same_length(candidate, w.dist[u]))) {
                w.dist[u] = candidate;
                w.sigma[u] = w.sigma[v];
                w.preds[u].assign(1, {v, g.link_of[k]});
                heap.emplace(candidate, u);
            } else if (same_length(candidate, w.dist[u])) {
                w.sigma[u] += w.sigma[v];
                w.preds[u].emplace_back(v, g.link_of[k]);
            }
        }
    }
}

// Adds the dependencies of source s into node/link accumulators.
void accumulate_source(const LinkGraph& g, std::size_t s, bool weighted, BrandesWork& w,
                       std::span<double> node_acc, std::span<double> link_acc) {
    std::fill(w.sigma.begin(), w.sigma.end(), 0.0);
    std::fill(w.dist.begin(), w.dist.end(), -1.0);
    std::fill(w.delta.begin(), w.delta.end(), 0.0);
    for (auto& p : w.preds) p.clear();
    w.order.clear();

    if (weighted) {
        single_source_weighted(g, s, w);
    } else {
        single_source_hops(g, s, w);
    }
    for (auto it = w.order.rbegin(); it != w.order.rend(); ++it) {
        const auto v = *it;
        for (const auto& [p, link] : w.preds[v]) {
            const double c = w.sigma[p] / w.sigma[v] * (1.0 + w.delta[v]);
            link_acc[link] += c;
            w.delta[p] += c;
        }
        if (v != s) node_acc[v] += w.delta[v];
    }
}

void halve(Betweenness& b) {
    // every unordered pair was visited from both endpoints
    for (auto& x : b.node) x /= 2.0;
    for (auto& x : b.link) x /= 2.0;
}

}  // namespace

Betweenness brandes_serial(const LinkGraph& graph, bool weighted) {
    Betweenness out{std::vector<double>(graph.node_count, 0.0), std::vector<double>(graph.links.size(), 0.0)};
    BrandesWork work(graph.node_count);
    for (std::size_t s = 0; s < graph.node_count; ++s) {
        accumulate_source(graph, s, weighted, work, out.node, out.link);
    }
    halve(out);
    return out;
}

Betweenness brandes_parallel(const LinkGraph& graph, bool weighted) {
    constexpr std::size_t block = 32;
    const std::size_t n = graph.node_count;
    const std::size_t m = graph.links.size();
    const std::size_t blocks = (n + block - 1) / block;
    std::vector<double> node_partial(blocks * n, 0.0);
    std::vector<double> link_partial(blocks * m, 0.0);

#pragma omp parallel
    {
        BrandesWork work(n);
#pragma omp for schedule(dynamic, 1)
        for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
            std::span<double> node_acc(node_partial.data() + static_cast<std::size_t>(b) * n, n);
            std::span<double> link_acc(link_partial.data() + static_cast<std::size_t>(b) * m, m);
            const std::size_t end = std::min(n, (static_cast<std::size_t>(b) + 1) * block);
            for (std::size_t s = static_cast<std::size_t>(b) * block; s < end; ++s) {
                accumulate_source(graph, s, weighted, work, node_acc, link_acc);
            }
        }
    }

    Betweenness out{std::vector<double>(n, 0.0), std::vector<double>(m, 0.0)};
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t i = 0; i < n; ++i) out.node[i] += node_partial[b * n + i];
        for (std::size_t l = 0; l < m; ++l) out.link[l] += link_partial[b * m + l];
    }
    halve(out);
    return out;
}

}  // namespace kernels

}  // namespace cellgraph
