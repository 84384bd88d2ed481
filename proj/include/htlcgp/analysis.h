// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef HTLCGP_ANALYSIS_H
#define HTLCGP_ANALYSIS_H

#include <htlcgp/graph.h>

#include <algorithm>
#include <cstddef>
#include <map>
#include <queue>
#include <vector>

namespace htlcgp {

/** Open channels as a simple undirected graph; parallel channels collapse to one edge. */
struct Adjacency {
    std::vector<NodeId> nodes;                   //!< sorted
    std::vector<std::vector<std::size_t>> edges; //!< sorted neighbour indices
};

Adjacency BuildAdjacency(const NetworkGraph& graph);

/**
 * Unweighted shortest-path betweenness over unordered pairs,
 * sum over s < t of sigma_st(v) / sigma_st. Number is double or Rational.
 */
template <typename Number>
std::map<NodeId, Number> Betweenness(const NetworkGraph& graph)
{
    const Adjacency adj = BuildAdjacency(graph);
    const std::size_t n = adj.nodes.size();
    std::vector<Number> score(n, Number{0});
    std::vector<std::vector<std::size_t>> preds(n);
    std::vector<Number> sigma(n);
    std::vector<Number> dependency(n);
    std::vector<long> dist(n);
    std::vector<std::size_t> order;
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t v = 0; v < n; ++v) {
            preds[v].clear();
            sigma[v] = Number{0};
            dependency[v] = Number{0};
            dist[v] = -1;
        }
        order.clear();
        sigma[s] = Number{1};
        dist[s] = 0;
        std::queue<std::size_t> frontier;
        frontier.push(s);
        while (!frontier.empty()) {
            const std::size_t v = frontier.front();
            frontier.pop();
            order.push_back(v);
            for (std::size_t w : adj.edges[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    frontier.push(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    preds[w].push_back(v);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const std::size_t w = *it;
            for (std::size_t v : preds[w]) {
                dependency[v] += sigma[v] / sigma[w] * (Number{1} + dependency[w]);
            }
            if (w != s) score[w] += dependency[w];
        }
    }
    std::map<NodeId, Number> out;
    for (std::size_t v = 0; v < n; ++v) out.emplace(adj.nodes[v], score[v] / Number{2});
    return out;
}

/** Top-k nodes by betweenness, ties broken by NodeId. */
std::vector<NodeId> BetweennessTop(const NetworkGraph& graph, std::size_t k);

struct ChannelFlow {
    NodeId from;
    Amount amount;
};

struct FlowResult {
    Amount value;
    std::map<ChannelId, ChannelFlow> channels; //!< net flow on each channel that carries any
};

/**
 * Maximum flow from every source to every sink, each channel direction
 * bounded by its residual balance. Closed channels carry nothing.
 */
FlowResult MaxFlow(const NetworkGraph& graph, const std::vector<NodeId>& sources, const std::vector<NodeId>& sinks);

} // namespace htlcgp

#endif // HTLCGP_ANALYSIS_H
