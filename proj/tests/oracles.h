// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef HTLCGP_TESTS_ORACLES_H
#define HTLCGP_TESTS_ORACLES_H

#include <htlcgp/graph.h>

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace htlcgp::test {

/** Neighbour sets over open channels, built straight from the channel list. */
inline std::map<NodeId, std::set<NodeId>> Neighbours(const NetworkGraph& graph)
{
    std::map<NodeId, std::set<NodeId>> out;
    for (const NodeId& n : graph.Nodes()) out[n];
    for (const Channel& ch : graph.Channels()) {
        if (ch.IsClosed()) continue;
        out[ch.A()].insert(ch.B());
        out[ch.B()].insert(ch.A());
    }
    return out;
}

/**
 * Betweenness by listing every simple path: for each pair s < t keep the
 * shortest ones and credit each interior node its share.
 */
inline std::map<NodeId, Rational> BetweennessByEnumeration(const NetworkGraph& graph)
{
    const auto nbr = Neighbours(graph);
    std::map<NodeId, Rational> score;
    for (const auto& [n, _] : nbr) score[n] = 0;
    for (const auto& [s, _s] : nbr) {
        std::map<NodeId, std::vector<std::vector<NodeId>>> shortest;
        std::vector<NodeId> path{s};
        std::set<NodeId> on_path{s};
        const auto dfs = [&](auto&& self) -> void {
            const NodeId& at = path.back();
            if (at != path.front()) {
                auto& best = shortest[at];
                if (best.empty() || best.front().size() > path.size()) {
                    best.assign(1, path);
                } else if (best.front().size() == path.size()) {
                    best.push_back(path);
                }
            }
            for (const NodeId& next : nbr.at(at)) {
                if (on_path.contains(next)) continue;
                path.push_back(next);
                on_path.insert(next);
                self(self);
                on_path.erase(next);
                path.pop_back();
            }
        };
        dfs(dfs);
        for (const auto& [t, paths] : shortest) {
            if (!(s < t)) continue;
            const Rational share{1, static_cast<long>(paths.size())};
            for (const auto& p : paths) {
                for (std::size_t i = 1; i + 1 < p.size(); ++i) score[p[i]] += share;
            }
        }
    }
    return score;
}

/**
 * Betweenness from all-pairs distances and path counts:
 * v lies on sigma_sv * sigma_vt shortest s-t paths when d(s,v) + d(v,t) = d(s,t).
 */
inline std::map<NodeId, Rational> BetweennessByPairCounts(const NetworkGraph& graph)
{
    const auto nbr = Neighbours(graph);
    std::vector<NodeId> ids;
    for (const auto& [n, _] : nbr) ids.push_back(n);
    const std::size_t n = ids.size();
    std::map<NodeId, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[ids[i]] = i;
    constexpr long kInf = 1L << 30;
    std::vector<std::vector<long>> d(n, std::vector<long>(n, kInf));
    for (std::size_t i = 0; i < n; ++i) {
        d[i][i] = 0;
        for (const NodeId& m : nbr.at(ids[i])) d[i][index[m]] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    // sigma[s][x] by increasing distance from s
    std::vector<std::vector<BigInt>> sigma(n, std::vector<BigInt>(n, 0));
    for (std::size_t s = 0; s < n; ++s) {
        sigma[s][s] = 1;
        for (long dist = 1; dist < static_cast<long>(n); ++dist) {
            for (std::size_t x = 0; x < n; ++x) {
                if (d[s][x] != dist) continue;
                for (const NodeId& m : nbr.at(ids[x])) {
                    const std::size_t y = index[m];
                    if (d[s][y] == dist - 1) sigma[s][x] += sigma[s][y];
                }
            }
        }
    }
    std::map<NodeId, Rational> score;
    for (std::size_t v = 0; v < n; ++v) {
        Rational total{0};
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t t = s + 1; t < n; ++t) {
                if (v == s || v == t || d[s][t] >= kInf) continue;
                if (d[s][v] + d[v][t] == d[s][t]) total += Rational{sigma[s][v] * sigma[v][t], sigma[s][t]};
            }
        }
        score[ids[v]] = total;
    }
    return score;
}

/** Smallest cut over every node subset holding all sources and no sink. */
inline Amount MinCutByEnumeration(const NetworkGraph& graph, const std::vector<NodeId>& sources,
                                  const std::vector<NodeId>& sinks)
{
    const std::vector<NodeId> nodes = graph.Nodes();
    std::vector<NodeId> free;
    for (const NodeId& v : nodes) {
        if (std::find(sources.begin(), sources.end(), v) == sources.end() &&
            std::find(sinks.begin(), sinks.end(), v) == sinks.end()) {
            free.push_back(v);
        }
    }
    std::uint64_t best = UINT64_MAX;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free.size()); ++mask) {
        std::set<NodeId> side(sources.begin(), sources.end());
        for (std::size_t i = 0; i < free.size(); ++i) {
            if (mask >> i & 1) side.insert(free[i]);
        }
        std::uint64_t cut = 0;
        for (const Channel& ch : graph.Channels()) {
            if (ch.IsClosed()) continue;
            const bool a_in = side.contains(ch.A());
            const bool b_in = side.contains(ch.B());
            if (a_in && !b_in) cut += ch.Remain(ch.A()).Msat();
            if (b_in && !a_in) cut += ch.Remain(ch.B()).Msat();
        }
        best = std::min(best, cut);
    }
    return Amount{best};
}

/** Random connected-ish graph on `nodes` vertices "v00".., possibly with parallel and closed channels. */
inline NetworkGraph RandomGraph(std::mt19937_64& rng, std::size_t nodes, double edge_probability,
                                std::uint64_t max_balance)
{
    NetworkGraph g;
    std::vector<NodeId> ids;
    for (std::size_t i = 0; i < nodes; ++i) {
        ids.emplace_back((i < 10 ? "v0" : "v") + std::to_string(i));
        g.AddNode(ids.back());
    }
    std::bernoulli_distribution coin{edge_probability};
    std::size_t next = 0;
    for (std::size_t i = 0; i < nodes; ++i) {
        for (std::size_t j = i + 1; j < nodes; ++j) {
            if (!coin(rng)) continue;
            const std::size_t copies = rng() % 5 == 0 ? 2 : 1;
            for (std::size_t c = 0; c < copies; ++c) {
                Channel& ch = g.AddChannel(ChannelId{"e" + std::to_string(next++)}, ids[i], ids[j],
                                           Amount{rng() % (max_balance + 1)}, Amount{rng() % (max_balance + 1)});
                if (rng() % 10 == 0) ch.MarkClosed();
            }
        }
    }
    return g;
}

} // namespace htlcgp::test

#endif // HTLCGP_TESTS_ORACLES_H
