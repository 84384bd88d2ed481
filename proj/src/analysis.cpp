// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <htlcgp/analysis.h>
#include <htlcgp/error.h>

#include <cmath>
#include <limits>
#include <set>

namespace htlcgp {

Adjacency BuildAdjacency(const NetworkGraph& graph)
{
    Adjacency adj;
    adj.nodes = graph.Nodes();
    std::map<NodeId, std::size_t> index;
    for (std::size_t i = 0; i < adj.nodes.size(); ++i) index.emplace(adj.nodes[i], i);
    std::vector<std::set<std::size_t>> sets(adj.nodes.size());
    for (const Channel& ch : graph.Channels()) {
        if (ch.IsClosed()) continue;
        const std::size_t a = index.at(ch.A()), b = index.at(ch.B());
        sets[a].insert(b);
        sets[b].insert(a);
    }
    for (const auto& s : sets) adj.edges.emplace_back(s.begin(), s.end());
    return adj;
}

std::vector<NodeId> BetweennessTop(const NetworkGraph& graph, std::size_t k)
{
    const auto scores = Betweenness<double>(graph);
    std::vector<std::pair<NodeId, double>> ranked(scores.begin(), scores.end());
    // Scores are sums of ratios; compare with a relative tolerance so float noise cannot reorder ties.
    const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, a, b}); };
    std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& x, const auto& y) {
        if (!close(x.second, y.second)) return x.second > y.second;
        return x.first < y.first;
    });
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(ranked[i].first);
    return out;
}

namespace {

/** Dinic over msat capacities. */
class Dinic
{
public:
    explicit Dinic(std::size_t nodes) : m_head(nodes), m_level(nodes), m_next(nodes) {}

    /** Arc pair u->v (cap_uv) and v->u (cap_vu); returns the index of the forward arc. */
    std::size_t AddEdge(std::size_t u, std::size_t v, std::uint64_t cap_uv, std::uint64_t cap_vu)
    {
        m_arcs.push_back(Arc{v, cap_uv});
        m_head[u].push_back(m_arcs.size() - 1);
        m_arcs.push_back(Arc{u, cap_vu});
        m_head[v].push_back(m_arcs.size() - 1);
        return m_arcs.size() - 2;
    }

    std::uint64_t Residual(std::size_t arc) const { return m_arcs[arc].cap; }

    std::uint64_t Run(std::size_t s, std::size_t t)
    {
        std::uint64_t total = 0;
        while (Levels(s, t)) {
            std::fill(m_next.begin(), m_next.end(), 0);
            while (const std::uint64_t pushed = Push(s, t, std::numeric_limits<std::uint64_t>::max())) {
                total += pushed;
            }
        }
        return total;
    }

private:
    struct Arc {
        std::size_t to;
        std::uint64_t cap;
    };

    bool Levels(std::size_t s, std::size_t t)
    {
        std::fill(m_level.begin(), m_level.end(), -1);
        m_level[s] = 0;
        std::queue<std::size_t> q;
        q.push(s);
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            for (std::size_t a : m_head[u]) {
                if (m_arcs[a].cap > 0 && m_level[m_arcs[a].to] < 0) {
                    m_level[m_arcs[a].to] = m_level[u] + 1;
                    q.push(m_arcs[a].to);
                }
            }
        }
        return m_level[t] >= 0;
    }

    std::uint64_t Push(std::size_t u, std::size_t t, std::uint64_t limit)
    {
        if (u == t) return limit;
        for (std::size_t& i = m_next[u]; i < m_head[u].size(); ++i) {
            const std::size_t a = m_head[u][i];
            Arc& arc = m_arcs[a];
            if (arc.cap == 0 || m_level[arc.to] != m_level[u] + 1) continue;
            if (const std::uint64_t got = Push(arc.to, t, std::min(limit, arc.cap))) {
                arc.cap -= got;
                m_arcs[a ^ 1].cap += got;
                return got;
            }
        }
        return 0;
    }

    std::vector<Arc> m_arcs;
    std::vector<std::vector<std::size_t>> m_head;
    std::vector<long> m_level;
    std::vector<std::size_t> m_next;
};

} // namespace

FlowResult MaxFlow(const NetworkGraph& graph, const std::vector<NodeId>& sources, const std::vector<NodeId>& sinks)
{
    const std::set<NodeId> source_set(sources.begin(), sources.end());
    for (const NodeId& t : sinks) {
        if (source_set.contains(t)) throw Error(ErrorCode::InvalidArgument, t.Str() + " is both source and sink");
    }
    const std::vector<NodeId> nodes = graph.Nodes();
    std::map<NodeId, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i], i);
    const std::size_t s = nodes.size(), t = nodes.size() + 1;
    Dinic dinic{nodes.size() + 2};

    struct Tracked {
        const Channel* channel;
        std::size_t arc;
        std::uint64_t cap_ab;
    };
    std::vector<Tracked> tracked;
    std::uint64_t unbounded = 1;
    for (const Channel& ch : graph.Channels()) {
        if (ch.IsClosed()) continue;
        const std::uint64_t ab = ch.Remain(ch.A()).Msat(), ba = ch.Remain(ch.B()).Msat();
        unbounded += ab + ba;
        tracked.push_back(Tracked{&ch, dinic.AddEdge(index.at(ch.A()), index.at(ch.B()), ab, ba), ab});
    }
    for (const NodeId& src : source_set) {
        if (!index.contains(src)) throw Error(ErrorCode::UnknownNode, src.Str());
        dinic.AddEdge(s, index.at(src), unbounded, 0);
    }
    for (const NodeId& snk : std::set<NodeId>(sinks.begin(), sinks.end())) {
        if (!index.contains(snk)) throw Error(ErrorCode::UnknownNode, snk.Str());
        dinic.AddEdge(index.at(snk), t, unbounded, 0);
    }

    FlowResult result;
    result.value = Amount{dinic.Run(s, t)};
    for (const Tracked& tr : tracked) {
        const std::uint64_t left = dinic.Residual(tr.arc);
        if (left == tr.cap_ab) continue;
        const Channel& ch = *tr.channel;
        if (left < tr.cap_ab) {
            result.channels.emplace(ch.Id(), ChannelFlow{ch.A(), Amount{tr.cap_ab - left}});
        } else {
            result.channels.emplace(ch.Id(), ChannelFlow{ch.B(), Amount{left - tr.cap_ab}});
        }
    }
    return result;
}

} // namespace htlcgp
