// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <htlcgp/analysis.h>
#include <htlcgp/attack.h>
#include <htlcgp/error.h>
#include <htlcgp/penalty.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <queue>
#include <set>

namespace htlcgp {

RoIResult ComputeRoi(std::uint64_t n_tx, const FeePolicy& policy, Amount tx_value, Amount total_penalty)
{
    RoIResult r;
    r.n_tx = n_tx;
    r.profit_processed = policy.FeeFor(tx_value) * n_tx;
    r.total_griefing_penalty = total_penalty;
    r.roi = Diff(r.profit_processed, total_penalty);
    r.log_modulus_roi = LogModulus(static_cast<double>(r.roi));
    return r;
}

double LogModulus(double x)
{
    if (x == 0) return 0.0;
    const double magnitude = std::log10(std::abs(x) + 1.0);
    return x < 0 ? -magnitude : magnitude;
}

AttackTargets DeriveTargets(const NetworkGraph& graph, const NodeId& victim, const std::optional<NodeId>& exclude)
{
    if (!graph.HasNode(victim)) throw Error(ErrorCode::VictimNotFound, victim.Str());
    const Adjacency adj = BuildAdjacency(graph);
    const auto pos = [&](const NodeId& n) {
        return static_cast<std::size_t>(std::lower_bound(adj.nodes.begin(), adj.nodes.end(), n) - adj.nodes.begin());
    };
    std::vector<NodeId> pendant, other;
    for (std::size_t nb : adj.edges[pos(victim)]) {
        const NodeId& id = adj.nodes[nb];
        if (exclude && id == *exclude) continue;
        (adj.edges[nb].size() == 1 ? pendant : other).push_back(id);
    }
    AttackTargets t{victim, {}, {}};
    std::vector<NodeId>& pool = pendant.empty() ? other : pendant;
    const std::size_t take = (pool.size() + 1) / 2;
    t.sources.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    t.sinks.assign(pool.begin() + static_cast<std::ptrdiff_t>(take), pool.end());
    if (!pendant.empty()) t.sinks.insert(t.sinks.end(), other.begin(), other.end());
    std::sort(t.sinks.begin(), t.sinks.end());
    return t;
}

namespace {

/** Neighbour of the victim whose channel carried the most flow in the given direction. */
NodeId Busiest(const NetworkGraph& graph, const FlowResult& flow, const NodeId& victim,
               const std::vector<NodeId>& candidates, bool towards_victim)
{
    std::optional<NodeId> best;
    Amount best_flow{0};
    for (const NodeId& c : candidates) {
        if (!graph.FindChannel(c, victim)) continue;
        Amount carried{0};
        for (const ChannelId& id : graph.Incident(c)) {
            const Channel& ch = graph.GetChannel(id);
            if (!ch.HasEndpoint(victim)) continue;
            const auto it = flow.channels.find(id);
            if (it == flow.channels.end()) continue;
            const NodeId& expected_from = towards_victim ? c : victim;
            if (it->second.from == expected_from) carried += it->second.amount;
        }
        if (!best || carried > best_flow) {
            best = c;
            best_flow = carried;
        }
    }
    if (!best) throw Error(ErrorCode::NoCycleThroughVictim, "no targeted neighbour adjacent to " + victim.Str());
    return *best;
}

/** Lock `count` griefed payments along the route: payment amounts forward, penalties backward. */
std::uint64_t LockPayments(NetworkGraph& graph, const PathPlan& plan, const std::vector<ChannelId>& route,
                           bool penalised, std::uint64_t max_count)
{
    // Demand per (channel, funding side) of one payment.
    std::map<std::pair<ChannelId, NodeId>, std::uint64_t> demand;
    for (std::size_t h = 0; h < plan.Hops(); ++h) {
        demand[{route[h], plan.path[h]}] += plan.amounts[h].Msat();
        if (penalised && plan.tgp[h] > Amount{0}) demand[{route[h], plan.path[h + 1]}] += plan.tgp[h].Msat();
    }
    std::uint64_t count = max_count;
    for (const auto& [key, need] : demand) {
        if (need == 0) continue;
        count = std::min(count, graph.GetChannel(key.first).Remain(key.second).Msat() / need);
    }
    ContractId next{1};
    for (const auto& [key, need] : demand) {
        if (need * count > 0) graph.GetChannel(key.first).ApplyLock(next++, key.second, Amount{need} * count);
    }
    return count;
}

AttackReport RunAttack(const NetworkGraph& before, NetworkGraph during, const NodeId& attacker,
                       std::vector<NodeId> route, const AttackTargets& targets, const AttackParams& params)
{
    const bool penalised = params.protocol != Protocol::Htlc;
    PlanParams pp;
    pp.path = route;
    pp.alpha = params.tx_value;
    pp.gamma = penalised ? params.gamma : PenaltyRate{};
    pp.delta = params.delta;
    pp.t_base = params.t_base;
    pp.k = params.k;
    const PathPlan plan = BuildPathPlan(pp);

    AttackReport report;
    report.attacker = attacker;
    report.route = std::move(route);
    report.penalty_per_payment = penalised ? plan.tgp.back() : Amount{0};
    report.cost_per_payment = plan.amounts[0] + report.penalty_per_payment;
    if (params.budget < report.cost_per_payment) {
        throw Error(ErrorCode::BudgetTooSmall, "budget " + std::to_string(params.budget.Msat()) +
                                                   " msat cannot fund one payment costing " +
                                                   std::to_string(report.cost_per_payment.Msat()) + " msat");
    }
    std::vector<ChannelId> hops;
    for (std::size_t h = 0; h < plan.Hops(); ++h) {
        const auto id = during.FindChannel(plan.path[h], plan.path[h + 1]);
        if (!id) throw Error(ErrorCode::NoCycleThroughVictim, "route hop " + std::to_string(h) + " has no channel");
        hops.push_back(*id);
    }
    if (std::set<ChannelId>(hops.begin(), hops.end()).size() != hops.size()) {
        throw Error(ErrorCode::NoCycleThroughVictim, "route reuses a channel");
    }
    const std::uint64_t affordable = params.budget.Msat() / report.cost_per_payment.Msat();
    report.payments = LockPayments(during, plan, hops, penalised, affordable);

    report.flow_before = MaxFlow(before.Without(attacker), targets.sources, targets.sinks).value;
    report.flow_blocked = MaxFlow(during.Without(attacker), targets.sources, targets.sinks).value;
    const Amount with_attacker = MaxFlow(during, targets.sources, targets.sinks).value;
    report.flow_via_attacker = with_attacker - std::min(with_attacker, report.flow_blocked);
    const Amount lost = report.flow_before - std::min(report.flow_before, report.flow_blocked);
    report.redirected = std::min(lost, report.flow_via_attacker);

    const std::uint64_t n_tx = report.redirected.Msat() / params.tx_value.Msat();
    report.roi = ComputeRoi(n_tx, params.attacker_policy, params.tx_value, report.penalty_per_payment * report.payments);
    return report;
}

void CheckParams(const NetworkGraph& graph, const AttackTargets& targets, const AttackParams& params)
{
    if (!graph.HasNode(targets.victim)) throw Error(ErrorCode::VictimNotFound, targets.victim.Str());
    if (params.budget == Amount{0}) throw Error(ErrorCode::InvalidArgument, "budget must be positive");
    if (params.tx_value == Amount{0}) throw Error(ErrorCode::ZeroAmount, "transaction value must be positive");
    if (targets.sources.empty() || targets.sinks.empty()) {
        throw Error(ErrorCode::NoCycleThroughVictim, targets.victim.Str() + " needs at least one source and one sink");
    }
}

} // namespace

AttackReport AttackNewChannels(const NetworkGraph& graph, const AttackTargets& targets, const AttackParams& params)
{
    CheckParams(graph, targets, params);
    const FlowResult flow = MaxFlow(graph, targets.sources, targets.sinks);
    const NodeId source = Busiest(graph, flow, targets.victim, targets.sources, true);
    const NodeId sink = Busiest(graph, flow, targets.victim, targets.sinks, false);

    NodeId attacker{"attacker"};
    for (int i = 1; graph.HasNode(attacker); ++i) attacker = NodeId{"attacker_" + std::to_string(i)};
    NetworkGraph during = graph;
    during.AddNode(attacker, params.attacker_policy);
    during.AddChannel(ChannelId{attacker.Str() + ":" + source.Str()}, attacker, source, params.budget, params.budget);
    during.AddChannel(ChannelId{attacker.Str() + ":" + sink.Str()}, sink, attacker, params.budget, params.budget);
    return RunAttack(graph, std::move(during), attacker, {attacker, source, targets.victim, sink, attacker}, targets,
                     params);
}

AttackReport AttackNewChannels(const NetworkGraph& graph, const NodeId& victim, const AttackParams& params)
{
    return AttackNewChannels(graph, DeriveTargets(graph, victim), params);
}

std::vector<NodeId> FindCycleThrough(const NetworkGraph& graph, const NodeId& attacker, const NodeId& victim)
{
    if (!graph.HasNode(victim)) throw Error(ErrorCode::VictimNotFound, victim.Str());
    if (!graph.HasNode(attacker)) throw Error(ErrorCode::UnknownNode, attacker.Str());
    const Adjacency adj = BuildAdjacency(graph);
    const auto pos = [&](const NodeId& n) {
        return static_cast<std::size_t>(std::lower_bound(adj.nodes.begin(), adj.nodes.end(), n) - adj.nodes.begin());
    };
    const std::size_t a = pos(attacker), v = pos(victim);
    if (a == v) throw Error(ErrorCode::NoCycleThroughVictim, "attacker is the victim");

    // BFS with neighbours in id order; `banned` nodes are never entered, `skip_direct` forbids from -> to.
    const auto bfs = [&](std::size_t from, std::size_t to, const std::set<std::size_t>& banned,
                         bool skip_direct) -> std::vector<std::size_t> {
        std::vector<long> parent(adj.nodes.size(), -1);
        std::queue<std::size_t> q;
        parent[from] = static_cast<long>(from);
        q.push(from);
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            for (std::size_t w : adj.edges[u]) {
                if (parent[w] >= 0 || banned.contains(w)) continue;
                if (skip_direct && u == from && w == to) continue;
                parent[w] = static_cast<long>(u);
                if (w == to) {
                    std::vector<std::size_t> path{to};
                    while (path.back() != from) path.push_back(static_cast<std::size_t>(parent[path.back()]));
                    return {path.rbegin(), path.rend()};
                }
                q.push(w);
            }
        }
        return {};
    };

    const std::vector<std::size_t> out = bfs(a, v, {}, false);
    if (out.empty()) throw Error(ErrorCode::NoCycleThroughVictim, "victim unreachable from " + attacker.Str());
    const std::set<std::size_t> used(out.begin() + 1, out.end() - 1);
    const std::vector<std::size_t> back = bfs(v, a, used, out.size() == 2);
    if (back.empty()) {
        throw Error(ErrorCode::NoCycleThroughVictim, "no return path from " + victim.Str() + " to " + attacker.Str());
    }
    std::vector<NodeId> cycle;
    for (std::size_t i : out) cycle.push_back(adj.nodes[i]);
    for (std::size_t i = 1; i < back.size(); ++i) cycle.push_back(adj.nodes[back[i]]);
    return cycle;
}

AttackReport AttackExistingChannels(const NetworkGraph& graph, const NodeId& attacker, const AttackTargets& targets,
                                    const AttackParams& params)
{
    CheckParams(graph, targets, params);
    if (!graph.HasNode(attacker) || graph.Incident(attacker).empty()) {
        throw Error(ErrorCode::NoCycleThroughVictim, attacker.Str() + " has no channels");
    }
    std::vector<NodeId> cycle = FindCycleThrough(graph, attacker, targets.victim);
    return RunAttack(graph, graph, attacker, std::move(cycle), targets, params);
}

AttackReport AttackExistingChannels(const NetworkGraph& graph, const NodeId& attacker, const NodeId& victim,
                                    const AttackParams& params)
{
    return AttackExistingChannels(graph, attacker, DeriveTargets(graph, victim, attacker), params);
}

SyntheticTopology MakeHubAndSpoke(const HubAndSpokeSpec& spec)
{
    if (spec.sources == 0 || spec.sinks == 0) throw Error(ErrorCode::InvalidArgument, "need sources and sinks");
    const auto name = [](const char* prefix, std::size_t i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%s%02zu", prefix, i);
        return NodeId{buf};
    };
    const auto half = [](Amount cap) { return Amount{cap.Msat() / 2}; };
    const auto other_half = [](Amount cap) { return Amount{cap.Msat() - cap.Msat() / 2}; };

    SyntheticTopology topo;
    NetworkGraph& g = topo.graph;
    topo.targets.victim = NodeId{"victim"};
    g.AddNode(topo.targets.victim, spec.policy);
    for (std::size_t i = 0; i < spec.sources; ++i) {
        const NodeId s = name("src", i);
        g.AddNode(s, spec.policy);
        g.AddChannel(ChannelId{s.Str() + ":victim"}, s, topo.targets.victim, other_half(spec.spoke_capacity),
                     half(spec.spoke_capacity));
        topo.targets.sources.push_back(s);
    }
    for (std::size_t i = 0; i < spec.sinks; ++i) {
        const NodeId t = name("snk", i);
        g.AddNode(t, spec.policy);
        g.AddChannel(ChannelId{"victim:" + t.Str()}, topo.targets.victim, t, other_half(spec.spoke_capacity),
                     half(spec.spoke_capacity));
        topo.targets.sinks.push_back(t);
    }
    if (spec.resident_attacker) {
        const NodeId attacker{"attacker"};
        g.AddNode(attacker, spec.policy);
        const NodeId& src = topo.targets.sources.front();
        g.AddChannel(ChannelId{"attacker:" + src.Str()}, attacker, src, other_half(spec.attacker_capacity),
                     half(spec.attacker_capacity));
        NodeId prev = topo.targets.sinks.front();
        for (std::size_t i = 0; i < spec.relays; ++i) {
            const NodeId relay = name("relay", i);
            g.AddNode(relay, spec.policy);
            g.AddChannel(ChannelId{prev.Str() + ":" + relay.Str()}, prev, relay, other_half(spec.attacker_capacity),
                         half(spec.attacker_capacity));
            prev = relay;
        }
        g.AddChannel(ChannelId{prev.Str() + ":attacker"}, prev, attacker, other_half(spec.attacker_capacity),
                     half(spec.attacker_capacity));
        topo.attacker = attacker;
    }
    return topo;
}

nlohmann::json ToJson(const AttackReport& report)
{
    nlohmann::json route = nlohmann::json::array();
    for (const NodeId& n : report.route) route.push_back(n.Str());
    return {{"attacker", report.attacker.Str()},
            {"route", route},
            {"payments", report.payments},
            {"cost_per_payment_msat", report.cost_per_payment.Msat()},
            {"penalty_per_payment_msat", report.penalty_per_payment.Msat()},
            {"flow_before_msat", report.flow_before.Msat()},
            {"flow_blocked_msat", report.flow_blocked.Msat()},
            {"flow_via_attacker_msat", report.flow_via_attacker.Msat()},
            {"redirected_msat", report.redirected.Msat()},
            {"n_tx", report.roi.n_tx},
            {"profit_processed_msat", report.roi.profit_processed.Msat()},
            {"total_griefing_penalty_msat", report.roi.total_griefing_penalty.Msat()},
            {"roi_msat", report.roi.roi},
            {"log_modulus_roi", report.roi.log_modulus_roi}};
}

} // namespace htlcgp
