// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <htlcgp/error.h>
#include <htlcgp/graph.h>

#include <algorithm>

namespace htlcgp {

Channel::Channel(ChannelId id, NodeId a, NodeId b, Amount remain_a, Amount remain_b)
    : m_id{std::move(id)}, m_a{std::move(a)}, m_b{std::move(b)},
      m_remain_a{remain_a}, m_remain_b{remain_b}, m_capacity{remain_a + remain_b}
{
    if (m_a == m_b) throw Error(ErrorCode::InvalidArgument, "channel " + m_id.Str() + " is a self-loop");
}

const NodeId& Channel::Other(const NodeId& node) const
{
    if (node == m_a) return m_b;
    if (node == m_b) return m_a;
    throw Error(ErrorCode::UnknownNode, node.Str() + " is not an endpoint of " + m_id.Str());
}

Amount& Channel::RemainRef(const NodeId& node)
{
    if (node == m_a) return m_remain_a;
    if (node == m_b) return m_remain_b;
    throw Error(ErrorCode::UnknownNode, node.Str() + " is not an endpoint of " + m_id.Str());
}

Amount Channel::Remain(const NodeId& from) const
{
    if (from == m_a) return m_remain_a;
    if (from == m_b) return m_remain_b;
    throw Error(ErrorCode::UnknownNode, from.Str() + " is not an endpoint of " + m_id.Str());
}

Amount Channel::Locked() const
{
    Amount total{0};
    for (const Lock& lock : m_locks) total += lock.amount;
    return total;
}

void Channel::ApplyLock(ContractId contract, const NodeId& from, Amount amount)
{
    Amount& remain = RemainRef(from);
    if (remain < amount) {
        throw Error(ErrorCode::InsufficientBalance, "channel " + m_id.Str() + ": " + from.Str() + " has " +
                                                        std::to_string(remain.Msat()) + " msat, needs " +
                                                        std::to_string(amount.Msat()));
    }
    remain -= amount;
    m_locks.push_back(Lock{contract, from, amount});
}

bool Channel::HasLock(ContractId contract) const
{
    return std::any_of(m_locks.begin(), m_locks.end(), [&](const Lock& l) { return l.contract == contract; });
}

Amount Channel::SettleLock(ContractId contract, const NodeId& credited, Amount burned)
{
    if (!HasEndpoint(credited)) {
        throw Error(ErrorCode::IllegalOutcome, credited.Str() + " cannot be credited on " + m_id.Str());
    }
    if (!HasLock(contract)) {
        throw Error(ErrorCode::UnknownContract, "contract " + std::to_string(contract) + " not on " + m_id.Str());
    }
    Amount released{0};
    std::erase_if(m_locks, [&](const Lock& l) {
        if (l.contract != contract) return false;
        released += l.amount;
        return true;
    });
    const Amount fee = std::min(burned, released);
    RemainRef(credited) += released - fee;
    m_capacity -= fee;
    return released;
}

void Channel::Distribute(ContractId contract, const std::vector<Payout>& payouts, Amount burned)
{
    if (!HasLock(contract)) {
        throw Error(ErrorCode::UnknownContract, "contract " + std::to_string(contract) + " not on " + m_id.Str());
    }
    Amount locked{0};
    for (const Lock& l : m_locks) {
        if (l.contract == contract) locked += l.amount;
    }
    Amount paid{0};
    for (const Payout& p : payouts) {
        if (!HasEndpoint(p.party)) {
            throw Error(ErrorCode::IllegalOutcome, p.party.Str() + " cannot be credited on " + m_id.Str());
        }
        paid += p.amount;
    }
    if (paid != locked) {
        throw Error(ErrorCode::IllegalOutcome, "payouts " + std::to_string(paid.Msat()) + " != locked " +
                                                   std::to_string(locked.Msat()) + " on " + m_id.Str());
    }
    std::erase_if(m_locks, [&](const Lock& l) { return l.contract == contract; });
    Amount fee_left = burned;
    for (const Payout& p : payouts) {
        const Amount fee = std::min(fee_left, p.amount);
        fee_left -= fee;
        RemainRef(p.party) += p.amount - fee;
        m_capacity -= fee;
    }
}

Amount Channel::RefundLock(ContractId contract)
{
    if (!HasLock(contract)) {
        throw Error(ErrorCode::UnknownContract, "contract " + std::to_string(contract) + " not on " + m_id.Str());
    }
    Amount released{0};
    std::erase_if(m_locks, [&](const Lock& l) {
        if (l.contract != contract) return false;
        RemainRef(l.owner) += l.amount;
        released += l.amount;
        return true;
    });
    return released;
}

void NetworkGraph::AddNode(const NodeId& node, FeePolicy policy)
{
    if (m_nodes.contains(node)) throw Error(ErrorCode::InvalidArgument, "duplicate node " + node.Str());
    m_nodes.emplace(node, std::move(policy));
    m_incident[node];
}

void NetworkGraph::SetPolicy(const NodeId& node, FeePolicy policy)
{
    const auto it = m_nodes.find(node);
    if (it == m_nodes.end()) throw Error(ErrorCode::UnknownNode, node.Str());
    it->second = std::move(policy);
}

Channel& NetworkGraph::AddChannel(ChannelId id, const NodeId& a, const NodeId& b, Amount remain_a, Amount remain_b)
{
    if (m_index.contains(id)) throw Error(ErrorCode::InvalidArgument, "duplicate channel " + id.Str());
    if (!m_nodes.contains(a)) throw Error(ErrorCode::UnknownNode, a.Str());
    if (!m_nodes.contains(b)) throw Error(ErrorCode::UnknownNode, b.Str());
    m_index.emplace(id, m_channels.size());
    m_incident[a].push_back(id);
    m_incident[b].push_back(id);
    return m_channels.emplace_back(std::move(id), a, b, remain_a, remain_b);
}

const FeePolicy& NetworkGraph::Policy(const NodeId& node) const
{
    const auto it = m_nodes.find(node);
    if (it == m_nodes.end()) throw Error(ErrorCode::UnknownNode, node.Str());
    return it->second;
}

Channel& NetworkGraph::GetChannel(const ChannelId& id)
{
    const auto it = m_index.find(id);
    if (it == m_index.end()) throw Error(ErrorCode::UnknownChannel, id.Str());
    return m_channels[it->second];
}

const Channel& NetworkGraph::GetChannel(const ChannelId& id) const
{
    const auto it = m_index.find(id);
    if (it == m_index.end()) throw Error(ErrorCode::UnknownChannel, id.Str());
    return m_channels[it->second];
}

std::optional<ChannelId> NetworkGraph::FindChannel(const NodeId& a, const NodeId& b) const
{
    const auto it = m_incident.find(a);
    if (it == m_incident.end()) return std::nullopt;
    const Channel* best = nullptr;
    for (const ChannelId& id : it->second) {
        const Channel& ch = GetChannel(id);
        if (ch.IsClosed() || !ch.HasEndpoint(b) || ch.Other(a) != b) continue;
        if (best == nullptr || ch.Remain(a) > best->Remain(a) ||
            (ch.Remain(a) == best->Remain(a) && ch.Id() < best->Id())) {
            best = &ch;
        }
    }
    if (best == nullptr) return std::nullopt;
    return best->Id();
}

std::vector<NodeId> NetworkGraph::Nodes() const
{
    std::vector<NodeId> out;
    out.reserve(m_nodes.size());
    for (const auto& [id, policy] : m_nodes) out.push_back(id);
    return out;
}

const std::vector<ChannelId>& NetworkGraph::Incident(const NodeId& node) const
{
    const auto it = m_incident.find(node);
    if (it == m_incident.end()) throw Error(ErrorCode::UnknownNode, node.Str());
    return it->second;
}

NetworkGraph NetworkGraph::Without(const NodeId& node) const
{
    NetworkGraph out;
    for (const auto& [id, policy] : m_nodes) {
        if (id != node) out.AddNode(id, policy);
    }
    for (const Channel& ch : m_channels) {
        if (ch.HasEndpoint(node)) continue;
        out.m_index.emplace(ch.Id(), out.m_channels.size());
        out.m_incident[ch.A()].push_back(ch.Id());
        out.m_incident[ch.B()].push_back(ch.Id());
        out.m_channels.push_back(ch);
    }
    return out;
}

Amount TotalFunds(const NetworkGraph& graph)
{
    Amount total{0};
    for (const Channel& ch : graph.Channels()) {
        total += ch.Remain(ch.A()) + ch.Remain(ch.B()) + ch.Locked();
    }
    return total;
}

} // namespace htlcgp
