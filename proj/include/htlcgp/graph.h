// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef HTLCGP_GRAPH_H
#define HTLCGP_GRAPH_H

#include <htlcgp/amount.h>

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace htlcgp {

/** Opaque node identifier. Key material is looked up by id in a KeyRing. */
class NodeId
{
public:
    NodeId() = default;
    explicit NodeId(std::string id) : m_id{std::move(id)} {}

    const std::string& Str() const { return m_id; }

    friend auto operator<=>(const NodeId&, const NodeId&) = default;
    friend bool operator==(const NodeId&, const NodeId&) = default;

private:
    std::string m_id;
};

class ChannelId
{
public:
    ChannelId() = default;
    explicit ChannelId(std::string id) : m_id{std::move(id)} {}

    const std::string& Str() const { return m_id; }

    friend auto operator<=>(const ChannelId&, const ChannelId&) = default;
    friend bool operator==(const ChannelId&, const ChannelId&) = default;

private:
    std::string m_id;
};

/** Contract handle as seen by a channel. Assigned by the contract owner. */
using ContractId = std::uint64_t;

struct Payout {
    NodeId party;
    Amount amount;
};

struct Lock {
    ContractId contract;
    NodeId owner; //!< endpoint whose residual funded the lock
    Amount amount;
};

/**
 * Bidirectional payment channel between endpoints a and b.
 *
 * Conservation: remain(a) + remain(b) + locked = capacity, always.
 */
class Channel
{
public:
    Channel(ChannelId id, NodeId a, NodeId b, Amount remain_a, Amount remain_b);

    const ChannelId& Id() const { return m_id; }
    const NodeId& A() const { return m_a; }
    const NodeId& B() const { return m_b; }
    bool HasEndpoint(const NodeId& node) const { return node == m_a || node == m_b; }
    const NodeId& Other(const NodeId& node) const;

    /** Spendable balance of `from` towards the other endpoint. */
    Amount Remain(const NodeId& from) const;
    Amount Locked() const;
    Amount Capacity() const { return m_capacity; }
    const std::vector<Lock>& Locks() const { return m_locks; }
    bool IsClosed() const { return m_closed; }
    void MarkClosed() { m_closed = true; }

    /** Move amount from `from`'s residual into a lock held for contract. */
    void ApplyLock(ContractId contract, const NodeId& from, Amount amount);
    /**
     * Release every lock of contract to `credited`, less `burned`
     * (an on-chain fee that leaves the channel). Returns the amount released.
     */
    Amount SettleLock(ContractId contract, const NodeId& credited, Amount burned = Amount{0});
    /**
     * Split the contract's locks between endpoints. Payouts must add up to the
     * locked total; `burned` is taken from the first payout.
     */
    void Distribute(ContractId contract, const std::vector<Payout>& payouts, Amount burned = Amount{0});
    /** Release every lock of contract back to whoever funded it. */
    Amount RefundLock(ContractId contract);
    bool HasLock(ContractId contract) const;

private:
    Amount& RemainRef(const NodeId& node);

    ChannelId m_id;
    NodeId m_a;
    NodeId m_b;
    Amount m_remain_a;
    Amount m_remain_b;
    Amount m_capacity;
    std::vector<Lock> m_locks;
    bool m_closed{false};
};

/** Bidirected multigraph of channels; node and channel ids unique. */
class NetworkGraph
{
public:
    void AddNode(const NodeId& node, FeePolicy policy = {});
    Channel& AddChannel(ChannelId id, const NodeId& a, const NodeId& b, Amount remain_a, Amount remain_b);

    bool HasNode(const NodeId& node) const { return m_nodes.contains(node); }
    bool HasChannel(const ChannelId& id) const { return m_index.contains(id); }
    const FeePolicy& Policy(const NodeId& node) const;
    void SetPolicy(const NodeId& node, FeePolicy policy);

    Channel& GetChannel(const ChannelId& id);
    const Channel& GetChannel(const ChannelId& id) const;
    /** Open channel between a and b with the largest residual from a, ties by id. */
    std::optional<ChannelId> FindChannel(const NodeId& a, const NodeId& b) const;

    std::vector<NodeId> Nodes() const;
    const std::vector<Channel>& Channels() const { return m_channels; }
    /** Channel ids incident to node, in insertion order. */
    const std::vector<ChannelId>& Incident(const NodeId& node) const;
    std::size_t NodeCount() const { return m_nodes.size(); }
    bool Empty() const { return m_nodes.empty(); }

    /** Copy without `node` and its channels. */
    NetworkGraph Without(const NodeId& node) const;

    /** On-chain fees removed from channels so far. */
    Amount Burned() const { return m_burned; }
    void AddBurned(Amount fee) { m_burned += fee; }

private:
    std::map<NodeId, FeePolicy> m_nodes;
    std::map<NodeId, std::vector<ChannelId>> m_incident;
    std::vector<Channel> m_channels;
    std::map<ChannelId, std::size_t> m_index;
    Amount m_burned{0};
};

/** Sum of every residual and every locked amount. */
Amount TotalFunds(const NetworkGraph& graph);

} // namespace htlcgp

#endif // HTLCGP_GRAPH_H
