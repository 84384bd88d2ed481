// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef HTLCGP_ONION_H
#define HTLCGP_ONION_H

#include <htlcgp/amount.h>
#include <htlcgp/crypto.h>
#include <htlcgp/graph.h>

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace htlcgp {

struct KeyPair {
    Bytes32 public_key{};
    Bytes32 secret_key{};
};

/** X25519 key pairs per node, derived from a seed so runs are reproducible. */
class KeyRing
{
public:
    static KeyRing Derive(const std::vector<NodeId>& nodes, std::uint64_t seed);

    void Add(const NodeId& node, const KeyPair& keys) { m_keys[node] = keys; }
    bool Has(const NodeId& node) const { return m_keys.contains(node); }
    const KeyPair& Get(const NodeId& node) const;

private:
    std::map<NodeId, KeyPair> m_keys;
};

/**
 * Per-hop instructions. `locktime` and `penalty` describe the contract the
 * hop forms with its upstream neighbour; `amount` is what it forwards
 * (what it receives, for the last hop).
 */
struct HopPayload {
    Digest payment_hash;
    Digest cancellation_hash;
    Amount amount;
    TimePoint locktime;
    Amount penalty;
    std::optional<NodeId> next_hop;
    TimePoint epoch; //!< clock origin of every relative locktime

    friend bool operator==(const HopPayload&, const HopPayload&) = default;
};

struct OnionPacket {
    std::vector<std::uint8_t> bytes;
};

struct PeeledLayer {
    HopPayload payload;
    std::optional<OnionPacket> inner; //!< absent at the last hop
    std::optional<Rational> phi;      //!< present at the last hop
};

/**
 * Nest payloads[i] for hop i+1 under public_keys[i]. The innermost layer also
 * carries phi for the receiver. Each layer is eph_pk || nonce || box.
 */
OnionPacket BuildOnion(const std::vector<HopPayload>& payloads, const std::vector<Bytes32>& public_keys,
                       const Rational& phi, std::uint64_t seed);

/** nullopt when the layer was not sealed to `keys` or is malformed. */
std::optional<PeeledLayer> PeelOnion(const OnionPacket& packet, const KeyPair& keys);

} // namespace htlcgp

#endif // HTLCGP_ONION_H
