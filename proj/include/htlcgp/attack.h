// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef HTLCGP_ATTACK_H
#define HTLCGP_ATTACK_H

#include <htlcgp/amount.h>
#include <htlcgp/graph.h>
#include <htlcgp/protocol.h>

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace htlcgp {

struct RoIResult {
    std::uint64_t n_tx{0};
    Amount profit_processed;
    Amount total_griefing_penalty;
    SignedMsat roi{0};
    double log_modulus_roi{0};
};

/** profit = n_tx * fee(tx_value); roi = profit - total_penalty. */
RoIResult ComputeRoi(std::uint64_t n_tx, const FeePolicy& policy, Amount tx_value, Amount total_penalty);

/** sign(x) * log10(|x| + 1). */
double LogModulus(double x);

/** Victim plus the neighbours whose traffic it carries. */
struct AttackTargets {
    NodeId victim;
    std::vector<NodeId> sources;
    std::vector<NodeId> sinks;
};

/**
 * Split the victim's neighbours: pendant neighbours in id order, the first
 * half (rounded up) as sources and every other neighbour as a sink. Without
 * pendant neighbours all neighbours are split in half. `exclude` is never used.
 */
AttackTargets DeriveTargets(const NetworkGraph& graph, const NodeId& victim,
                            const std::optional<NodeId>& exclude = std::nullopt);

struct AttackParams {
    Amount budget;
    Amount tx_value;
    Protocol protocol{Protocol::HtlcGp};
    PenaltyRate gamma;
    Duration delta{4};
    Duration t_base{396};
    std::uint32_t k{4};
    FeePolicy attacker_policy{Amount{1000}, Rational{1, 1'000'000}};
};

struct AttackReport {
    RoIResult roi;
    std::vector<NodeId> route; //!< attacker ... attacker
    NodeId attacker;
    std::uint64_t payments{0}; //!< griefed self-payments held open
    Amount cost_per_payment;
    Amount penalty_per_payment;
    Amount flow_before;       //!< sources to sinks, attacker absent
    Amount flow_blocked;      //!< same, after the locks
    Amount flow_via_attacker; //!< extra flow the attacker's channels carry after the locks
    Amount redirected;
};

/**
 * Strategy 1: a fresh attacker opens channels to the targeted source and
 * sink, each side funded with the budget, and griefs self-payments over
 * attacker -> source -> victim -> sink -> attacker until the budget runs out.
 */
AttackReport AttackNewChannels(const NetworkGraph& graph, const AttackTargets& targets, const AttackParams& params);
AttackReport AttackNewChannels(const NetworkGraph& graph, const NodeId& victim, const AttackParams& params);

/** Strategy 2: the attacker griefs over a cycle through the victim built from channels it already has. */
AttackReport AttackExistingChannels(const NetworkGraph& graph, const NodeId& attacker, const AttackTargets& targets,
                                    const AttackParams& params);
AttackReport AttackExistingChannels(const NetworkGraph& graph, const NodeId& attacker, const NodeId& victim,
                                    const AttackParams& params);

/** Shortest attacker -> victim -> attacker cycle with no repeated node. */
std::vector<NodeId> FindCycleThrough(const NetworkGraph& graph, const NodeId& attacker, const NodeId& victim);

struct HubAndSpokeSpec {
    std::size_t sources{4};
    std::size_t sinks{4};
    Amount spoke_capacity{100'000'000'000}; //!< 1 BTC
    bool resident_attacker{true};
    std::size_t relays{2};
    Amount attacker_capacity{20'000'000'000};
    FeePolicy policy{Amount{1000}, Rational{1, 1'000'000}};
};

struct SyntheticTopology {
    NetworkGraph graph;
    AttackTargets targets;
    std::optional<NodeId> attacker;
};

/**
 * "victim" joined to src00.. and snk00.. spokes. The resident attacker links
 * to src00 and reaches snk00 through relay00.., closing a cycle of
 * relays + 4 hops through the victim.
 */
SyntheticTopology MakeHubAndSpoke(const HubAndSpokeSpec& spec);

nlohmann::json ToJson(const AttackReport& report);

} // namespace htlcgp

#endif // HTLCGP_ATTACK_H
