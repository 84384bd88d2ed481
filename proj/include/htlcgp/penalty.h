// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef HTLCGP_PENALTY_H
#define HTLCGP_PENALTY_H

#include <htlcgp/amount.h>
#include <htlcgp/graph.h>

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace htlcgp {

/**
 * Everything the sender fixes up front for one payment over
 * path[0] -> ... -> path[n]. Hop i is the channel path[i] -> path[i+1].
 */
struct PathPlan {
    std::vector<NodeId> path;
    Amount alpha;                 //!< what the payee receives
    std::vector<Amount> fees;     //!< fee of path[1..n-1]
    std::vector<Amount> amounts;  //!< per-hop payment amount
    std::vector<Duration> timelocks;
    std::vector<Amount> tgp;      //!< per-hop penalty, rounded half-up
    PenaltyRate gamma;
    Duration delta;
    Amount psi;
    std::uint32_t k{0};
    Rational phi{0};

    std::size_t Hops() const { return path.size() - 1; }
};

struct PlanParams {
    std::vector<NodeId> path;
    Amount alpha;
    std::vector<Amount> fees; //!< empty means zero fees
    PenaltyRate gamma;
    Duration delta{1440};
    Duration t_base{1440};
    std::uint32_t k{4};       //!< 0 disables masking (psi = 0)
    std::optional<Amount> psi_override;
};

std::vector<Amount> ComputeAmountCascade(Amount alpha, std::span<const Amount> fees);
std::vector<Duration> ComputeTimelockSchedule(std::size_t hops, Duration t_base, Duration delta);
Amount ChoosePsi(Amount alpha, Duration t0, Duration delta, std::uint32_t k);

Rational ComputePhi(const PathPlan& plan);
Rational ComputeTgpExact(const PathPlan& plan, std::size_t hop);
Amount ComputeTgp(const PathPlan& plan, std::size_t hop);

/** Telescoping check on an incoming penalty request, 1 msat slack. */
bool VerifyIncomingTgp(Amount tgp_incoming, Amount alpha_hop, Duration locktime, const PenaltyRate& gamma,
                       Amount tgp_outgoing);
/** Receiver check against the blinded factor: relative 1e-6 plus 1 msat. */
bool VerifyReceiverTgp(const PenaltyRate& gamma, const Rational& phi, Amount alpha, Duration locktime, Amount tgp);

/** What a node learns about its incoming penalty contract. */
struct PositionObservation {
    PenaltyRate gamma;
    Duration delta;
    Amount hop_amount;       //!< assumed equal on every upstream hop
    Duration incoming_locktime;
    Amount incoming_tgp;
};

/** Number of upstream hops implied by the received penalty, assuming no masking. */
std::size_t InferPosition(const PositionObservation& obs);

struct InvestmentRatio {
    Rational htlc_over_gp;
    Rational budget_multiple;
};

InvestmentRatio ComputeInvestmentRatio(const PathPlan& plan);

PathPlan BuildPathPlan(const PlanParams& params);

/** Path "U0".."Un" for analyses that do not need a graph. */
std::vector<NodeId> SyntheticPath(std::size_t hops);

nlohmann::json PlanToJson(const PathPlan& plan);

} // namespace htlcgp

#endif // HTLCGP_PENALTY_H
