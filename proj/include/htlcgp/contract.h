// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef HTLCGP_CONTRACT_H
#define HTLCGP_CONTRACT_H

#include <htlcgp/amount.h>
#include <htlcgp/crypto.h>
#include <htlcgp/graph.h>

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace htlcgp {

enum class ContractKind { Htlc, Htlc1, GpCancellation, GpPayment };

enum class ContractStatus {
    Proposed,
    Accepted,
    SettledPayment,
    SettledCancellation,
    TimedOutPenalty,
    TimedOutRefund,
};

enum class SettlementMode { OffChain, OnChain };

std::string_view ToString(ContractKind kind);
std::string_view ToString(ContractStatus status);
std::string_view ToString(SettlementMode mode);
ContractKind ParseContractKind(std::string_view text);
bool IsTerminal(ContractStatus status);

/**
 * Terms agreed on one hop. `payer` funds `amount`; for Htlc1 the payee also
 * deposits `penalty`. For GpCancellation the payer is the downstream node
 * that locks the penalty and the payee is the upstream node that claims it
 * on expiry.
 */
struct ContractTerms {
    ContractKind kind{ContractKind::Htlc};
    ChannelId channel;
    NodeId payer;
    NodeId payee;
    Amount amount;
    Amount penalty;
    Digest payment_hash;
    std::optional<Digest> cancellation_hash;
    TimePoint locktime;
};

struct PreimageX {
    Preimage value;
};
struct PreimageR {
    Preimage value;
};
struct TimeoutClaim {
};
/** Off-chain agreement without a preimage; compensation flows to the payee side. */
struct MutualTermination {
    Amount compensation;
};
using Witness = std::variant<PreimageX, PreimageR, TimeoutClaim, MutualTermination>;

using Credit = Payout;

struct SettlementOutcome {
    ContractStatus status{ContractStatus::Accepted};
    std::vector<Credit> credits;

    Amount Total() const;
};

class Contract
{
public:
    /** Validates terms. Nothing is locked until the caller applies the locks. */
    static Contract Propose(ContractId id, ContractTerms terms, TimePoint now);

    ContractId Id() const { return m_id; }
    const ContractTerms& Terms() const { return m_terms; }
    ContractKind Kind() const { return m_terms.kind; }
    ContractStatus Status() const { return m_status; }
    bool IsLive() const { return m_status == ContractStatus::Accepted; }
    /** amount plus any counterparty deposit. */
    Amount Locked() const;

    void Accept();
    /** Record a terminal outcome produced by Resolve. */
    void Finish(const SettlementOutcome& outcome);

private:
    Contract(ContractId id, ContractTerms terms) : m_id{id}, m_terms{std::move(terms)} {}

    ContractId m_id;
    ContractTerms m_terms;
    ContractStatus m_status{ContractStatus::Proposed};
};

/** Pure: decides who gets what for this witness at `now`. */
SettlementOutcome Resolve(const Contract& contract, const Witness& witness, TimePoint now);
/** Resolve restricted to the single-contract penalty variant. */
SettlementOutcome ResolveHtlc1(const Contract& contract, const Witness& witness, TimePoint now);

struct PairOutcome {
    SettlementOutcome cancellation;
    SettlementOutcome payment;
};

/** Resolve a cancellation/payment pair sharing both hashes on one hop. */
PairOutcome ResolvePair(const Contract& cancellation, const Contract& payment, const Witness& witness, TimePoint now);

/** Witness script text for the two-hash contracts. */
std::string RenderScriptTemplate(ContractKind kind);

struct ContractEvent {
    TimePoint time;
    ChannelId channel;
    ContractKind kind{ContractKind::Htlc};
    std::string transition;
    std::optional<NodeId> credited;
    Amount amount;
    SettlementMode mode{SettlementMode::OffChain};
};

nlohmann::json ToJson(const ContractEvent& event);

} // namespace htlcgp

#endif // HTLCGP_CONTRACT_H
