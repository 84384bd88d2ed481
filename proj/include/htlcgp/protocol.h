// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef HTLCGP_PROTOCOL_H
#define HTLCGP_PROTOCOL_H

#include <htlcgp/amount.h>
#include <htlcgp/contract.h>
#include <htlcgp/graph.h>
#include <htlcgp/onion.h>
#include <htlcgp/penalty.h>

#include <nlohmann/json_fwd.hpp>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace htlcgp {

enum class Protocol { Htlc, Htlc1, HtlcGp };

/** Each adversarial policy deviates at exactly one step; otherwise the node follows the protocol. */
enum class Behavior {
    Honest,
    WithholdPreimage, //!< never passes a resolution upstream
    RefuseForward,    //!< never offers its outgoing payment contract
    RefuseSign,       //!< declines every incoming contract request
    ReverseGrief,     //!< refuses every off-chain termination request
};

enum class Phase { Preprocessing, LockRound1, LockRound2, Release };

enum class FaultKind { AmountShort, WrongHash, LocktimeShort };

/** Tampering with the payment contract offered by path position `position`. */
struct TermsFault {
    std::size_t position{0};
    FaultKind kind{FaultKind::AmountShort};
    Amount amount_short{1};
    Duration locktime_short{1};
};

struct SimulationConfig {
    Duration latency{1};
    std::optional<Duration> receiver_wait; //!< defaults to half the last hop's timelock
    Amount onchain_fee{0};
    std::uint64_t seed{0};
    std::vector<TermsFault> faults;
    std::vector<ChannelId> route; //!< explicit hop channels; looked up in the graph when empty
};

using BehaviorMap = std::map<NodeId, Behavior>;

std::string_view ToString(Protocol protocol);
std::string_view ToString(Behavior behavior);
std::string_view ToString(Phase phase);
std::string_view ToString(FaultKind kind);
Protocol ParseProtocol(std::string_view text);
Behavior ParseBehavior(std::string_view text);
FaultKind ParseFaultKind(std::string_view text);

struct ReceiverSecrets {
    Preimage payment_preimage;
    Preimage cancellation_preimage;
    Rational phi;
};

/** Output of the pre-processing phase; reusable across runs of the same plan. */
struct PreparedPayment {
    PathPlan plan;
    KeyRing keys;
    Digest payment_hash;
    Digest cancellation_hash;
    ReceiverSecrets secrets;
    TimePoint epoch; //!< absolute origin of every hop timelock
    std::vector<HopPayload> payloads;
    OnionPacket onion;
    /** layers[i] is what path[i+1] recovers from the untampered onion; saves repeat decryption. */
    std::vector<PeeledLayer> layers;
};

PreparedPayment Preprocess(const PathPlan& plan, const KeyRing& keys, std::uint64_t seed,
                           Duration latency = Duration{1});

struct TraceEvent {
    TimePoint time;
    Phase phase{Phase::Preprocessing};
    NodeId actor;
    std::string action;
    std::optional<ChannelId> channel;
    std::optional<ContractKind> kind;
    std::optional<Amount> amount;
};

nlohmann::json ToJson(const TraceEvent& event);

enum class OutcomeKind { Success, Cancelled, Griefed, Aborted };
std::string_view ToString(OutcomeKind kind);

struct SettlementLedger {
    std::vector<SignedMsat> position_delta;    //!< by path position
    std::vector<Amount> position_compensation; //!< penalties received, by path position
    std::map<NodeId, SignedMsat> delta;
    std::map<NodeId, Amount> compensation;
    std::map<ChannelId, Duration> lockup;
    Duration elapsed;
    Amount onchain_fees;
};

struct PaymentOutcome {
    OutcomeKind kind{OutcomeKind::Cancelled};
    std::optional<std::size_t> griefer;   //!< path position blamed for an expiry
    std::optional<Phase> aborted_phase;
    std::optional<std::size_t> aborted_at;
    SettlementLedger ledger;
    std::vector<TraceEvent> trace;
    std::vector<ContractEvent> contract_log;
    /** Hops whose penalty went to the upstream node, by expiry or by compensated termination. */
    std::vector<std::size_t> penalty_paid_hops;
    /** Hops on which a contract was claimed by timeout. */
    std::vector<std::size_t> timed_out_hops;
    /** Hops whose payment contract settled with the payment preimage. */
    std::vector<std::size_t> paid_hops;
    /** Hops on which a penalty-bearing contract was ever formed. */
    std::vector<std::size_t> penalty_hops;
};

nlohmann::json ToJson(const SettlementLedger& ledger, const std::vector<NodeId>& path);
nlohmann::json OutcomeSummary(const PaymentOutcome& outcome);

/** Called after every processed event with the event's trace entries appended. */
using EventObserver = std::function<void(const NetworkGraph&, TimePoint)>;

/**
 * One payment over one graph. The three Run* calls stop at phase boundaries
 * of a single event queue, so calling them in sequence or calling Finish()
 * directly produces the same trace.
 */
class PaymentSession
{
public:
    PaymentSession(NetworkGraph& graph, const PreparedPayment& prepared, const BehaviorMap& behaviors,
                   Protocol protocol, const SimulationConfig& config, EventObserver observer = {});
    ~PaymentSession();
    PaymentSession(const PaymentSession&) = delete;
    PaymentSession& operator=(const PaymentSession&) = delete;

    void RunLockingRound1();
    void RunLockingRound2();
    void RunRelease();
    PaymentOutcome Finish();

private:
    struct Impl;
    std::unique_ptr<Impl> m_impl;
};

PaymentOutcome ExecutePrepared(NetworkGraph& graph, const PreparedPayment& prepared, const BehaviorMap& behaviors,
                               Protocol protocol, const SimulationConfig& config = {}, EventObserver observer = {});

/** Preprocess with keys derived from config.seed, then run to completion. */
PaymentOutcome ExecutePayment(NetworkGraph& graph, const PathPlan& plan, const BehaviorMap& behaviors,
                              Protocol protocol, const SimulationConfig& config = {}, EventObserver observer = {});

} // namespace htlcgp

#endif // HTLCGP_PROTOCOL_H
