// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <htlcgp/error.h>
#include <htlcgp/protocol.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <queue>
#include <set>
#include <tuple>

namespace htlcgp {

std::string_view ToString(Protocol protocol)
{
    switch (protocol) {
    case Protocol::Htlc: return "htlc";
    case Protocol::Htlc1: return "htlc1";
    case Protocol::HtlcGp: return "htlc-gp";
    }
    return "?";
}

std::string_view ToString(Behavior behavior)
{
    switch (behavior) {
    case Behavior::Honest: return "honest";
    case Behavior::WithholdPreimage: return "withhold_preimage";
    case Behavior::RefuseForward: return "refuse_forward";
    case Behavior::RefuseSign: return "refuse_sign";
    case Behavior::ReverseGrief: return "reverse_grief";
    }
    return "?";
}

std::string_view ToString(Phase phase)
{
    switch (phase) {
    case Phase::Preprocessing: return "preprocessing";
    case Phase::LockRound1: return "lock_round1";
    case Phase::LockRound2: return "lock_round2";
    case Phase::Release: return "release";
    }
    return "?";
}

std::string_view ToString(FaultKind kind)
{
    switch (kind) {
    case FaultKind::AmountShort: return "amount_short";
    case FaultKind::WrongHash: return "wrong_hash";
    case FaultKind::LocktimeShort: return "locktime_short";
    }
    return "?";
}

std::string_view ToString(OutcomeKind kind)
{
    switch (kind) {
    case OutcomeKind::Success: return "success";
    case OutcomeKind::Cancelled: return "cancelled";
    case OutcomeKind::Griefed: return "griefed";
    case OutcomeKind::Aborted: return "aborted";
    }
    return "?";
}

Protocol ParseProtocol(std::string_view text)
{
    if (text == "htlc") return Protocol::Htlc;
    if (text == "htlc1" || text == "htlc1.0") return Protocol::Htlc1;
    if (text == "htlc-gp" || text == "htlcgp" || text == "htlc_gp") return Protocol::HtlcGp;
    throw Error(ErrorCode::ParseError, "unknown protocol '" + std::string{text} + "' (htlc, htlc1, htlc-gp)");
}

Behavior ParseBehavior(std::string_view text)
{
    for (Behavior b : {Behavior::Honest, Behavior::WithholdPreimage, Behavior::RefuseForward, Behavior::RefuseSign,
                       Behavior::ReverseGrief}) {
        if (text == ToString(b)) return b;
    }
    throw Error(ErrorCode::ParseError, "unknown behavior '" + std::string{text} + "'");
}

FaultKind ParseFaultKind(std::string_view text)
{
    for (FaultKind k : {FaultKind::AmountShort, FaultKind::WrongHash, FaultKind::LocktimeShort}) {
        if (text == ToString(k)) return k;
    }
    throw Error(ErrorCode::ParseError, "unknown fault '" + std::string{text} + "'");
}

PreparedPayment Preprocess(const PathPlan& plan, const KeyRing& keys, std::uint64_t seed, Duration latency)
{
    const std::size_t n = plan.Hops();
    PreparedPayment prep;
    prep.plan = plan;
    prep.keys = keys;
    prep.secrets.payment_preimage = Preimage{DeriveBytes(seed, "preimage:x")};
    prep.secrets.cancellation_preimage = Preimage{DeriveBytes(seed, "preimage:r")};
    if (prep.secrets.payment_preimage == prep.secrets.cancellation_preimage) {
        throw Error(ErrorCode::CryptoFailure, "derived preimages collide");
    }
    prep.secrets.phi = plan.phi;
    prep.payment_hash = HashPreimage(prep.secrets.payment_preimage);
    prep.cancellation_hash = HashPreimage(prep.secrets.cancellation_preimage);
    // Leaves room for the onion pass and both locking rounds before any timelock starts.
    prep.epoch = TimePoint{0} + latency * static_cast<std::int64_t>(3 * n + 2);

    std::vector<Bytes32> pks;
    for (std::size_t i = 1; i <= n; ++i) {
        HopPayload z;
        z.payment_hash = prep.payment_hash;
        z.cancellation_hash = prep.cancellation_hash;
        z.amount = plan.amounts[i < n ? i : n - 1];
        z.locktime = prep.epoch + plan.timelocks[i - 1];
        z.penalty = plan.tgp[i - 1];
        if (i < n) z.next_hop = plan.path[i + 1];
        z.epoch = prep.epoch;
        prep.payloads.push_back(z);
        pks.push_back(keys.Get(plan.path[i]).public_key);
    }
    prep.onion = BuildOnion(prep.payloads, pks, plan.phi, seed);
    const OnionPacket* packet = &prep.onion;
    for (std::size_t i = 1; i <= n; ++i) {
        auto layer = PeelOnion(*packet, keys.Get(plan.path[i]));
        if (!layer) throw Error(ErrorCode::CryptoFailure, "onion layer " + std::to_string(i) + " does not open");
        prep.layers.push_back(std::move(*layer));
        if (i < n) packet = &*prep.layers.back().inner;
    }
    return prep;
}

nlohmann::json ToJson(const TraceEvent& event)
{
    nlohmann::json j;
    j["time_min"] = event.time.Minute();
    j["phase"] = ToString(event.phase);
    j["actor"] = event.actor.Str();
    j["action"] = event.action;
    j["channel"] = event.channel ? nlohmann::json(event.channel->Str()) : nlohmann::json(nullptr);
    j["contract_kind"] = event.kind ? nlohmann::json(ToString(*event.kind)) : nlohmann::json(nullptr);
    j["amount_msat"] = event.amount ? nlohmann::json(event.amount->Msat()) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json ToJson(const SettlementLedger& ledger, const std::vector<NodeId>& path)
{
    nlohmann::json j;
    auto& positions = j["positions"] = nlohmann::json::array();
    for (std::size_t i = 0; i < ledger.position_delta.size(); ++i) {
        positions.push_back({{"position", i},
                             {"node", path.at(i).Str()},
                             {"delta_msat", ledger.position_delta[i]},
                             {"compensation_msat", ledger.position_compensation[i].Msat()}});
    }
    auto& nodes = j["nodes"] = nlohmann::json::object();
    for (const auto& [node, delta] : ledger.delta) {
        nodes[node.Str()] = {{"delta_msat", delta}, {"compensation_msat", ledger.compensation.at(node).Msat()}};
    }
    auto& lockup = j["lockup_min"] = nlohmann::json::object();
    for (const auto& [channel, d] : ledger.lockup) lockup[channel.Str()] = d.Minutes();
    j["elapsed_min"] = ledger.elapsed.Minutes();
    j["onchain_fees_msat"] = ledger.onchain_fees.Msat();
    return j;
}

nlohmann::json OutcomeSummary(const PaymentOutcome& outcome)
{
    nlohmann::json j;
    j["kind"] = ToString(outcome.kind);
    j["griefer_position"] = outcome.griefer ? nlohmann::json(*outcome.griefer) : nlohmann::json(nullptr);
    j["aborted_phase"] = outcome.aborted_phase ? nlohmann::json(ToString(*outcome.aborted_phase))
                                               : nlohmann::json(nullptr);
    j["aborted_at"] = outcome.aborted_at ? nlohmann::json(*outcome.aborted_at) : nlohmann::json(nullptr);
    j["penalty_paid_hops"] = outcome.penalty_paid_hops;
    j["timed_out_hops"] = outcome.timed_out_hops;
    j["paid_hops"] = outcome.paid_hops;
    return j;
}

namespace {

enum class Resolution { Payment, Cancel };

struct PaymentTerms {
    Amount amount;
    TimePoint locktime;
    Digest payment_hash;
    Digest cancellation_hash;
};

struct CancelTerms {
    TimePoint locktime;
    Amount tgp;
    Digest payment_hash;
    Digest cancellation_hash;
};

struct Event {
    TimePoint time;
    std::uint64_t seq;
    std::function<void()> action;
};

struct LaterFirst {
    bool operator()(const Event& a, const Event& b) const
    {
        return std::tuple{a.time, a.seq} > std::tuple{b.time, b.seq};
    }
};

} // namespace

struct PaymentSession::Impl {
    struct NodeState {
        std::optional<PeeledLayer> layer;
        std::optional<Resolution> known;
        std::optional<PaymentTerms> incoming;
        std::optional<TimePoint> outgoing_locktime; //!< set by the downstream cancellation request
    };
    struct HopState {
        std::optional<ContractId> cancel;
        std::optional<ContractId> payment;
        std::optional<TimePoint> first_lock;
        std::optional<TimePoint> last_release;
        bool refused{false}; //!< upstream node refused an off-chain termination
    };

    NetworkGraph& graph;
    const PreparedPayment& prep;
    const PathPlan& plan;
    Protocol protocol;
    SimulationConfig config;
    EventObserver observer;

    std::size_t n;
    std::vector<ChannelId> channels;
    std::vector<Behavior> behavior;
    std::vector<NodeState> nodes;
    std::vector<HopState> hops;
    std::map<ContractId, Contract> contracts;
    ContractId next_contract{1};

    std::priority_queue<Event, std::vector<Event>, LaterFirst> queue;
    std::uint64_t next_seq{0};
    TimePoint now{0};
    Phase phase{Phase::Preprocessing};

    std::optional<TimePoint> formed_at; //!< receiver's cancellation contract formed
    Duration wait;
    bool decided{false};
    bool round1_done{false};
    bool round2_done{false};
    std::optional<Phase> abort_phase;
    std::optional<std::size_t> abort_at;

    std::vector<TraceEvent> trace;
    std::vector<ContractEvent> contract_log;
    std::vector<std::pair<Amount, Amount>> initial;
    std::vector<Amount> compensation;
    Amount burned{0};
    std::set<std::size_t> penalty_hops;
    std::vector<std::size_t> penalty_paid_hops;
    std::vector<std::size_t> timed_out_hops;
    std::vector<std::size_t> paid_hops;

    Impl(NetworkGraph& g, const PreparedPayment& p, const BehaviorMap& behaviors, Protocol proto,
         const SimulationConfig& cfg, EventObserver obs)
        : graph{g}, prep{p}, plan{p.plan}, protocol{proto}, config{cfg}, observer{std::move(obs)}, n{p.plan.Hops()}
    {
        if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty path");
        if (config.latency <= Duration{0}) throw Error(ErrorCode::InvalidArgument, "latency must be positive");
        wait = config.receiver_wait.value_or(Duration{plan.timelocks.back().Minutes() / 2});
        if (wait > plan.timelocks.back()) {
            throw Error(ErrorCode::InvalidArgument, "receiver wait exceeds the last hop timelock");
        }
        ResolveRoute();
        for (std::size_t i = 0; i <= n; ++i) {
            const auto it = behaviors.find(plan.path[i]);
            behavior.push_back(it == behaviors.end() ? Behavior::Honest : it->second);
        }
        nodes.resize(n + 1);
        hops.resize(n);
        compensation.assign(n + 1, Amount{0});
        for (std::size_t h = 0; h < n; ++h) {
            const Channel& ch = Ch(h);
            if (ch.Remain(plan.path[h]) < plan.amounts[h]) {
                throw Error(ErrorCode::PlanInfeasible, "hop " + std::to_string(h) + " (" + ch.Id().Str() +
                                                           ") cannot carry " +
                                                           std::to_string(plan.amounts[h].Msat()) + " msat");
            }
            initial.emplace_back(ch.Remain(plan.path[h]), ch.Remain(plan.path[h + 1]));
        }
        Start();
    }

    void ResolveRoute()
    {
        if (!config.route.empty()) {
            if (config.route.size() != n) throw Error(ErrorCode::InvalidArgument, "route length mismatch");
            channels = config.route;
        } else {
            for (std::size_t h = 0; h < n; ++h) {
                const auto id = graph.FindChannel(plan.path[h], plan.path[h + 1]);
                if (!id) {
                    throw Error(ErrorCode::PlanInfeasible, "no open channel " + plan.path[h].Str() + " -> " +
                                                               plan.path[h + 1].Str());
                }
                channels.push_back(*id);
            }
        }
        std::set<ChannelId> seen;
        for (std::size_t h = 0; h < n; ++h) {
            const Channel& ch = graph.GetChannel(channels[h]);
            if (!ch.HasEndpoint(plan.path[h]) || ch.Other(plan.path[h]) != plan.path[h + 1]) {
                throw Error(ErrorCode::PlanInfeasible, "channel " + ch.Id().Str() + " does not join hop " +
                                                           std::to_string(h));
            }
            if (!seen.insert(channels[h]).second) {
                throw Error(ErrorCode::InvalidArgument, "route reuses channel " + channels[h].Str());
            }
        }
    }

    // ---- plumbing

    std::optional<PeeledLayer> Peel(std::size_t pos, const OnionPacket& packet) const
    {
        if (pos >= 1 && pos <= prep.layers.size()) {
            const OnionPacket& expected = pos == 1 ? prep.onion : *prep.layers[pos - 2].inner;
            if (packet.bytes == expected.bytes) return prep.layers[pos - 1];
        }
        return PeelOnion(packet, prep.keys.Get(Node(pos)));
    }

    Channel& Ch(std::size_t hop) { return graph.GetChannel(channels[hop]); }
    const NodeId& Node(std::size_t pos) const { return plan.path[pos]; }
    const HopPayload& Z(std::size_t pos) const { return nodes[pos].layer->payload; }
    bool IsGp() const { return protocol == Protocol::HtlcGp; }

    void At(TimePoint t, std::function<void()> action)
    {
        queue.push(Event{t, next_seq++, std::move(action)});
    }
    void Send(std::function<void()> action) { At(now + config.latency, std::move(action)); }

    void Log(std::size_t pos, std::string action, std::optional<std::size_t> hop = std::nullopt,
             std::optional<ContractKind> kind = std::nullopt, std::optional<Amount> amount = std::nullopt)
    {
        TraceEvent ev{now, phase, Node(pos), std::move(action), std::nullopt, kind, amount};
        if (hop) ev.channel = channels[*hop];
        trace.push_back(std::move(ev));
    }

    void Abort(Phase at_phase, std::size_t pos, const std::string& reason)
    {
        Log(pos, "abort:" + reason);
        if (!abort_phase) {
            abort_phase = at_phase;
            abort_at = pos;
        }
    }

    bool Step()
    {
        if (queue.empty()) return false;
        Event ev = queue.top();
        queue.pop();
        now = ev.time;
        ev.action();
        if (observer) observer(graph, now);
        return true;
    }

    template <typename Pred>
    void Pump(Pred done)
    {
        while (!done() && Step()) {
        }
    }

    std::vector<ContractId> Live(std::size_t hop) const
    {
        std::vector<ContractId> out;
        for (const auto& id : {hops[hop].cancel, hops[hop].payment}) {
            if (id && contracts.at(*id).IsLive()) out.push_back(*id);
        }
        return out;
    }

    std::optional<ContractId> Form(std::size_t hop, ContractKind kind, Amount amount, Amount penalty,
                                   const Digest& h, std::optional<Digest> y, TimePoint locktime)
    {
        Channel& ch = Ch(hop);
        if (ch.IsClosed()) return std::nullopt;
        // Cancellation contracts are funded by the downstream end of the hop.
        const bool reverse = kind == ContractKind::GpCancellation;
        ContractTerms terms{kind,     ch.Id(), reverse ? Node(hop + 1) : Node(hop), reverse ? Node(hop) : Node(hop + 1),
                            amount,   penalty, h,                                   y,
                            locktime};
        const ContractId id = next_contract++;
        std::optional<Contract> contract;
        try {
            contract = Contract::Propose(id, std::move(terms), now);
            ch.ApplyLock(id, contract->Terms().payer, amount);
        } catch (const Error&) {
            return std::nullopt;
        }
        if (kind == ContractKind::Htlc1) {
            try {
                ch.ApplyLock(id, contract->Terms().payee, contract->Terms().penalty);
            } catch (const Error&) {
                ch.RefundLock(id);
                return std::nullopt;
            }
        }
        contract->Accept();
        contract_log.push_back(ContractEvent{now, ch.Id(), kind, "accepted", std::nullopt, contract->Locked()});
        contracts.emplace(id, *contract);
        (reverse ? hops[hop].cancel : hops[hop].payment) = id;
        if (!hops[hop].first_lock) hops[hop].first_lock = now;
        if (kind == ContractKind::GpCancellation || kind == ContractKind::Htlc1) penalty_hops.insert(hop);
        At(locktime, [this, id] { OnTimeout(id); });
        return id;
    }

    std::size_t HopOf(const Contract& c) const
    {
        for (std::size_t h = 0; h < n; ++h) {
            if (channels[h] == c.Terms().channel) return h;
        }
        throw Error(ErrorCode::UnknownChannel, c.Terms().channel.Str());
    }

    void Settle(ContractId id, const Witness& witness, SettlementMode mode)
    {
        Contract& c = contracts.at(id);
        const std::size_t hop = HopOf(c);
        const SettlementOutcome outcome = Resolve(c, witness, now);
        Channel& ch = Ch(hop);
        const Amount fee = mode == SettlementMode::OnChain ? std::min(config.onchain_fee, outcome.Total()) : Amount{0};
        ch.Distribute(id, outcome.credits, fee);
        graph.AddBurned(fee);
        burned += fee;
        c.Finish(outcome);
        if (mode == SettlementMode::OnChain) ch.MarkClosed();
        hops[hop].last_release = now;
        if (c.Kind() != ContractKind::GpCancellation && outcome.status == ContractStatus::SettledPayment) {
            paid_hops.push_back(hop);
        }

        for (const Credit& credit : outcome.credits) {
            const std::size_t pos = credit.party == Node(hop) ? hop : hop + 1;
            contract_log.push_back(
                ContractEvent{now, ch.Id(), c.Kind(), std::string{ToString(outcome.status)}, credit.party, credit.amount, mode});
            Log(pos, std::string{mode == SettlementMode::OnChain ? "claim_onchain:" : "settle:"} +
                         std::string{ToString(outcome.status)},
                hop, c.Kind(), credit.amount);
        }
        // Penalty that ends up with the upstream node of the hop.
        Amount penalty_to_upstream{0};
        if (c.Kind() == ContractKind::GpCancellation && outcome.credits.front().party == Node(hop)) {
            penalty_to_upstream = outcome.Total();
        } else if (c.Kind() == ContractKind::Htlc1) {
            for (const Credit& credit : outcome.credits) {
                if (credit.party == Node(hop) && credit.amount > c.Terms().amount) {
                    penalty_to_upstream = credit.amount - c.Terms().amount;
                }
            }
        }
        if (penalty_to_upstream > Amount{0} ||
            (c.Kind() == ContractKind::GpCancellation && outcome.credits.front().party == Node(hop))) {
            compensation[hop] += penalty_to_upstream;
            penalty_paid_hops.push_back(hop);
        }
    }

    // ---- phases

    void Start()
    {
        if (IsGp()) {
            At(TimePoint{0}, [this] {
                phase = Phase::Preprocessing;
                Log(0, "send_onion", 0);
                Send([this, packet = prep.onion] { OnOnion(1, packet); });
            });
        } else {
            round1_done = true;
            At(TimePoint{0}, [this] { StartPaymentForward(0); });
        }
    }

    void OnOnion(std::size_t pos, const OnionPacket& packet)
    {
        phase = Phase::Preprocessing;
        auto layer = Peel(pos, packet);
        if (!layer) return Abort(Phase::Preprocessing, pos, "onion_rejected");
        nodes[pos].layer = std::move(layer);
        Log(pos, "peel_onion");
        if (pos < n) {
            if (!nodes[pos].layer->inner) return Abort(Phase::Preprocessing, pos, "onion_truncated");
            Log(pos, "forward_onion", pos);
            Send([this, pos, inner = *nodes[pos].layer->inner] { OnOnion(pos + 1, inner); });
        } else {
            ReceiverRound1();
        }
    }

    void ReceiverRound1()
    {
        phase = Phase::LockRound1;
        const HopPayload& z = Z(n);
        const Duration t_last = z.locktime - z.epoch;
        std::string reason;
        if (z.locktime < now + plan.delta) {
            reason = "locktime_too_close";
        } else if (z.amount != plan.alpha) {
            reason = "amount_mismatch";
        } else if (!VerifyReceiverTgp(plan.gamma, prep.secrets.phi, plan.alpha, t_last, z.penalty)) {
            reason = "penalty_mismatch";
        } else if (z.payment_hash != prep.payment_hash || z.cancellation_hash != prep.cancellation_hash) {
            reason = "hash_mismatch";
        } else if (Ch(n - 1).Remain(Node(n)) < z.penalty) {
            reason = "insufficient_balance";
        }
        if (!reason.empty()) return Abort(Phase::LockRound1, n, reason);
        Log(n, "request_cancellation", n - 1, ContractKind::GpCancellation, z.penalty);
        Send([this, req = CancelTerms{z.locktime, z.penalty, z.payment_hash, z.cancellation_hash}] {
            OnCancelRequest(n - 1, req);
        });
    }

    std::string CheckCancelRequest(std::size_t pos, const CancelTerms& req)
    {
        if (req.locktime <= now + plan.delta) return "locktime_too_close";
        if (pos == 0) {
            if (req.locktime != prep.epoch + plan.timelocks[0]) return "locktime_mismatch";
            if (req.tgp != plan.tgp[0]) return "penalty_mismatch";
            if (req.payment_hash != prep.payment_hash || req.cancellation_hash != prep.cancellation_hash) {
                return "hash_mismatch";
            }
            if (Ch(0).Remain(Node(0)) < plan.amounts[0]) return "insufficient_balance";
            return {};
        }
        if (!nodes[pos].layer) return "no_onion";
        const HopPayload& z = Z(pos);
        if (req.payment_hash != z.payment_hash || req.cancellation_hash != z.cancellation_hash) return "hash_mismatch";
        if (req.locktime + plan.delta > z.locktime) return "locktime_too_close";
        if (!VerifyIncomingTgp(req.tgp, z.amount, req.locktime - z.epoch, plan.gamma, z.penalty)) {
            return "penalty_mismatch";
        }
        if (Ch(pos).Remain(Node(pos)) < z.amount) return "insufficient_balance";
        if (Ch(pos - 1).Remain(Node(pos)) < z.penalty) return "insufficient_balance";
        return {};
    }

    void OnCancelRequest(std::size_t pos, const CancelTerms& req)
    {
        phase = Phase::LockRound1;
        if (nodes[pos].known || behavior[pos] == Behavior::RefuseSign) {
            Log(pos, "decline_cancellation", pos, ContractKind::GpCancellation, req.tgp);
            return Send([this, pos] { OnCancelDeclined(pos + 1); });
        }
        if (const std::string reason = CheckCancelRequest(pos, req); !reason.empty()) {
            Abort(Phase::LockRound1, pos, reason);
            return Send([this, pos] { OnCancelDeclined(pos + 1); });
        }
        if (!Form(pos, ContractKind::GpCancellation, req.tgp, Amount{0}, req.payment_hash, req.cancellation_hash,
                  req.locktime)) {
            Abort(Phase::LockRound1, pos + 1, "lock_failed");
            return Send([this, pos] { OnCancelDeclined(pos + 1); });
        }
        nodes[pos].outgoing_locktime = req.locktime;
        Log(pos, "accept_cancellation", pos, ContractKind::GpCancellation, req.tgp);
        Send([this, pos] { OnCancelAck(pos + 1); });
        if (pos > 0) {
            const HopPayload& z = Z(pos);
            Log(pos, "request_cancellation", pos - 1, ContractKind::GpCancellation, z.penalty);
            Send([this, pos, up = CancelTerms{z.locktime, z.penalty, z.payment_hash, z.cancellation_hash}] {
                OnCancelRequest(pos - 1, up);
            });
        } else {
            round1_done = true;
            At(now, [this] { StartPaymentForward(0); });
        }
    }

    void OnCancelDeclined(std::size_t pos)
    {
        phase = Phase::LockRound1;
        Log(pos, "cancellation_declined", pos - 1);
        Abort(Phase::LockRound1, pos, "upstream_declined");
    }

    void OnCancelAck(std::size_t pos)
    {
        phase = Phase::LockRound1;
        Log(pos, "cancellation_formed", pos - 1);
        // A late acknowledgement after the receiver already resolved does not re-arm the timer.
        if (pos == n && !formed_at && !decided) {
            formed_at = now;
            At(now + wait, [this] { OnReceiverDeadline(); });
        }
        if (nodes[pos].known) SettleIfResolved(pos - 1);
    }

    void StartPaymentForward(std::size_t pos)
    {
        phase = Phase::LockRound2;
        if (nodes[pos].known) return;
        if (behavior[pos] == Behavior::RefuseForward) {
            Log(pos, "refuse_forward", pos);
            if (!IsGp() && pos > 0) {
                // Baseline nodes simply sit on the incoming contract.
            }
            return Abort(Phase::LockRound2, pos, "refused_forward");
        }
        PaymentTerms out;
        out.payment_hash = prep.payment_hash;
        out.cancellation_hash = prep.cancellation_hash;
        if (pos == 0) {
            out.amount = plan.amounts[0];
            out.locktime = IsGp() && nodes[0].outgoing_locktime ? *nodes[0].outgoing_locktime
                                                                 : prep.epoch + plan.timelocks[0];
        } else {
            const HopPayload& z = Z(pos);
            out.amount = z.amount;
            out.locktime = IsGp() ? nodes[pos].outgoing_locktime.value_or(TimePoint{0})
                                  : nodes[pos].incoming->locktime - plan.delta;
        }
        std::string reason;
        if (IsGp() && pos > 0 && !nodes[pos].outgoing_locktime) reason = "no_cancellation_contract";
        if (reason.empty() && out.locktime <= now + plan.delta) reason = "locktime_too_close";
        if (reason.empty() && Ch(pos).Remain(Node(pos)) < out.amount) reason = "insufficient_balance";
        if (!reason.empty()) {
            Abort(Phase::LockRound2, pos, reason);
            if (!IsGp() && pos > 0) FailBack(pos);
            return;
        }
        for (const TermsFault& f : config.faults) {
            if (f.position != pos) continue;
            switch (f.kind) {
            case FaultKind::AmountShort: out.amount = out.amount - std::min(out.amount, f.amount_short); break;
            case FaultKind::WrongHash: out.payment_hash.bytes[0] ^= 0x01; break;
            case FaultKind::LocktimeShort: out.locktime = out.locktime - f.locktime_short; break;
            }
            Log(pos, std::string{"tamper:"} + std::string{ToString(f.kind)}, pos);
        }
        const ContractKind kind = IsGp() ? ContractKind::GpPayment
                                         : (protocol == Protocol::Htlc1 ? ContractKind::Htlc1 : ContractKind::Htlc);
        Log(pos, "offer_payment", pos, kind, out.amount);
        std::optional<OnionPacket> packet;
        if (!IsGp()) packet = pos == 0 ? prep.onion : *nodes[pos].layer->inner;
        Send([this, pos, out, packet] { OnPaymentRequest(pos + 1, out, packet); });
    }

    std::string CheckIncomingGp(std::size_t pos, const PaymentTerms& in)
    {
        const HopPayload& z = Z(pos);
        if (in.payment_hash != z.payment_hash || in.cancellation_hash != z.cancellation_hash) return "hash_mismatch";
        if (!nodes[pos].outgoing_locktime) return "no_cancellation_contract";
        if (in.locktime < *nodes[pos].outgoing_locktime + plan.delta) return "locktime_too_close";
        if (in.amount != z.amount + plan.fees[pos - 1]) return "fee_mismatch";
        return {};
    }

    std::string CheckIncomingBaseline(std::size_t pos, const PaymentTerms& in)
    {
        const HopPayload& z = Z(pos);
        if (pos == n) {
            if (in.amount != plan.alpha) return "amount_mismatch";
            if (in.payment_hash != prep.payment_hash) return "hash_mismatch";
            if (in.locktime != z.locktime || in.locktime < now + plan.delta) return "locktime_too_close";
            return {};
        }
        if (in.amount != z.amount + plan.fees[pos - 1]) return "fee_mismatch";
        if (in.locktime != z.locktime) return "locktime_mismatch";
        return {};
    }

    void OnPaymentRequest(std::size_t pos, const PaymentTerms& in, const std::optional<OnionPacket>& packet)
    {
        phase = Phase::LockRound2;
        const std::size_t hop = pos - 1;
        const auto decline = [&](const std::string& what) {
            Log(pos, what, hop);
            Send([this, hop] { OnPaymentDeclined(hop); });
        };
        if (nodes[pos].known || behavior[pos] == Behavior::RefuseSign) return decline("decline_payment");

        if (IsGp()) {
            if (pos < n) {
                if (const std::string reason = CheckIncomingGp(pos, in); !reason.empty()) {
                    Abort(Phase::LockRound2, pos, reason);
                    return decline("reject_payment");
                }
            }
            if (!Form(hop, ContractKind::GpPayment, in.amount, Amount{0}, in.payment_hash, in.cancellation_hash,
                      in.locktime)) {
                Abort(Phase::LockRound2, pos, "lock_failed");
                return decline("reject_payment");
            }
            nodes[pos].incoming = in;
            Log(pos, "accept_payment", hop, ContractKind::GpPayment, in.amount);
            if (pos < n) return StartPaymentForward(pos);
            round2_done = true;
            if (!decided && formed_at && now - *formed_at <= wait) ReceiverDecide();
            return;
        }

        // Baselines take the contract first and validate it afterwards.
        auto layer = packet ? Peel(pos, *packet) : std::nullopt;
        if (!layer) {
            Abort(Phase::LockRound2, pos, "onion_rejected");
            return decline("reject_payment");
        }
        nodes[pos].layer = std::move(layer);
        const ContractKind kind = protocol == Protocol::Htlc1 ? ContractKind::Htlc1 : ContractKind::Htlc;
        const Amount deposit = kind == ContractKind::Htlc1 ? Z(pos).penalty : Amount{0};
        if (!Form(hop, kind, in.amount, deposit, in.payment_hash, std::nullopt, in.locktime)) {
            Abort(Phase::LockRound2, pos, "lock_failed");
            return decline("reject_payment");
        }
        nodes[pos].incoming = in;
        Log(pos, "accept_payment", hop, kind, in.amount);
        if (const std::string reason = CheckIncomingBaseline(pos, in); !reason.empty()) {
            Abort(Phase::LockRound2, pos, reason);
            return FailBack(pos);
        }
        if (pos < n) return StartPaymentForward(pos);
        round2_done = true;
        ReceiverDecide();
    }

    void OnPaymentDeclined(std::size_t hop)
    {
        phase = Phase::LockRound2;
        Log(hop, "payment_declined", hop);
        Abort(Phase::LockRound2, hop, "downstream_declined");
        if (!IsGp() && hop > 0) FailBack(hop);
    }

    /** Baseline failure: the node gives up on the payment and fails its incoming contract. */
    void FailBack(std::size_t pos)
    {
        if (nodes[pos].known) return;
        nodes[pos].known = Resolution::Cancel;
        Log(pos, "fail_payment");
        PassUpstream(pos);
    }

    void OnReceiverDeadline()
    {
        if (!decided) ReceiverDecide();
    }

    void ReceiverDecide()
    {
        phase = Phase::Release;
        decided = true;
        Resolution z = Resolution::Cancel;
        if (const auto& in = nodes[n].incoming) {
            if (IsGp()) {
                const bool valid = in->amount == plan.alpha && in->locktime >= now + plan.delta &&
                                   in->payment_hash == prep.payment_hash &&
                                   in->cancellation_hash == prep.cancellation_hash;
                if (valid && formed_at && now - *formed_at <= wait) z = Resolution::Payment;
            } else {
                z = Resolution::Payment;
            }
        }
        nodes[n].known = z;
        Log(n, z == Resolution::Payment ? "choose_payment_preimage" : "choose_cancellation_preimage");
        if (behavior[n] == Behavior::WithholdPreimage) return Log(n, "withhold");
        PassUpstream(n);
    }

    void PassUpstream(std::size_t pos)
    {
        if (pos == 0) return;
        const std::size_t hop = pos - 1;
        if (Live(hop).empty() && !hops[hop].cancel && !hops[hop].payment) return;
        Log(pos, nodes[pos].known == Resolution::Payment ? "release_payment" : "release_cancellation", hop);
        Send([this, hop] { SettleHop(hop); });
    }

    /** Downstream end of `hop` knows the resolution; settle with the upstream end. */
    void SettleHop(std::size_t hop)
    {
        phase = Phase::Release;
        const Resolution z = *nodes[hop + 1].known;
        const bool preimage = IsGp() || z == Resolution::Payment;
        bool settled_any = false;
        bool refused = false;
        for (ContractId id : Live(hop)) {
            if (now >= contracts.at(id).Terms().locktime) continue;
            Witness w;
            if (z == Resolution::Payment) {
                w = PreimageX{prep.secrets.payment_preimage};
            } else if (IsGp()) {
                w = PreimageR{prep.secrets.cancellation_preimage};
            } else {
                w = MutualTermination{Amount{0}};
            }
            SettlementMode mode = SettlementMode::OffChain;
            if (behavior[hop] == Behavior::ReverseGrief) {
                if (!refused) Log(hop, "refuse_termination", hop);
                refused = true;
                hops[hop].refused = true;
                if (!preimage) continue;
                mode = SettlementMode::OnChain;
            }
            Settle(id, w, mode);
            settled_any = true;
        }
        // Even a refused fail message tells the upstream node the payment is dead.
        if (settled_any || refused || preimage) OnResolutionLearned(hop, z);
    }

    void SettleIfResolved(std::size_t hop)
    {
        if (nodes[hop + 1].known && !Live(hop).empty()) Send([this, hop] { SettleHop(hop); });
    }

    void OnResolutionLearned(std::size_t pos, Resolution z)
    {
        if (nodes[pos].known) return;
        nodes[pos].known = z;
        Log(pos, z == Resolution::Payment ? "learn_payment_preimage" : "learn_cancellation");
        if (pos == 0) return;
        if (behavior[pos] == Behavior::WithholdPreimage) return Log(pos, "withhold");
        PassUpstream(pos);
    }

    void OnTimeout(ContractId id)
    {
        Contract& c = contracts.at(id);
        if (!c.IsLive()) return;
        phase = Phase::Release;
        const std::size_t hop = HopOf(c);
        Settle(id, TimeoutClaim{}, SettlementMode::OnChain);
        if (std::find(timed_out_hops.begin(), timed_out_hops.end(), hop) == timed_out_hops.end()) {
            timed_out_hops.push_back(hop);
        }
        if (c.Kind() == ContractKind::GpCancellation || c.Kind() == ContractKind::Htlc1) OnPenaltyReceived(hop);
    }

    /** Node `pos` was paid the penalty of its downstream hop; pass compensation upstream. */
    void OnPenaltyReceived(std::size_t pos)
    {
        if (!nodes[pos].known) nodes[pos].known = Resolution::Cancel;
        if (pos == 0 || behavior[pos] == Behavior::WithholdPreimage) return;
        const std::size_t hop = pos - 1;
        const auto live = Live(hop);
        if (live.empty()) return;
        Amount owed{0};
        for (ContractId id : live) {
            const Contract& c = contracts.at(id);
            if (c.Kind() == ContractKind::GpCancellation) owed = c.Terms().amount;
            if (c.Kind() == ContractKind::Htlc1) owed = c.Terms().penalty;
        }
        if (protocol == Protocol::Htlc) return;
        Log(pos, "offer_compensation", hop, std::nullopt, owed);
        Send([this, hop, owed] { OnCompensationOffer(hop, owed); });
    }

    void OnCompensationOffer(std::size_t hop, Amount owed)
    {
        phase = Phase::Release;
        std::vector<ContractId> live;
        for (ContractId id : Live(hop)) {
            if (now < contracts.at(id).Terms().locktime) live.push_back(id);
        }
        if (live.empty()) return;
        if (behavior[hop] == Behavior::ReverseGrief) {
            Log(hop, "refuse_termination", hop);
            hops[hop].refused = true;
            return;
        }
        for (ContractId id : live) {
            const bool carries = contracts.at(id).Kind() != ContractKind::GpPayment;
            Settle(id, MutualTermination{carries ? owed : Amount{0}}, SettlementMode::OffChain);
        }
        Log(hop, "accept_compensation", hop, std::nullopt, owed);
        OnPenaltyReceived(hop);
    }

    // ---- results

    PaymentOutcome Collect()
    {
        PaymentOutcome out;
        SettlementLedger& ledger = out.ledger;
        ledger.position_delta.assign(n + 1, 0);
        for (std::size_t h = 0; h < n; ++h) {
            const Channel& ch = Ch(h);
            ledger.position_delta[h] += Diff(ch.Remain(Node(h)), initial[h].first);
            ledger.position_delta[h + 1] += Diff(ch.Remain(Node(h + 1)), initial[h].second);
            if (hops[h].first_lock) {
                ledger.lockup[channels[h]] = hops[h].last_release.value_or(now) - *hops[h].first_lock;
            }
        }
        ledger.position_compensation = compensation;
        for (std::size_t i = 0; i <= n; ++i) {
            ledger.delta[Node(i)] += ledger.position_delta[i];
            ledger.compensation[Node(i)] += compensation[i];
        }
        ledger.elapsed = now - TimePoint{0};
        ledger.onchain_fees = burned;

        out.trace = trace;
        out.contract_log = contract_log;
        out.penalty_paid_hops = penalty_paid_hops;
        out.timed_out_hops = timed_out_hops;
        out.paid_hops = paid_hops;
        out.penalty_hops.assign(penalty_hops.begin(), penalty_hops.end());
        out.aborted_phase = abort_phase;
        out.aborted_at = abort_at;

        const bool paid = hops[0].payment &&
                          contracts.at(*hops[0].payment).Status() == ContractStatus::SettledPayment;
        if (!timed_out_hops.empty()) {
            const std::size_t last = *std::max_element(timed_out_hops.begin(), timed_out_hops.end());
            out.kind = OutcomeKind::Griefed;
            out.griefer = hops[last].refused ? last : last + 1;
        } else if (abort_phase) {
            out.kind = OutcomeKind::Aborted;
        } else if (paid) {
            out.kind = OutcomeKind::Success;
        } else {
            out.kind = OutcomeKind::Cancelled;
        }
        return out;
    }
};

PaymentSession::PaymentSession(NetworkGraph& graph, const PreparedPayment& prepared, const BehaviorMap& behaviors,
                               Protocol protocol, const SimulationConfig& config, EventObserver observer)
    : m_impl{std::make_unique<Impl>(graph, prepared, behaviors, protocol, config, std::move(observer))}
{
}

PaymentSession::~PaymentSession() = default;

void PaymentSession::RunLockingRound1()
{
    m_impl->Pump([this] { return m_impl->round1_done || m_impl->abort_phase.has_value(); });
}

void PaymentSession::RunLockingRound2()
{
    m_impl->Pump([this] { return m_impl->round2_done || m_impl->abort_phase.has_value() || m_impl->decided; });
}

void PaymentSession::RunRelease()
{
    m_impl->Pump([] { return false; });
}

PaymentOutcome PaymentSession::Finish()
{
    RunRelease();
    return m_impl->Collect();
}

PaymentOutcome ExecutePrepared(NetworkGraph& graph, const PreparedPayment& prepared, const BehaviorMap& behaviors,
                               Protocol protocol, const SimulationConfig& config, EventObserver observer)
{
    PaymentSession session{graph, prepared, behaviors, protocol, config, std::move(observer)};
    session.RunLockingRound1();
    session.RunLockingRound2();
    return session.Finish();
}

PaymentOutcome ExecutePayment(NetworkGraph& graph, const PathPlan& plan, const BehaviorMap& behaviors,
                              Protocol protocol, const SimulationConfig& config, EventObserver observer)
{
    const KeyRing keys = KeyRing::Derive(plan.path, config.seed);
    const PreparedPayment prepared = Preprocess(plan, keys, config.seed, config.latency);
    return ExecutePrepared(graph, prepared, behaviors, protocol, config, std::move(observer));
}

} // namespace htlcgp
