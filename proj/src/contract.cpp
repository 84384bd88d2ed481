// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <htlcgp/contract.h>
#include <htlcgp/error.h>

#include <nlohmann/json.hpp>

#include <span>

namespace htlcgp {

std::string_view ToString(ContractKind kind)
{
    switch (kind) {
    case ContractKind::Htlc: return "htlc";
    case ContractKind::Htlc1: return "htlc1";
    case ContractKind::GpCancellation: return "gp_cancellation";
    case ContractKind::GpPayment: return "gp_payment";
    }
    return "?";
}

std::string_view ToString(ContractStatus status)
{
    switch (status) {
    case ContractStatus::Proposed: return "proposed";
    case ContractStatus::Accepted: return "accepted";
    case ContractStatus::SettledPayment: return "settled_payment";
    case ContractStatus::SettledCancellation: return "settled_cancellation";
    case ContractStatus::TimedOutPenalty: return "timed_out_penalty";
    case ContractStatus::TimedOutRefund: return "timed_out_refund";
    }
    return "?";
}

std::string_view ToString(SettlementMode mode)
{
    return mode == SettlementMode::OnChain ? "on_chain" : "off_chain";
}

ContractKind ParseContractKind(std::string_view text)
{
    if (text == "htlc") return ContractKind::Htlc;
    if (text == "htlc1") return ContractKind::Htlc1;
    if (text == "cancellation" || text == "gp_cancellation") return ContractKind::GpCancellation;
    if (text == "payment" || text == "gp_payment") return ContractKind::GpPayment;
    throw Error(ErrorCode::UnsupportedKind, "unknown contract kind '" + std::string{text} + "'");
}

bool IsTerminal(ContractStatus status)
{
    return status != ContractStatus::Proposed && status != ContractStatus::Accepted;
}

Amount SettlementOutcome::Total() const
{
    Amount total{0};
    for (const Credit& c : credits) total += c.amount;
    return total;
}

Contract Contract::Propose(ContractId id, ContractTerms terms, TimePoint now)
{
    const bool two_hash = terms.kind == ContractKind::GpCancellation || terms.kind == ContractKind::GpPayment;
    if (two_hash && !terms.cancellation_hash) {
        throw Error(ErrorCode::MissingHash, std::string{ToString(terms.kind)} + " needs a cancellation hash");
    }
    // A zero penalty lock is legitimate when the rate is zero.
    if (terms.kind != ContractKind::GpCancellation && terms.amount == Amount{0}) {
        throw Error(ErrorCode::ZeroAmount, std::string{ToString(terms.kind)} + " with zero amount");
    }
    if (terms.locktime <= now) {
        throw Error(ErrorCode::ExpiredLocktime, "locktime " + std::to_string(terms.locktime.Minute()) +
                                                    " not after now " + std::to_string(now.Minute()));
    }
    if (terms.payer == terms.payee) throw Error(ErrorCode::InvalidArgument, "payer and payee coincide");
    if (terms.kind != ContractKind::Htlc1) terms.penalty = Amount{0};
    return Contract{id, std::move(terms)};
}

Amount Contract::Locked() const
{
    return m_terms.amount + m_terms.penalty;
}

void Contract::Accept()
{
    if (m_status != ContractStatus::Proposed) {
        throw Error(ErrorCode::AlreadyTerminal, "contract " + std::to_string(m_id) + " is " +
                                                    std::string{ToString(m_status)});
    }
    m_status = ContractStatus::Accepted;
}

void Contract::Finish(const SettlementOutcome& outcome)
{
    if (m_status != ContractStatus::Accepted) {
        throw Error(ErrorCode::AlreadyTerminal, "contract " + std::to_string(m_id) + " is " +
                                                    std::string{ToString(m_status)});
    }
    if (!IsTerminal(outcome.status)) throw Error(ErrorCode::IllegalOutcome, "outcome is not terminal");
    m_status = outcome.status;
}

namespace {

SettlementOutcome Pay(ContractStatus status, const NodeId& party, Amount amount)
{
    return SettlementOutcome{status, {Credit{party, amount}}};
}

void RequireHash(const Digest& expected, const Preimage& preimage)
{
    if (HashPreimage(preimage) != expected) throw Error(ErrorCode::WrongPreimage, "preimage does not match");
}

void RequireUnexpired(const Contract& c, TimePoint now)
{
    if (now >= c.Terms().locktime) {
        throw Error(ErrorCode::LocktimeExpired, "preimage presented at " + std::to_string(now.Minute()) +
                                                    ", locktime " + std::to_string(c.Terms().locktime.Minute()));
    }
}

} // namespace

SettlementOutcome Resolve(const Contract& contract, const Witness& witness, TimePoint now)
{
    if (IsTerminal(contract.Status())) {
        throw Error(ErrorCode::AlreadyTerminal, "contract " + std::to_string(contract.Id()) + " already settled");
    }
    if (contract.Status() != ContractStatus::Accepted) {
        throw Error(ErrorCode::NotAccepted, "contract " + std::to_string(contract.Id()) + " was never accepted");
    }
    const ContractTerms& t = contract.Terms();
    const bool expired = now >= t.locktime;
    const Amount total = contract.Locked();

    if (const auto* x = std::get_if<PreimageX>(&witness)) {
        RequireHash(t.payment_hash, x->value);
        RequireUnexpired(contract, now);
        // The cancellation lock goes back to its holder; everything else to the payee.
        if (t.kind == ContractKind::GpCancellation) return Pay(ContractStatus::SettledPayment, t.payer, total);
        return Pay(ContractStatus::SettledPayment, t.payee, total);
    }
    if (const auto* r = std::get_if<PreimageR>(&witness)) {
        if (!t.cancellation_hash) throw Error(ErrorCode::WrongPreimage, "contract has no cancellation path");
        RequireHash(*t.cancellation_hash, r->value);
        if (t.kind == ContractKind::GpPayment) {
            return Pay(expired ? ContractStatus::TimedOutRefund : ContractStatus::SettledCancellation, t.payer, total);
        }
        RequireUnexpired(contract, now);
        return Pay(ContractStatus::SettledCancellation, t.payer, total);
    }
    if (std::holds_alternative<TimeoutClaim>(witness)) {
        if (!expired) {
            throw Error(ErrorCode::TooEarly, "timeout claimed at " + std::to_string(now.Minute()) + ", locktime " +
                                                 std::to_string(t.locktime.Minute()));
        }
        switch (t.kind) {
        case ContractKind::Htlc:
        case ContractKind::GpPayment:
            return Pay(ContractStatus::TimedOutRefund, t.payer, total);
        case ContractKind::Htlc1:
            return Pay(ContractStatus::TimedOutPenalty, t.payer, total);
        case ContractKind::GpCancellation:
            return Pay(ContractStatus::TimedOutPenalty, t.payee, total);
        }
    }
    const Amount compensation = std::get<MutualTermination>(witness).compensation;
    switch (t.kind) {
    case ContractKind::Htlc:
    case ContractKind::GpPayment:
        return Pay(ContractStatus::SettledCancellation, t.payer, total);
    case ContractKind::Htlc1: {
        if (compensation > t.penalty) {
            throw Error(ErrorCode::IllegalOutcome, "compensation exceeds the penalty deposit");
        }
        SettlementOutcome out{ContractStatus::SettledCancellation, {Credit{t.payer, t.amount + compensation}}};
        if (t.penalty > compensation) out.credits.push_back(Credit{t.payee, t.penalty - compensation});
        return out;
    }
    case ContractKind::GpCancellation:
        if (compensation < t.amount) {
            throw Error(ErrorCode::InsufficientCompensation, "termination offers " +
                                                                 std::to_string(compensation.Msat()) + " < " +
                                                                 std::to_string(t.amount.Msat()));
        }
        return Pay(ContractStatus::SettledCancellation, t.payee, total);
    }
    throw Error(ErrorCode::UnsupportedKind, "unhandled contract kind");
}

SettlementOutcome ResolveHtlc1(const Contract& contract, const Witness& witness, TimePoint now)
{
    if (contract.Kind() != ContractKind::Htlc1) {
        throw Error(ErrorCode::UnsupportedKind, std::string{ToString(contract.Kind())} + " is not htlc1");
    }
    return Resolve(contract, witness, now);
}

PairOutcome ResolvePair(const Contract& cancellation, const Contract& payment, const Witness& witness, TimePoint now)
{
    if (cancellation.Kind() != ContractKind::GpCancellation || payment.Kind() != ContractKind::GpPayment) {
        throw Error(ErrorCode::UnsupportedKind, "pair must be a cancellation and a payment contract");
    }
    const ContractTerms& c = cancellation.Terms();
    const ContractTerms& p = payment.Terms();
    if (c.channel != p.channel || c.payment_hash != p.payment_hash || c.cancellation_hash != p.cancellation_hash) {
        throw Error(ErrorCode::InvalidArgument, "contracts do not form a pair");
    }
    // A payment-side termination carries no compensation of its own.
    Witness payment_witness = witness;
    if (std::holds_alternative<MutualTermination>(witness)) payment_witness = MutualTermination{Amount{0}};
    return PairOutcome{Resolve(cancellation, witness, now), Resolve(payment, payment_witness, now)};
}

std::string RenderScriptTemplate(ContractKind kind)
{
    struct Line {
        int depth;
        std::string_view text;
    };
    static constexpr Line revocation_prefix[] = {
        {0, "OP_DUP OP_HASH160 ⟨ RIPEMD160 ( SHA256 ( revocationpubkey ))⟩ OP_EQUAL"},
        {0, "OP_IF"},
        {1, "OP_CHECKSIG"},
        {0, "OP_ELSE"},
        {1, "⟨ remote_htlcgppubkey⟩ OP_SWAP OP_SIZE 32 OP_EQUAL"},
        {1, "OP_NOTIF"},
    };
    static constexpr Line cancellation_body[] = {
        {2, "OP_IF"},
        {3, "OP_HASH160 ⟨ RIPEMD160 ( payment_hash )⟩ OP_EQUALVERIFY"},
        {3, "2 OP_SWAP ⟨ local_htlcgppubkey ⟩ 2 OP_CHECKMULTISIG"},
        {2, "OP_ELSE"},
        {3, "OP_HASH160 ⟨ RIPEMD160 ( cancellation_hash) ⟩ OP_EQUALVERIFY"},
        {3, "2 OP_SWAP ⟨ local_htlcgppubkey ⟩ 2 OP_CHECKMULTISIG"},
        {2, "OP_ENDIF"},
        {1, "OP_ELSE"},
        {2, "OP_DROP ⟨ cltv_expiry ⟩ OP_CHECKLOCKTIMEVERIFY OP_DROP"},
        {2, "OP_CHECKSIG"},
        {1, "OP_ENDIF"},
        {0, "OP_ENDIF"},
    };
    static constexpr Line payment_body[] = {
        {2, "OP_DROP 2 OP_SWAP ⟨ local_htlcgppubkey ⟩ 2 OP_CHECKMULTISIG"},
        {1, "OP_ELSE"},
        {2, "OP_IF"},
        {3, "OP_HASH160 ⟨ RIPEMD160 ( cancellation_hash) ⟩ OP_EQUALVERIFY"},
        {3, "OP_CHECKSIG"},
        {2, "OP_ELSE"},
        {3, "OP_HASH160 ⟨ RIPEMD160 ( payment_hash )⟩ OP_EQUALVERIFY"},
        {3, "OP_CHECKSIG"},
        {2, "OP_ENDIF"},
        {1, "OP_ENDIF"},
        {0, "OP_ENDIF"},
    };

    std::span<const Line> body;
    switch (kind) {
    case ContractKind::GpCancellation: body = cancellation_body; break;
    case ContractKind::GpPayment: body = payment_body; break;
    default:
        throw Error(ErrorCode::UnsupportedKind, "no witness script template for " + std::string{ToString(kind)});
    }
    std::string out;
    const auto emit = [&](const Line& line) {
        out.append(static_cast<std::size_t>(line.depth) * 4, ' ');
        out.append(line.text);
        out.push_back('\n');
    };
    for (const Line& line : revocation_prefix) emit(line);
    for (const Line& line : body) emit(line);
    return out;
}

nlohmann::json ToJson(const ContractEvent& event)
{
    nlohmann::json j;
    j["time_min"] = event.time.Minute();
    j["channel"] = event.channel.Str();
    j["kind"] = ToString(event.kind);
    j["transition"] = event.transition;
    j["credited_party"] = event.credited ? nlohmann::json(event.credited->Str()) : nlohmann::json(nullptr);
    j["amount_msat"] = event.amount.Msat();
    j["mode"] = ToString(event.mode);
    return j;
}

} // namespace htlcgp
