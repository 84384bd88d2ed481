// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <htlcgp/error.h>
#include <htlcgp/penalty.h>

#include <nlohmann/json.hpp>

namespace htlcgp {

namespace {

Rational R(Amount a) { return a.ToRational(); }
Rational R(Duration d) { return Rational{d.Minutes()}; }

void CheckHop(const PathPlan& plan, std::size_t hop)
{
    if (hop >= plan.amounts.size() || hop >= plan.timelocks.size()) {
        throw Error(ErrorCode::IndexOutOfRange, "hop " + std::to_string(hop) + " of " +
                                                    std::to_string(plan.amounts.size()));
    }
}

bool WithinOneMsat(const Rational& a, const Rational& b)
{
    const Rational d = a - b;
    return d <= 1 && d >= -1;
}

} // namespace

std::vector<Amount> ComputeAmountCascade(Amount alpha, std::span<const Amount> fees)
{
    Amount first = alpha;
    for (Amount fee : fees) first += fee;
    std::vector<Amount> amounts{first};
    for (Amount fee : fees) amounts.push_back(amounts.back() - fee);
    return amounts;
}

std::vector<Duration> ComputeTimelockSchedule(std::size_t hops, Duration t_base, Duration delta)
{
    if (delta <= Duration{0}) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
    // Equality is allowed: the hop checks are t' + delta <= t_prev.
    if (t_base < delta) {
        throw Error(ErrorCode::InvalidBase, "t_base " + std::to_string(t_base.Minutes()) + " < delta " +
                                                std::to_string(delta.Minutes()));
    }
    std::vector<Duration> schedule;
    schedule.reserve(hops);
    for (std::size_t i = 0; i < hops; ++i) {
        schedule.push_back(t_base + delta * static_cast<std::int64_t>(hops - 1 - i));
    }
    return schedule;
}

Amount ChoosePsi(Amount alpha, Duration t0, Duration delta, std::uint32_t k)
{
    if (t0 <= Duration{0}) throw Error(ErrorCode::InvalidArgument, "t0 must be positive");
    const BigInt kk{k};
    const BigInt rhs = BigInt{alpha.Msat()} * ((kk + 1) * t0.Minutes() + BigInt{delta.Minutes()} * kk * (kk + 1) / 2);
    const BigInt t{t0.Minutes()};
    const BigInt psi = (rhs + t - 1) / t;
    return FloorMsat(Rational{psi});
}

Rational ComputePhi(const PathPlan& plan)
{
    if (plan.amounts.empty()) throw Error(ErrorCode::InvalidArgument, "plan has no hops");
    if (plan.alpha == Amount{0}) throw Error(ErrorCode::ZeroAmount, "phi undefined for zero alpha");
    Rational weighted = (R(plan.psi) + R(plan.amounts[0])) * R(plan.timelocks[0]);
    for (std::size_t j = 1; j < plan.amounts.size(); ++j) weighted += R(plan.amounts[j]) * R(plan.timelocks[j]);
    return weighted / (R(plan.alpha) * R(plan.timelocks.back()));
}

Rational ComputeTgpExact(const PathPlan& plan, std::size_t hop)
{
    CheckHop(plan, hop);
    Rational weighted = (R(plan.amounts[0]) + R(plan.psi)) * R(plan.timelocks[0]);
    for (std::size_t j = 1; j <= hop; ++j) weighted += R(plan.amounts[j]) * R(plan.timelocks[j]);
    return plan.gamma.Value() * weighted;
}

Amount ComputeTgp(const PathPlan& plan, std::size_t hop)
{
    return RoundHalfUpMsat(ComputeTgpExact(plan, hop));
}

bool VerifyIncomingTgp(Amount tgp_incoming, Amount alpha_hop, Duration locktime, const PenaltyRate& gamma,
                       Amount tgp_outgoing)
{
    const Rational expected = R(tgp_outgoing) + gamma.Value() * R(alpha_hop) * R(locktime);
    return WithinOneMsat(R(tgp_incoming), expected);
}

bool VerifyReceiverTgp(const PenaltyRate& gamma, const Rational& phi, Amount alpha, Duration locktime, Amount tgp)
{
    const Rational expected = gamma.Value() * phi * R(alpha) * R(locktime);
    Rational diff = expected - R(tgp);
    if (diff < 0) diff = -diff;
    return diff <= R(tgp) / 1000000 + 1;
}

std::size_t InferPosition(const PositionObservation& obs)
{
    if (obs.gamma.IsZero() || obs.hop_amount == Amount{0}) {
        throw Error(ErrorCode::InvalidArgument, "position is not observable without a penalty");
    }
    // Rounding slack of half a msat keeps the estimate from slipping one hop low.
    const Rational budget = (R(obs.incoming_tgp) + Rational{1, 2}) / (obs.gamma.Value() * R(obs.hop_amount));
    const Rational first = R(obs.incoming_locktime);
    const Rational step = R(obs.delta);
    std::size_t hops = 0;
    Rational spent{0};
    while (true) {
        const Rational next = spent + first + step * static_cast<long>(hops);
        if (next > budget) break;
        spent = next;
        ++hops;
    }
    return hops;
}

InvestmentRatio ComputeInvestmentRatio(const PathPlan& plan)
{
    const Rational htlc = R(plan.amounts.at(0));
    const Rational gp = htlc + ComputeTgpExact(plan, plan.amounts.size() - 1);
    return InvestmentRatio{htlc / gp, gp / htlc};
}

PathPlan BuildPathPlan(const PlanParams& params)
{
    if (params.path.size() < 2) throw Error(ErrorCode::InvalidArgument, "path needs at least two nodes");
    const std::size_t hops = params.path.size() - 1;
    std::vector<Amount> fees = params.fees;
    if (fees.empty()) fees.assign(hops - 1, Amount{0});
    if (fees.size() != hops - 1) {
        throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(hops - 1) + " fees, got " +
                                                    std::to_string(fees.size()));
    }
    if (params.alpha == Amount{0}) throw Error(ErrorCode::ZeroAmount, "payment amount is zero");

    PathPlan plan;
    plan.path = params.path;
    plan.alpha = params.alpha;
    plan.fees = fees;
    plan.amounts = ComputeAmountCascade(params.alpha, fees);
    plan.timelocks = ComputeTimelockSchedule(hops, params.t_base, params.delta);
    plan.gamma = params.gamma;
    plan.delta = params.delta;
    plan.k = params.k;
    if (params.psi_override) {
        plan.psi = *params.psi_override;
    } else {
        plan.psi = params.k == 0 ? Amount{0} : ChoosePsi(params.alpha, plan.timelocks[0], params.delta, params.k);
    }
    for (std::size_t i = 0; i < hops; ++i) plan.tgp.push_back(ComputeTgp(plan, i));
    plan.phi = ComputePhi(plan);
    return plan;
}

std::vector<NodeId> SyntheticPath(std::size_t hops)
{
    std::vector<NodeId> path;
    for (std::size_t i = 0; i <= hops; ++i) path.emplace_back("U" + std::to_string(i));
    return path;
}

nlohmann::json PlanToJson(const PathPlan& plan)
{
    nlohmann::json j;
    auto& path = j["path"] = nlohmann::json::array();
    for (const NodeId& n : plan.path) path.push_back(n.Str());
    j["alpha_msat"] = plan.alpha.Msat();
    auto& fees = j["fees_msat"] = nlohmann::json::array();
    for (Amount a : plan.fees) fees.push_back(a.Msat());
    auto& amounts = j["amounts_msat"] = nlohmann::json::array();
    for (Amount a : plan.amounts) amounts.push_back(a.Msat());
    auto& timelocks = j["timelocks_min"] = nlohmann::json::array();
    for (Duration d : plan.timelocks) timelocks.push_back(d.Minutes());
    auto& tgp = j["tgp_msat"] = nlohmann::json::array();
    for (Amount a : plan.tgp) tgp.push_back(a.Msat());
    j["gamma_per_min"] = FormatRational(plan.gamma.Value());
    j["delta_min"] = plan.delta.Minutes();
    j["psi_msat"] = plan.psi.Msat();
    j["k"] = plan.k;
    j["phi_num"] = boost::multiprecision::numerator(plan.phi).str();
    j["phi_den"] = boost::multiprecision::denominator(plan.phi).str();
    return j;
}

} // namespace htlcgp
