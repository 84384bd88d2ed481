// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "fixtures.h"
#include "scenarios.h"

#include <htlcgp/error.h>
#include <htlcgp/protocol.h>

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace htlcgp;
using namespace htlcgp::test;

namespace {

SignedMsat Msat(Amount a) { return static_cast<SignedMsat>(a.Msat()); }

SignedMsat Sum(const std::vector<SignedMsat>& v)
{
    SignedMsat s = 0;
    for (SignedMsat d : v) s += d;
    return s;
}

PaymentOutcome Run(const PathPlan& plan, const BehaviorMap& behaviors, Protocol protocol,
                   const SimulationConfig& config = {})
{
    NetworkGraph graph = MakeLineGraph(plan);
    return ExecutePayment(graph, plan, behaviors, protocol, config);
}

} // namespace

TEST_CASE("honest payment succeeds under every protocol with exact fee deltas")
{
    const PathPlan plan = MakePlan(4);
    for (Protocol protocol : {Protocol::Htlc, Protocol::Htlc1, Protocol::HtlcGp}) {
        CAPTURE(ToString(protocol));
        const PaymentOutcome out = Run(plan, {}, protocol);
        CHECK(out.kind == OutcomeKind::Success);
        const auto& d = out.ledger.position_delta;
        REQUIRE(d.size() == 5);
        CHECK(d[0] == -Msat(plan.amounts[0]));
        for (std::size_t i = 1; i < 4; ++i) CHECK(d[i] == Msat(plan.fees[i - 1]));
        CHECK(d[4] == Msat(plan.alpha));
        CHECK(Sum(d) == 0);
        CHECK(out.timed_out_hops.empty());
    }
}

TEST_CASE("receiver withholding under HTLC-GP pays the cumulative penalty")
{
    const PathPlan plan = MakePlan(4);
    const PaymentOutcome out = Run(plan, {{plan.path[4], Behavior::WithholdPreimage}}, Protocol::HtlcGp);
    CHECK(out.kind == OutcomeKind::Griefed);
    REQUIRE(out.griefer.has_value());
    CHECK(*out.griefer == 4);
    const auto& d = out.ledger.position_delta;
    CHECK(d[4] == -Msat(plan.tgp[3]));
    CHECK(d[0] == Msat(plan.tgp[0]));
    for (std::size_t m = 1; m < 4; ++m) {
        CHECK(d[m] == Msat(plan.tgp[m]) - Msat(plan.tgp[m - 1]));
        const Rational share = plan.gamma.Value() * plan.amounts[m].ToRational() * Rational{plan.timelocks[m].Minutes()};
        CHECK(abs(Rational{d[m]} - share) <= 1);
    }
    CHECK(Sum(d) == 0);
}

TEST_CASE("invalid payment contract leads to cancellation with zero deltas")
{
    const PathPlan plan = MakePlan(3);
    SimulationConfig config;
    config.faults.push_back(TermsFault{2, FaultKind::AmountShort});
    const PaymentOutcome out = Run(plan, {}, Protocol::HtlcGp, config);
    CHECK(out.kind == OutcomeKind::Cancelled);
    for (SignedMsat d : out.ledger.position_delta) CHECK(d == 0);
}

TEST_CASE("HTLC griefing locks every hop for its full timelock at no cost to the attacker")
{
    const PathPlan plan = MakePlan(3);
    NetworkGraph graph = MakeLineGraph(plan);
    const PaymentOutcome out = ExecutePayment(graph, plan, {{plan.path[3], Behavior::WithholdPreimage}}, Protocol::Htlc);
    CHECK(out.kind == OutcomeKind::Griefed);
    for (SignedMsat d : out.ledger.position_delta) CHECK(d == 0);
    CHECK(out.timed_out_hops.size() == 3);
    for (std::size_t h = 0; h < 3; ++h) {
        const Duration locked = out.ledger.lockup.at(ChannelId{"c" + std::to_string(h)});
        CHECK(locked >= plan.timelocks[h]);
    }
}

TEST_CASE("reverse griefing hurts the honest receiver under HTLC1.0 but not under HTLC-GP")
{
    const PathPlan plan = MakePlan(3);
    const NodeId charlie = plan.path[2];
    for (FaultKind fault : {FaultKind::AmountShort, FaultKind::WrongHash}) {
        CAPTURE(ToString(fault));
        SimulationConfig config;
        config.faults.push_back(TermsFault{2, fault});
        const BehaviorMap behaviors{{charlie, Behavior::ReverseGrief}};

        const PaymentOutcome h1 = Run(plan, behaviors, Protocol::Htlc1, config);
        CHECK(h1.ledger.position_delta[3] == -Msat(plan.tgp[2]));
        CHECK(h1.ledger.position_delta[2] == Msat(plan.tgp[2]));
        CHECK(h1.kind == OutcomeKind::Griefed);
        REQUIRE(h1.griefer.has_value());
        CHECK(*h1.griefer == 2);

        const PaymentOutcome gp = Run(plan, behaviors, Protocol::HtlcGp, config);
        CHECK(gp.ledger.position_delta[3] >= 0);
        CHECK(gp.timed_out_hops.empty());
    }
}

TEST_CASE("honest receiver never loses whatever its predecessor does")
{
    for (std::size_t hops : {2u, 3u, 5u}) {
        const PathPlan plan = MakePlan(hops);
        for (Behavior b : kAnyBehavior) {
            for (int fault = -1; fault < 3; ++fault) {
                SimulationConfig config;
                if (fault >= 0) config.faults.push_back(TermsFault{hops - 1, static_cast<FaultKind>(fault)});
                const PaymentOutcome out = Run(plan, {{plan.path[hops - 1], b}}, Protocol::HtlcGp, config);
                CAPTURE(hops);
                CAPTURE(ToString(b));
                CHECK(out.ledger.position_delta[hops] >= 0);
            }
        }
    }
}

TEST_CASE("honest nodes are compensated and never lose funds among mixed honest and adversarial peers")
{
    for (std::size_t hops = 2; hops <= 4; ++hops) {
        const SuiteReport report = RunHonestNodeSuite(hops, kAnyBehavior, 0, 7);
        CAPTURE(report.first_failure);
        CHECK(report.failures == 0);
        CHECK(report.compensated > 0);
    }
}

TEST_CASE("phase-by-phase execution matches a single run")
{
    const PathPlan plan = MakePlan(3);
    const BehaviorMap behaviors{{plan.path[2], Behavior::WithholdPreimage}};
    SimulationConfig config;
    config.seed = 11;
    const PreparedPayment prepared = Preprocess(plan, KeyRing::Derive(plan.path, 11), 11);

    NetworkGraph g1 = MakeLineGraph(plan);
    const PaymentOutcome whole = ExecutePrepared(g1, prepared, behaviors, Protocol::HtlcGp, config);

    NetworkGraph g2 = MakeLineGraph(plan);
    PaymentSession session{g2, prepared, behaviors, Protocol::HtlcGp, config};
    session.RunLockingRound1();
    session.RunLockingRound2();
    session.RunRelease();
    const PaymentOutcome stepped = session.Finish();

    REQUIRE(whole.trace.size() == stepped.trace.size());
    for (std::size_t i = 0; i < whole.trace.size(); ++i) CHECK(ToJson(whole.trace[i]) == ToJson(stepped.trace[i]));
    CHECK(whole.ledger.position_delta == stepped.ledger.position_delta);
}

TEST_CASE("locking round 1 forms cancellation contracts from receiver to sender before any payment contract")
{
    const PathPlan plan = MakePlan(3);
    NetworkGraph graph = MakeLineGraph(plan);
    const PaymentOutcome out = ExecutePayment(graph, plan, {}, Protocol::HtlcGp);
    std::vector<std::string> accepted;
    for (const ContractEvent& ev : out.contract_log) {
        if (ev.transition == "accepted") accepted.push_back(std::string{ToString(ev.kind)} + "@" + ev.channel.Str());
    }
    const std::vector<std::string> expected{"gp_cancellation@c2", "gp_cancellation@c1", "gp_cancellation@c0",
                                            "gp_payment@c0",      "gp_payment@c1",      "gp_payment@c2"};
    CHECK(accepted == expected);
}

TEST_CASE("refusals during locking abort the payment without any loss")
{
    const PathPlan plan = MakePlan(3);
    for (Behavior b : {Behavior::RefuseSign, Behavior::RefuseForward}) {
        for (std::size_t pos = 1; pos < 3; ++pos) {
            const PaymentOutcome out = Run(plan, {{plan.path[pos], b}}, Protocol::HtlcGp);
            CAPTURE(ToString(b));
            CAPTURE(pos);
            CHECK(out.kind != OutcomeKind::Success);
            for (std::size_t p = 0; p <= 3; ++p) {
                if (p != pos) CHECK(out.ledger.position_delta[p] >= 0);
            }
        }
    }
}

TEST_CASE("a hop without enough liquidity is infeasible")
{
    const PathPlan plan = MakePlan(3);
    NetworkGraph graph = MakeLineGraph(plan, Amount{10});
    CHECK_THROWS_AS(ExecutePayment(graph, plan, {}, Protocol::HtlcGp), Error);
    try {
        ExecutePayment(graph, plan, {}, Protocol::HtlcGp);
    } catch (const Error& e) {
        CHECK(e.Code() == ErrorCode::PlanInfeasible);
    }
}

TEST_CASE("on-chain fees are burned and accounted")
{
    const PathPlan plan = MakePlan(3);
    SimulationConfig config;
    config.onchain_fee = Amount{500};
    NetworkGraph graph = MakeLineGraph(plan);
    const Amount before = TotalFunds(graph);
    const PaymentOutcome out =
        ExecutePayment(graph, plan, {{plan.path[3], Behavior::WithholdPreimage}}, Protocol::HtlcGp, config);
    CHECK(out.ledger.onchain_fees > Amount{0});
    CHECK(TotalFunds(graph) + graph.Burned() == before);
    CHECK(Sum(out.ledger.position_delta) + Msat(out.ledger.onchain_fees) == 0);
}

TEST_CASE("enum parsing round-trips")
{
    for (Protocol p : {Protocol::Htlc, Protocol::Htlc1, Protocol::HtlcGp}) CHECK(ParseProtocol(ToString(p)) == p);
    for (Behavior b : kAnyBehavior) CHECK(ParseBehavior(ToString(b)) == b);
    CHECK_THROWS_AS(ParseProtocol("lightning"), Error);
}
