// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "oracles.h"

#include <htlcgp/analysis.h>
#include <htlcgp/attack.h>
#include <htlcgp/error.h>
#include <htlcgp/experiment.h>
#include <htlcgp/snapshot.h>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <set>
#include <sstream>

using namespace htlcgp;
using namespace htlcgp::test;

namespace {

ErrorCode CodeOf(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.Code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidArgument;
}

nlohmann::json Record(const std::string& id, const std::string& a, const std::string& b, std::uint64_t sat,
                      bool disabled = false)
{
    return {{"channel_id", id}, {"node1_pub", a}, {"node2_pub", b}, {"capacity_sat", sat}, {"disabled", disabled}};
}

NetworkGraph Star(std::size_t leaves)
{
    NetworkGraph g;
    g.AddNode(NodeId{"hub"});
    for (std::size_t i = 0; i < leaves; ++i) {
        const NodeId leaf{"leaf" + std::to_string(i)};
        g.AddNode(leaf);
        g.AddChannel(ChannelId{"s" + std::to_string(i)}, NodeId{"hub"}, leaf, Amount{10}, Amount{10});
    }
    return g;
}

AttackParams Params(Protocol protocol, Rational gamma = Rational{1, 1000})
{
    AttackParams p;
    p.budget = Amount{3'000'000'000};
    p.tx_value = Amount{10'000'000};
    p.protocol = protocol;
    p.gamma = PenaltyRate{gamma};
    return p;
}

} // namespace

TEST_CASE("snapshot loading drops disabled channels and keeps the largest component")
{
    nlohmann::json doc = nlohmann::json::array();
    // five-node component a..e, with one disabled extra edge
    doc.push_back(Record("1", "a", "b", 10));
    doc.push_back(Record("2", "b", "c", 10));
    doc.push_back(Record("3", "c", "d", 10));
    doc.push_back(Record("4", "d", "e", 10));
    doc.push_back(Record("5", "a", "e", 10, true));
    // three-node component x, y, z
    doc.push_back(Record("6", "x", "y", 10));
    doc.push_back(Record("7", "y", "z", 10));
    const NetworkGraph g = ParseSnapshot(doc);
    CHECK(g.NodeCount() == 5);
    CHECK(!g.HasNode(NodeId{"x"}));
    CHECK(!g.HasChannel(ChannelId{"5"}));
    const Channel& ch = g.GetChannel(ChannelId{"1"});
    CHECK(ch.Remain(NodeId{"a"}) == Amount{5000});
    CHECK(ch.Remain(NodeId{"b"}) == Amount{5000});
    CHECK(TotalFunds(g) == Amount{40'000});
}

TEST_CASE("snapshot policies, wrappers and malformed records")
{
    nlohmann::json first = Record("1", "a", "b", 7);
    first["node1_policy"] = {{"base_fee_msat", 1000}, {"fee_rate_ppm", 1}};
    nlohmann::json second = Record("2", "a", "c", 7);
    second["node1_policy"] = {{"base_fee_msat", 5}, {"fee_rate_ppm", 500}};
    const NetworkGraph g = ParseSnapshot(nlohmann::json{{"edges", {first, second}}});
    CHECK(g.Policy(NodeId{"a"}) == FeePolicy{Amount{1000}, Rational{1, 1'000'000}});
    CHECK(g.GetChannel(ChannelId{"1"}).Capacity() == Amount{7000});

    nlohmann::json stringy = Record("9", "p", "q", 0);
    stringy["capacity_sat"] = "12";
    CHECK(ParseSnapshot(nlohmann::json{{"channels", {stringy}}}).GetChannel(ChannelId{"9"}).Capacity() == Amount{12'000});

    CHECK(CodeOf([] { ParseSnapshot(nlohmann::json::array({Record("1", "a", "a", 1)})); }) == ErrorCode::ParseError);
    CHECK(CodeOf([] { ParseSnapshot(nlohmann::json::array({Record("1", "a", "b", 1), Record("1", "b", "c", 1)})); }) ==
          ErrorCode::ParseError);
    CHECK(CodeOf([] { ParseSnapshot(nlohmann::json::array({Record("1", "a", "b", 1, true)})); }) == ErrorCode::EmptyGraph);
    CHECK(CodeOf([] { ParseSnapshot(nlohmann::json{{"nodes", 1}}); }) == ErrorCode::ParseError);
    nlohmann::json negative = Record("1", "a", "b", 1);
    negative["capacity_sat"] = -4;
    CHECK(CodeOf([&] { ParseSnapshot(nlohmann::json::array({negative})); }) == ErrorCode::ParseError);
    CHECK(CodeOf([] { LoadSnapshot("/nonexistent/snapshot.json"); }) == ErrorCode::ParseError);
}

TEST_CASE("betweenness ranks centres first")
{
    CHECK(BetweennessTop(Star(5), 1) == std::vector<NodeId>{NodeId{"hub"}});
    NetworkGraph path;
    for (const char* n : {"a", "b", "c"}) path.AddNode(NodeId{n});
    path.AddChannel(ChannelId{"ab"}, NodeId{"a"}, NodeId{"b"}, Amount{1}, Amount{1});
    path.AddChannel(ChannelId{"bc"}, NodeId{"b"}, NodeId{"c"}, Amount{1}, Amount{1});
    CHECK(BetweennessTop(path, 1) == std::vector<NodeId>{NodeId{"b"}});
    CHECK(Betweenness<Rational>(path).at(NodeId{"b"}) == 1);
    CHECK(Betweenness<Rational>(Star(5)).at(NodeId{"hub"}) == 10);
}

TEST_CASE("betweenness equals exact brute-force oracles on small and 20-node graphs")
{
    std::mt19937_64 rng{314};
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t nodes = 4 + rng() % 9; // up to 12
        const NetworkGraph g = RandomGraph(rng, nodes, 0.3, 10);
        const auto fast = Betweenness<Rational>(g);
        CAPTURE(trial);
        REQUIRE(fast == BetweennessByEnumeration(g));
        REQUIRE(fast == BetweennessByPairCounts(g));
        const auto approx = Betweenness<double>(g);
        for (const auto& [n, v] : fast) REQUIRE(std::abs(approx.at(n) - ToDouble(v)) <= 1e-9 * (1 + ToDouble(v)));
    }
    for (int trial = 0; trial < 5; ++trial) {
        const NetworkGraph g = RandomGraph(rng, 20, 0.15, 10);
        REQUIRE(Betweenness<Rational>(g) == BetweennessByPairCounts(g));
    }
}

TEST_CASE("max flow on simple paths")
{
    NetworkGraph g;
    for (const char* n : {"s", "a", "b", "t"}) g.AddNode(NodeId{n});
    g.AddChannel(ChannelId{"sa"}, NodeId{"s"}, NodeId{"a"}, Amount{7}, Amount{0});
    g.AddChannel(ChannelId{"at"}, NodeId{"a"}, NodeId{"t"}, Amount{9}, Amount{0});
    CHECK(MaxFlow(g, {NodeId{"s"}}, {NodeId{"t"}}).value == Amount{7});
    CHECK(MaxFlow(g, {NodeId{"t"}}, {NodeId{"s"}}).value == Amount{0});

    NetworkGraph two;
    for (const char* n : {"s", "a", "b", "t"}) two.AddNode(NodeId{n});
    two.AddChannel(ChannelId{"sa"}, NodeId{"s"}, NodeId{"a"}, Amount{3}, Amount{0});
    two.AddChannel(ChannelId{"at"}, NodeId{"a"}, NodeId{"t"}, Amount{3}, Amount{0});
    two.AddChannel(ChannelId{"sb"}, NodeId{"s"}, NodeId{"b"}, Amount{4}, Amount{0});
    two.AddChannel(ChannelId{"bt"}, NodeId{"b"}, NodeId{"t"}, Amount{4}, Amount{0});
    const FlowResult f = MaxFlow(two, {NodeId{"s"}}, {NodeId{"t"}});
    CHECK(f.value == Amount{7});
    CHECK(f.channels.size() == 4);
    CHECK(CodeOf([&] { MaxFlow(two, {NodeId{"s"}}, {NodeId{"s"}}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("max flow equals min-cut enumeration on random graphs up to 12 nodes")
{
    std::mt19937_64 rng{271};
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t nodes = 3 + rng() % 10;
        const NetworkGraph g = RandomGraph(rng, nodes, 0.35, 1000);
        const std::vector<NodeId> ids = g.Nodes();
        std::vector<NodeId> sources{ids[0]};
        std::vector<NodeId> sinks{ids[1]};
        if (nodes > 5 && rng() % 2) {
            sources.push_back(ids[2]);
            sinks.push_back(ids[3]);
        }
        CAPTURE(trial);
        const FlowResult flow = MaxFlow(g, sources, sinks);
        REQUIRE(flow.value == MinCutByEnumeration(g, sources, sinks));

        // per-channel flows respect balances and conserve at every inner node
        std::map<NodeId, std::int64_t> net;
        for (const auto& [id, cf] : flow.channels) {
            const Channel& ch = g.GetChannel(id);
            REQUIRE(!ch.IsClosed());
            REQUIRE(cf.amount <= ch.Remain(cf.from));
            net[cf.from] -= static_cast<std::int64_t>(cf.amount.Msat());
            net[ch.Other(cf.from)] += static_cast<std::int64_t>(cf.amount.Msat());
        }
        std::int64_t into_sinks = 0;
        for (const auto& [node, value] : net) {
            const bool is_source = std::find(sources.begin(), sources.end(), node) != sources.end();
            const bool is_sink = std::find(sinks.begin(), sinks.end(), node) != sinks.end();
            if (is_sink) into_sinks += value;
            if (!is_source && !is_sink) REQUIRE(value == 0);
        }
        REQUIRE(into_sinks == static_cast<std::int64_t>(flow.value.Msat()));
    }
}

TEST_CASE("roi arithmetic and log-modulus")
{
    const FeePolicy policy{Amount{1000}, Rational{1, 10'000}};
    const RoIResult r = ComputeRoi(10, policy, Amount{100'000}, Amount{0});
    CHECK(r.profit_processed == Amount{10'100});
    CHECK(r.roi == 10'100);
    CHECK(ComputeRoi(10, policy, Amount{100'000}, Amount{10'100}).roi == 0);
    CHECK(ComputeRoi(0, policy, Amount{100'000}, Amount{55}).roi == -55);
    CHECK(LogModulus(0) == 0);
    CHECK(LogModulus(999) == doctest::Approx(3.0));
    CHECK(LogModulus(-999) == doctest::Approx(-3.0));
    CHECK(ComputeRoi(10, policy, Amount{100'000}, Amount{0}).log_modulus_roi == doctest::Approx(std::log10(10'101.0)));
}

TEST_CASE("synthetic topology has a resident attacker on a six-hop cycle")
{
    const SyntheticTopology topo = MakeHubAndSpoke(HubAndSpokeSpec{});
    REQUIRE(topo.attacker.has_value());
    CHECK(BetweennessTop(topo.graph, 1) == std::vector<NodeId>{NodeId{"victim"}});
    const std::vector<NodeId> cycle = FindCycleThrough(topo.graph, *topo.attacker, topo.targets.victim);
    CHECK(cycle.size() == 7);
    CHECK(cycle.front() == *topo.attacker);
    CHECK(cycle.back() == *topo.attacker);
    CHECK(std::set<NodeId>(cycle.begin(), cycle.end() - 1).size() == 6);
    CHECK(std::find(cycle.begin(), cycle.end(), topo.targets.victim) != cycle.end());
    CHECK(TotalFunds(topo.graph) > Amount{0});
}

TEST_CASE("attack strategies on the synthetic topology")
{
    const SyntheticTopology topo = MakeHubAndSpoke(HubAndSpokeSpec{});
    const NodeId attacker = *topo.attacker;

    const AttackReport s1_htlc = AttackNewChannels(topo.graph, topo.targets, Params(Protocol::Htlc));
    const AttackReport s1_gp = AttackNewChannels(topo.graph, topo.targets, Params(Protocol::HtlcGp));
    const AttackReport s1_zero = AttackNewChannels(topo.graph, topo.targets, Params(Protocol::HtlcGp, Rational{0}));
    CHECK(s1_htlc.route.size() == 5);
    CHECK(s1_htlc.roi.roi >= 0);
    CHECK(s1_htlc.roi.total_griefing_penalty == Amount{0});
    CHECK(s1_gp.roi.roi < 0);
    CHECK(s1_zero.roi.roi == s1_htlc.roi.roi);
    CHECK(s1_zero.roi.n_tx == s1_htlc.roi.n_tx);

    const AttackReport s2_htlc = AttackExistingChannels(topo.graph, attacker, topo.targets, Params(Protocol::Htlc));
    const AttackReport s2_gp = AttackExistingChannels(topo.graph, attacker, topo.targets, Params(Protocol::HtlcGp));
    const AttackReport s2_zero =
        AttackExistingChannels(topo.graph, attacker, topo.targets, Params(Protocol::HtlcGp, Rational{0}));
    CHECK(s2_htlc.route.size() == 7);
    CHECK(s2_htlc.roi.roi >= 0);
    CHECK(s2_zero.roi.roi == s2_htlc.roi.roi);
    CHECK(s2_gp.roi.roi < s1_gp.roi.roi);
    CHECK(s2_gp.penalty_per_payment > s1_gp.penalty_per_payment);

    // the input graph is never modified
    CHECK(!topo.graph.HasNode(NodeId{"attacker_1"}));
    for (const Channel& ch : topo.graph.Channels()) CHECK(ch.Locked() == Amount{0});
}

TEST_CASE("attack error cases")
{
    const SyntheticTopology topo = MakeHubAndSpoke(HubAndSpokeSpec{});
    CHECK(CodeOf([&] { AttackNewChannels(topo.graph, NodeId{"nobody"}, Params(Protocol::Htlc)); }) ==
          ErrorCode::VictimNotFound);
    AttackParams tiny = Params(Protocol::HtlcGp);
    tiny.budget = Amount{1000};
    CHECK(CodeOf([&] { AttackNewChannels(topo.graph, topo.targets, tiny); }) == ErrorCode::BudgetTooSmall);

    HubAndSpokeSpec lonely;
    lonely.resident_attacker = false;
    SyntheticTopology no_cycle = MakeHubAndSpoke(lonely);
    no_cycle.graph.AddNode(NodeId{"mallory"});
    no_cycle.graph.AddNode(NodeId{"island"});
    no_cycle.graph.AddChannel(ChannelId{"mi"}, NodeId{"mallory"}, NodeId{"island"}, Amount{5}, Amount{5});
    CHECK(CodeOf([&] {
              AttackExistingChannels(no_cycle.graph, NodeId{"mallory"}, no_cycle.targets, Params(Protocol::Htlc));
          }) == ErrorCode::NoCycleThroughVictim);
    // a pendant attacker cannot close a cycle without reusing its only neighbour
    no_cycle.graph.AddChannel(ChannelId{"ms"}, NodeId{"mallory"}, NodeId{"src00"}, Amount{5}, Amount{5});
    CHECK(CodeOf([&] { FindCycleThrough(no_cycle.graph, NodeId{"mallory"}, NodeId{"victim"}); }) ==
          ErrorCode::NoCycleThroughVictim);
}

TEST_CASE("targets derived from a victim's neighbourhood")
{
    const AttackTargets star = DeriveTargets(Star(5), NodeId{"hub"});
    CHECK(star.sources.size() == 3);
    CHECK(star.sinks.size() == 2);
    const SyntheticTopology topo = MakeHubAndSpoke(HubAndSpokeSpec{});
    const AttackTargets derived = DeriveTargets(topo.graph, NodeId{"victim"}, topo.attacker);
    CHECK(derived.sources.size() + derived.sinks.size() == 8);
}

TEST_CASE("roi sweeps follow the expected trends")
{
    ExperimentConfig config;
    for (int strategy : {1, 2}) {
        CAPTURE(strategy);
        config.strategy = strategy;
        const AttackSetting setting = PrepareAttackSetting(config);
        for (RoIAxis axis : {RoIAxis::TxValue, RoIAxis::Budget, RoIAxis::Gamma}) {
            const std::vector<RoIRow> rows = SweepRoI(setting, config, axis);
            std::optional<SignedMsat> previous;
            for (const RoIRow& row : rows) {
                if (row.protocol == Protocol::Htlc) {
                    CHECK(row.roi.roi >= 0);
                    continue;
                }
                if (axis != RoIAxis::TxValue && previous) CHECK(row.roi.roi <= *previous);
                previous = row.roi.roi;
            }
        }
        const RoIRow at_default = RunRoIPoint(setting, config, RoIAxis::Budget, config.tx_value, config.budget,
                                              config.gamma, Protocol::HtlcGp);
        CHECK(at_default.status == "ok");
        CHECK(at_default.roi.roi < 0);
    }
    config.strategy = 1;
    const RoIRow broke = RunRoIPoint(PrepareAttackSetting(config), config, RoIAxis::Budget, config.tx_value,
                                     Amount{1000}, config.gamma, Protocol::HtlcGp);
    CHECK(broke.status == "BudgetTooSmall");
    CHECK(broke.roi.roi == 0);
}

TEST_CASE("investment multiple grows linearly with path length and with gamma")
{
    const ExperimentConfig config;
    const std::vector<RatioRow> by_length = SweepRatioVsPathLength(config);
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < by_length.size(); ++i) {
        if (i > 0) CHECK(by_length[i].multiple > by_length[i - 1].multiple);
        x.push_back(static_cast<double>(by_length[i].path_length));
        y.push_back(ToDouble(by_length[i].multiple));
    }
    const double r2 = LinearFitR2(x, y);
    CHECK(r2 > 0.999);
    MESSAGE("calibrated multiple n=4: " << y.front() << " (reference ~4.7), n=20: " << y.back()
                                        << " (reference ~12), R^2 " << r2);

    const std::vector<RatioRow> by_gamma = SweepRatioVsGamma(config);
    bool above_500 = false;
    for (std::size_t i = 0; i < by_gamma.size(); ++i) {
        if (i > 0) CHECK(by_gamma[i].multiple > by_gamma[i - 1].multiple);
        if (by_gamma[i].gamma > Rational{1, 1000} && by_gamma[i].multiple > 500) above_500 = true;
    }
    CHECK(above_500);
}

TEST_CASE("experiment config validation and csv output")
{
    ExperimentConfig config;
    config.budget_sweep.clear();
    CHECK(CodeOf([&] { config.Validate(); }) == ErrorCode::InvalidArgument);
    config = ExperimentConfig{};
    config.strategy = 3;
    CHECK_THROWS_AS(config.Validate(), Error);
    config = ExperimentConfig{};
    config.path_length_sweep = {4, 5};

    const nlohmann::json manifest{{"config", ToJson(config)}};
    std::ostringstream a;
    std::ostringstream b;
    WriteRatioCsv(a, manifest, SweepRatioVsPathLength(config), false);
    WriteRatioCsv(b, manifest, SweepRatioVsPathLength(config), false);
    CHECK(a.str() == b.str());
    std::istringstream lines{a.str()};
    std::string line;
    std::getline(lines, line);
    CHECK(line.starts_with("# manifest: "));
    std::getline(lines, line);
    CHECK(line.starts_with("n,multiple"));

    std::ostringstream roi;
    config.tx_value_sweep = {Amount{1000}};
    WriteRoICsv(roi, manifest, SweepRoI(PrepareAttackSetting(config), config, RoIAxis::TxValue));
    CHECK(roi.str().find("value_msat,protocol,roi_msat,log_modulus_roi") != std::string::npos);
    CHECK(FormatDouble(0.5) == "0.5");
    CHECK(LinearFitR2({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
}
