// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <htlcgp/error.h>
#include <htlcgp/penalty.h>

#include <doctest.h>

#include <random>

using namespace htlcgp;

namespace {

PathPlan Plan(std::size_t hops, std::uint64_t alpha, std::vector<Amount> fees, Rational gamma, std::int64_t t_base,
              std::int64_t delta, std::uint32_t k)
{
    PlanParams p;
    p.path = SyntheticPath(hops);
    p.alpha = Amount{alpha};
    p.fees = std::move(fees);
    p.gamma = PenaltyRate{gamma};
    p.t_base = Duration{t_base};
    p.delta = Duration{delta};
    p.k = k;
    return BuildPathPlan(p);
}

/** Random plan with n in [lo, hi] hops, fees up to 5 sat, gamma up to 1e-2. */
PathPlan RandomPlan(std::mt19937_64& rng, std::size_t lo, std::size_t hi, std::uint32_t k_lo, std::uint32_t k_hi)
{
    const std::size_t hops = std::uniform_int_distribution<std::size_t>{lo, hi}(rng);
    std::vector<Amount> fees;
    for (std::size_t i = 0; i + 1 < hops; ++i) fees.emplace_back(rng() % 5001);
    const std::int64_t delta = std::uniform_int_distribution<std::int64_t>{1, 1440}(rng);
    const std::int64_t t_base = delta + std::uniform_int_distribution<std::int64_t>{0, 4320}(rng);
    const Rational gamma{BigInt{1 + rng() % 10'000}, BigInt{1'000'000}};
    const std::uint64_t alpha = 1 + rng() % 100'000'000;
    const std::uint32_t k = std::uniform_int_distribution<std::uint32_t>{k_lo, k_hi}(rng);
    return Plan(hops, alpha, std::move(fees), gamma, t_base, delta, k);
}

Rational R(Amount a) { return a.ToRational(); }
Rational R(Duration d) { return Rational{d.Minutes()}; }

} // namespace

TEST_CASE("amount cascade adds downstream fees")
{
    const std::vector<Amount> fees{Amount{1000}, Amount{1000}, Amount{1000}};
    CHECK(ComputeAmountCascade(Amount{100'000}, fees) ==
          std::vector<Amount>{Amount{103'000}, Amount{102'000}, Amount{101'000}, Amount{100'000}});
    CHECK(ComputeAmountCascade(Amount{100}, {}) == std::vector<Amount>{Amount{100}});
    const std::vector<Amount> two{Amount{7}, Amount{7}};
    CHECK(ComputeAmountCascade(Amount{50}, two) == std::vector<Amount>{Amount{64}, Amount{57}, Amount{50}});
}

TEST_CASE("timelock schedule staggers by delta")
{
    CHECK(ComputeTimelockSchedule(3, Duration{1440}, Duration{1440}) ==
          std::vector<Duration>{Duration{4320}, Duration{2880}, Duration{1440}});
    CHECK(ComputeTimelockSchedule(1, Duration{4320}, Duration{1440}) == std::vector<Duration>{Duration{4320}});
    const auto four = ComputeTimelockSchedule(4, Duration{1441}, Duration{1440});
    CHECK(four == std::vector<Duration>{Duration{5761}, Duration{4321}, Duration{2881}, Duration{1441}});
    for (std::size_t i = 0; i + 1 < four.size(); ++i) CHECK(four[i] >= four[i + 1] + Duration{1440});
    try {
        ComputeTimelockSchedule(3, Duration{10}, Duration{11});
        FAIL("expected InvalidBase");
    } catch (const Error& e) {
        CHECK(e.Code() == ErrorCode::InvalidBase);
    }
}

TEST_CASE("psi is the smallest amount covering k extra hops")
{
    CHECK(ChoosePsi(Amount{100}, Duration{4320}, Duration{1440}, 4) == Amount{834});
    CHECK(834 * 4320 >= 3'600'000);
    CHECK(833 * 4320 < 3'600'000);
    CHECK(ChoosePsi(Amount{0}, Duration{4320}, Duration{1440}, 4) == Amount{0});
    CHECK(ChoosePsi(Amount{1}, Duration{10}, Duration{10}, 1) == Amount{3});

    std::mt19937_64 rng{5};
    for (int i = 0; i < 500; ++i) {
        const std::uint64_t alpha = rng() % 1'000'000'000;
        const std::int64_t t0 = 1 + static_cast<std::int64_t>(rng() % 100'000);
        const std::int64_t delta = 1 + static_cast<std::int64_t>(rng() % 2000);
        const std::uint32_t k = rng() % 12;
        const BigInt bound = BigInt{alpha} * (BigInt{k + 1} * t0 + BigInt{delta} * k * (k + 1) / 2);
        const BigInt psi{ChoosePsi(Amount{alpha}, Duration{t0}, Duration{delta}, k).Msat()};
        REQUIRE(psi * t0 >= bound);
        if (psi > 0) REQUIRE((psi - 1) * t0 < bound);
    }
}

TEST_CASE("two-party penalty is 4.32 msat exactly and 4 msat rounded")
{
    const PathPlan plan = Plan(1, 1, {}, Rational{1, 1000}, 4320, 1440, 0);
    CHECK(plan.psi == Amount{0});
    CHECK(ComputeTgpExact(plan, 0) == Rational{432, 100});
    CHECK(plan.tgp[0] == Amount{4});
    CHECK(ComputePhi(plan) == 1);
}

TEST_CASE("cumulative penalty over three hops")
{
    const PathPlan plan = Plan(3, 100'000, {Amount{1000}, Amount{1000}}, Rational{1, 1000}, 1440, 1440, 0);
    // independent summation over (amount, locktime) pairs
    const std::vector<std::pair<std::int64_t, std::int64_t>> terms{{102'000, 4320}, {101'000, 2880}, {100'000, 1440}};
    Rational sum{0};
    for (auto [a, t] : terms) sum += Rational{a * t};
    CHECK(sum / 1000 == 875'520);
    CHECK(ComputeTgpExact(plan, 2) == 875'520);
    CHECK(plan.tgp[2] == Amount{875'520});

    // phi with psi = 0: ((p+2p')(t+2d) + (p+p')(t+d) + pt) / (pt)
    CHECK(ComputePhi(plan) == sum / Rational{100'000 * 1440});
}

TEST_CASE("zero rate means zero penalties")
{
    const PathPlan plan = Plan(5, 5000, {}, Rational{0}, 144, 144, 4);
    for (Amount t : plan.tgp) CHECK(t == Amount{0});
    CHECK(ComputeInvestmentRatio(plan).htlc_over_gp == 1);
}

TEST_CASE("telescoping holds exactly on 1000 random plans")
{
    std::mt19937_64 rng{2026};
    for (int trial = 0; trial < 1000; ++trial) {
        const PathPlan plan = RandomPlan(rng, 2, 20, 0, 10);
        const Rational g = plan.gamma.Value();
        for (std::size_t i = 1; i < plan.Hops(); ++i) {
            const Rational step = g * R(plan.amounts[i]) * R(plan.timelocks[i]);
            REQUIRE(ComputeTgpExact(plan, i) - step == ComputeTgpExact(plan, i - 1));
            const Rational rounded = R(plan.tgp[i]) - step - R(plan.tgp[i - 1]);
            REQUIRE(rounded <= 1);
            REQUIRE(rounded >= -1);
            REQUIRE(VerifyIncomingTgp(plan.tgp[i], plan.amounts[i], plan.timelocks[i], plan.gamma, plan.tgp[i - 1]));
        }
        REQUIRE(g * plan.phi * R(plan.alpha) * R(plan.timelocks.back()) == ComputeTgpExact(plan, plan.Hops() - 1));
        REQUIRE(VerifyReceiverTgp(plan.gamma, plan.phi, plan.alpha, plan.timelocks.back(), plan.tgp.back()));
        // schedule constraints
        REQUIRE(plan.timelocks.back() >= plan.delta);
        for (std::size_t i = 0; i + 1 < plan.Hops(); ++i) REQUIRE(plan.timelocks[i] >= plan.timelocks[i + 1] + plan.delta);
    }
}

TEST_CASE("inflated penalty requests are rejected")
{
    const PathPlan plan = Plan(4, 1'000'000, {Amount{1000}, Amount{1000}, Amount{1000}}, Rational{1, 1000}, 144, 144, 4);
    CHECK(VerifyIncomingTgp(plan.tgp[2], plan.amounts[2], plan.timelocks[2], plan.gamma, plan.tgp[1]));
    CHECK(!VerifyIncomingTgp(plan.tgp[2] + Amount{2}, plan.amounts[2], plan.timelocks[2], plan.gamma, plan.tgp[1]));
    CHECK(!VerifyReceiverTgp(plan.gamma, plan.phi, plan.alpha, plan.timelocks.back(), plan.tgp.back() + Amount{10'000}));
}

TEST_CASE("a node overestimates its position by exactly k")
{
    const auto observe = [](const PathPlan& plan, std::size_t j) {
        return PositionObservation{plan.gamma, plan.delta, plan.amounts[j - 1], plan.timelocks[j - 1], plan.tgp[j - 1]};
    };
    const PathPlan masked = Plan(5, 1'000'000, {}, Rational{1, 1000}, 144, 144, 4);
    CHECK(InferPosition(observe(masked, 2)) == 6);
    const PathPlan bare = Plan(5, 1'000'000, {}, Rational{1, 1000}, 144, 144, 0);
    for (std::size_t j = 1; j <= 5; ++j) CHECK(InferPosition(observe(bare, j)) == j);

    std::mt19937_64 rng{77};
    for (int trial = 0; trial < 100; ++trial) {
        PlanParams p;
        const std::size_t hops = std::uniform_int_distribution<std::size_t>{2, 12}(rng);
        p.path = SyntheticPath(hops);
        p.alpha = Amount{1'000'000 + rng() % 100'000'000};
        p.gamma = PenaltyRate{Rational{BigInt{1 + rng() % 1000}, BigInt{100'000}}};
        p.delta = Duration{std::uniform_int_distribution<std::int64_t>{1, 288}(rng)};
        p.t_base = p.delta + Duration{std::uniform_int_distribution<std::int64_t>{0, 1440}(rng)};
        p.k = std::uniform_int_distribution<std::uint32_t>{4, 10}(rng);
        const PathPlan plan = BuildPathPlan(p);
        const std::size_t j = std::uniform_int_distribution<std::size_t>{1, hops}(rng);
        CAPTURE(trial);
        REQUIRE(InferPosition(observe(plan, j)) - j == p.k);
    }
}

TEST_CASE("htlc over htlc-gp investment is below one on any multi-hop path")
{
    for (std::size_t hops = 2; hops <= 20; ++hops) {
        const PathPlan plan = Plan(hops, 50'000'000, {}, Rational{1, 1000}, 396, 4, 4);
        const InvestmentRatio r = ComputeInvestmentRatio(plan);
        CHECK(r.htlc_over_gp < 1);
        CHECK(r.budget_multiple * r.htlc_over_gp == 1);
    }
}

TEST_CASE("plan construction rejects bad inputs")
{
    CHECK_THROWS_AS(Plan(3, 0, {}, Rational{1, 1000}, 144, 144, 4), Error);
    CHECK_THROWS_AS(Plan(3, 10, {Amount{1}}, Rational{1, 1000}, 144, 144, 4), Error);
    CHECK_THROWS_AS(Plan(3, 10, {}, Rational{1, 1000}, 100, 144, 4), Error);
    const PathPlan plan = Plan(2, 10, {}, Rational{1, 1000}, 144, 144, 4);
    CHECK_THROWS_AS(ComputeTgpExact(plan, 2), Error);
}
