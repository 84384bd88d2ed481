// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef HTLCGP_TESTS_FIXTURES_H
#define HTLCGP_TESTS_FIXTURES_H

#include <htlcgp/graph.h>
#include <htlcgp/penalty.h>

#include <string>

namespace htlcgp::test {

/** Line graph over plan.path with `funds` on each side of every hop channel "c<i>". */
inline NetworkGraph MakeLineGraph(const PathPlan& plan, Amount funds = Amount{10'000'000'000})
{
    NetworkGraph graph;
    for (const NodeId& node : plan.path) graph.AddNode(node);
    for (std::size_t h = 0; h < plan.Hops(); ++h) {
        graph.AddChannel(ChannelId{"c" + std::to_string(h)}, plan.path[h], plan.path[h + 1], funds, funds);
    }
    return graph;
}

/** n hops, 1 sat fee per intermediary, gamma 1e-3, one-day spacing. */
inline PathPlan MakePlan(std::size_t hops, Amount alpha = Amount{1'000'000}, Rational gamma = Rational{1, 1000},
                         std::uint32_t k = 4)
{
    PlanParams params;
    params.path = SyntheticPath(hops);
    params.alpha = alpha;
    params.fees.assign(hops - 1, Amount{1000});
    params.gamma = PenaltyRate{gamma};
    params.delta = Duration{144};
    params.t_base = Duration{144};
    params.k = k;
    return BuildPathPlan(params);
}

} // namespace htlcgp::test

#endif // HTLCGP_TESTS_FIXTURES_H
