// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <htlcgp/analysis.h>
#include <htlcgp/error.h>
#include <htlcgp/experiment.h>
#include <htlcgp/penalty.h>
#include <htlcgp/snapshot.h>

#include <nlohmann/json.hpp>

#include <charconv>

namespace htlcgp {
namespace {

constexpr std::uint64_t kMsatPerSat{1000};

std::vector<Rational> DecadeRates(int from_exp, int to_exp)
{
    std::vector<Rational> out;
    for (int e = from_exp; e <= to_exp; ++e) {
        BigInt den{1};
        for (int i = 0; i < -e; ++i) den *= 10;
        out.emplace_back(BigInt{1}, den);
    }
    return out;
}

std::string_view AxisName(RoIAxis axis)
{
    switch (axis) {
    case RoIAxis::TxValue: return "value_msat";
    case RoIAxis::Budget: return "budget_msat";
    case RoIAxis::Gamma: return "gamma";
    }
    return "?";
}

nlohmann::json Amounts(const std::vector<Amount>& v)
{
    nlohmann::json out = nlohmann::json::array();
    for (Amount a : v) out.push_back(a.Msat());
    return out;
}

nlohmann::json Rates(const std::vector<Rational>& v)
{
    nlohmann::json out = nlohmann::json::array();
    for (const Rational& r : v) out.push_back(FormatRational(r));
    return out;
}

} // namespace

ExperimentConfig::ExperimentConfig()
{
    for (std::uint64_t sat = 1; sat <= 100'000; sat *= 10) tx_value_sweep.emplace_back(sat * kMsatPerSat);
    for (std::uint64_t sat = 3'000; sat <= 300'000'000; sat *= 10) budget_sweep.emplace_back(sat * kMsatPerSat);
    gamma_sweep = DecadeRates(-8, -2);
    for (std::size_t n = 4; n <= 20; ++n) path_length_sweep.push_back(n);
    ratio_gamma_sweep = DecadeRates(-8, -1);
}

void ExperimentConfig::Validate() const
{
    const auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
    if (protocols.empty()) fail("protocol list is empty");
    if (strategy != 1 && strategy != 2) fail("strategy must be 1 or 2");
    if (tx_value_sweep.empty()) fail("tx value sweep is empty");
    if (budget_sweep.empty()) fail("budget sweep is empty");
    if (gamma_sweep.empty()) fail("gamma sweep is empty");
    if (path_length_sweep.empty()) fail("path length sweep is empty");
    if (ratio_gamma_sweep.empty()) fail("ratio gamma sweep is empty");
    for (std::size_t n : path_length_sweep) {
        if (n == 0) fail("path length must be positive");
    }
    if (ratio_path_length == 0) fail("path length must be positive");
    for (const Rational& g : gamma_sweep) PenaltyRate{g};
    for (const Rational& g : ratio_gamma_sweep) PenaltyRate{g};
    PenaltyRate{gamma};
    for (Amount a : tx_value_sweep) {
        if (a == Amount{0}) fail("tx value must be positive");
    }
    if (tx_value == Amount{0} || ratio_alpha == Amount{0}) fail("amounts must be positive");
    if (delta <= Duration{0}) fail("delta must be positive");
    if (t_base < delta) fail("t_base must be at least delta");
}

nlohmann::json ToJson(const ExperimentConfig& c)
{
    nlohmann::json protocols = nlohmann::json::array();
    for (Protocol p : c.protocols) protocols.push_back(ToString(p));
    nlohmann::json lengths = nlohmann::json::array();
    for (std::size_t n : c.path_length_sweep) lengths.push_back(n);
    nlohmann::json j;
    j["protocols"] = protocols;
    j["strategy"] = c.strategy;
    j["gamma"] = FormatRational(c.gamma);
    j["tx_value_msat"] = c.tx_value.Msat();
    j["budget_msat"] = c.budget.Msat();
    j["tx_value_sweep_msat"] = Amounts(c.tx_value_sweep);
    j["budget_sweep_msat"] = Amounts(c.budget_sweep);
    j["gamma_sweep"] = Rates(c.gamma_sweep);
    j["ratio_alpha_msat"] = c.ratio_alpha.Msat();
    j["ratio_path_length"] = c.ratio_path_length;
    j["path_length_sweep"] = lengths;
    j["ratio_gamma_sweep"] = Rates(c.ratio_gamma_sweep);
    j["k"] = c.k;
    j["delta_min"] = c.delta.Minutes();
    j["t_base_min"] = c.t_base.Minutes();
    j["attacker_base_fee_msat"] = c.attacker_policy.base_fee.Msat();
    j["attacker_fee_rate"] = FormatRational(c.attacker_policy.fee_rate);
    j["snapshot"] = c.snapshot ? nlohmann::json(c.snapshot->generic_string()) : nlohmann::json(nullptr);
    j["synthetic"] = {{"sources", c.synthetic.sources},
                      {"sinks", c.synthetic.sinks},
                      {"spoke_capacity_msat", c.synthetic.spoke_capacity.Msat()},
                      {"resident_attacker", c.synthetic.resident_attacker},
                      {"relays", c.synthetic.relays},
                      {"attacker_capacity_msat", c.synthetic.attacker_capacity.Msat()}};
    j["victim"] = c.victim ? nlohmann::json(c.victim->Str()) : nlohmann::json(nullptr);
    j["attacker"] = c.attacker ? nlohmann::json(c.attacker->Str()) : nlohmann::json(nullptr);
    j["seed"] = c.seed;
    return j;
}

namespace {

Rational MultipleFor(const ExperimentConfig& c, std::size_t hops, const Rational& gamma)
{
    PlanParams p;
    p.path = SyntheticPath(hops);
    p.alpha = c.ratio_alpha;
    p.gamma = PenaltyRate{gamma};
    p.delta = c.delta;
    p.t_base = c.t_base;
    p.k = c.k;
    return ComputeInvestmentRatio(BuildPathPlan(p)).budget_multiple;
}

} // namespace

std::vector<RatioRow> SweepRatioVsPathLength(const ExperimentConfig& config)
{
    config.Validate();
    std::vector<RatioRow> rows;
    for (std::size_t n : config.path_length_sweep) rows.push_back({n, config.gamma, MultipleFor(config, n, config.gamma)});
    return rows;
}

std::vector<RatioRow> SweepRatioVsGamma(const ExperimentConfig& config)
{
    config.Validate();
    std::vector<RatioRow> rows;
    for (const Rational& g : config.ratio_gamma_sweep) {
        rows.push_back({config.ratio_path_length, g, MultipleFor(config, config.ratio_path_length, g)});
    }
    return rows;
}

AttackSetting PrepareAttackSetting(const ExperimentConfig& config)
{
    AttackSetting s;
    if (config.snapshot) {
        s.graph = LoadSnapshot(*config.snapshot);
        s.attacker = config.attacker;
        NodeId victim;
        if (config.victim) {
            victim = *config.victim;
        } else {
            for (const NodeId& n : BetweennessTop(s.graph, 2)) {
                if (!s.attacker || n != *s.attacker) {
                    victim = n;
                    break;
                }
            }
        }
        s.targets = DeriveTargets(s.graph, victim, s.attacker);
    } else {
        SyntheticTopology topo = MakeHubAndSpoke(config.synthetic);
        s.graph = std::move(topo.graph);
        s.targets = std::move(topo.targets);
        s.attacker = config.attacker ? config.attacker : topo.attacker;
        if (config.victim && *config.victim != s.targets.victim) {
            s.targets = DeriveTargets(s.graph, *config.victim, s.attacker);
        }
    }
    if (config.strategy == 2 && !s.attacker) {
        throw Error(ErrorCode::InvalidArgument, "strategy 2 needs an attacker already in the graph");
    }
    return s;
}

RoIRow RunRoIPoint(const AttackSetting& setting, const ExperimentConfig& config, RoIAxis axis, Amount tx_value,
                   Amount budget, const Rational& gamma, Protocol protocol)
{
    AttackParams params;
    params.budget = budget;
    params.tx_value = tx_value;
    params.protocol = protocol;
    params.gamma = PenaltyRate{gamma};
    params.delta = config.delta;
    params.t_base = config.t_base;
    params.k = config.k;
    params.attacker_policy = config.attacker_policy;

    RoIRow row{axis, tx_value, budget, gamma, protocol, {}, "ok"};
    try {
        const AttackReport report = config.strategy == 2
                                        ? AttackExistingChannels(setting.graph, *setting.attacker, setting.targets, params)
                                        : AttackNewChannels(setting.graph, setting.targets, params);
        row.roi = report.roi;
    } catch (const Error& e) {
        if (e.Code() != ErrorCode::BudgetTooSmall) throw;
        row.roi = ComputeRoi(0, config.attacker_policy, tx_value, Amount{0});
        row.status = std::string{ErrorCodeName(e.Code())};
    }
    return row;
}

std::vector<RoIRow> SweepRoI(const AttackSetting& setting, const ExperimentConfig& config, RoIAxis axis)
{
    config.Validate();
    std::vector<RoIRow> rows;
    for (Protocol protocol : config.protocols) {
        switch (axis) {
        case RoIAxis::TxValue:
            for (Amount v : config.tx_value_sweep) {
                rows.push_back(RunRoIPoint(setting, config, axis, v, config.budget, config.gamma, protocol));
            }
            break;
        case RoIAxis::Budget:
            for (Amount b : config.budget_sweep) {
                rows.push_back(RunRoIPoint(setting, config, axis, config.tx_value, b, config.gamma, protocol));
            }
            break;
        case RoIAxis::Gamma:
            for (const Rational& g : config.gamma_sweep) {
                rows.push_back(RunRoIPoint(setting, config, axis, config.tx_value, config.budget, g, protocol));
            }
            break;
        }
    }
    return rows;
}

std::string FormatDouble(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

void WriteRatioCsv(std::ostream& out, const nlohmann::json& manifest, const std::vector<RatioRow>& rows, bool by_gamma)
{
    out << "# manifest: " << manifest.dump() << '\n';
    out << (by_gamma ? "gamma" : "n") << ",multiple,multiple_exact\n";
    for (const RatioRow& r : rows) {
        if (by_gamma) {
            out << FormatDouble(ToDouble(r.gamma));
        } else {
            out << r.path_length;
        }
        out << ',' << FormatDouble(ToDouble(r.multiple)) << ',' << FormatRational(r.multiple) << '\n';
    }
}

void WriteRoICsv(std::ostream& out, const nlohmann::json& manifest, const std::vector<RoIRow>& rows)
{
    out << "# manifest: " << manifest.dump() << '\n';
    const RoIAxis axis = rows.empty() ? RoIAxis::TxValue : rows.front().axis;
    out << AxisName(axis) << ",protocol,roi_msat,log_modulus_roi,n_tx,total_penalty_msat,status\n";
    for (const RoIRow& r : rows) {
        switch (axis) {
        case RoIAxis::TxValue: out << r.tx_value.Msat(); break;
        case RoIAxis::Budget: out << r.budget.Msat(); break;
        case RoIAxis::Gamma: out << FormatDouble(ToDouble(r.gamma)); break;
        }
        out << ',' << ToString(r.protocol) << ',' << r.roi.roi << ',' << FormatDouble(r.roi.log_modulus_roi) << ','
            << r.roi.n_tx << ',' << r.roi.total_griefing_penalty.Msat() << ',' << r.status << '\n';
    }
}

double LinearFitR2(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "need two or more points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (syy == 0) return 1.0;
    return sxy * sxy / (sxx * syy);
}

} // namespace htlcgp
