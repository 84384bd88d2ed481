// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef HTLCGP_EXPERIMENT_H
#define HTLCGP_EXPERIMENT_H

#include <htlcgp/amount.h>
#include <htlcgp/attack.h>
#include <htlcgp/protocol.h>

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace htlcgp {

/**
 * Every knob of the attack and investment experiments. Timelock defaults
 * (t_base 396 min, delta 4 min, k 4) are the calibration shared by all sweeps.
 */
struct ExperimentConfig {
    std::vector<Protocol> protocols{Protocol::Htlc, Protocol::HtlcGp};
    int strategy{1};

    Rational gamma{1, 1000};
    Amount tx_value{10'000'000};  //!< 10000 sat
    Amount budget{3'000'000'000}; //!< 0.03 BTC
    std::vector<Amount> tx_value_sweep;
    std::vector<Amount> budget_sweep;
    std::vector<Rational> gamma_sweep;

    Amount ratio_alpha{50'000'000}; //!< 50000 sat
    std::size_t ratio_path_length{20};
    std::vector<std::size_t> path_length_sweep;
    std::vector<Rational> ratio_gamma_sweep;

    std::uint32_t k{4};
    Duration delta{4};
    Duration t_base{396};
    FeePolicy attacker_policy{Amount{1000}, Rational{1, 1'000'000}};

    std::optional<std::filesystem::path> snapshot; //!< synthetic topology when absent
    HubAndSpokeSpec synthetic;
    std::optional<NodeId> victim;   //!< top betweenness node when absent
    std::optional<NodeId> attacker; //!< strategy 2; resident attacker of the synthetic topology when absent
    std::uint64_t seed{0};

    ExperimentConfig();
    /** Throws InvalidArgument when a sweep is empty or a value is out of range. */
    void Validate() const;
};

nlohmann::json ToJson(const ExperimentConfig& config);

struct RatioRow {
    std::size_t path_length{0};
    Rational gamma;
    Rational multiple;
};

std::vector<RatioRow> SweepRatioVsPathLength(const ExperimentConfig& config);
std::vector<RatioRow> SweepRatioVsGamma(const ExperimentConfig& config);

enum class RoIAxis { TxValue, Budget, Gamma };

struct RoIRow {
    RoIAxis axis{RoIAxis::TxValue};
    Amount tx_value;
    Amount budget;
    Rational gamma;
    Protocol protocol{Protocol::Htlc};
    RoIResult roi;   //!< zero when the attack cannot be mounted
    std::string status; //!< "ok" or the error code that prevented the attack
};

/** Graph, victim and attack targets the RoI experiments run against. */
struct AttackSetting {
    NetworkGraph graph;
    AttackTargets targets;
    std::optional<NodeId> attacker;
};

AttackSetting PrepareAttackSetting(const ExperimentConfig& config);

/** One attack at the given point; BudgetTooSmall is reported as a zero row rather than thrown. */
RoIRow RunRoIPoint(const AttackSetting& setting, const ExperimentConfig& config, RoIAxis axis, Amount tx_value,
                   Amount budget, const Rational& gamma, Protocol protocol);
std::vector<RoIRow> SweepRoI(const AttackSetting& setting, const ExperimentConfig& config, RoIAxis axis);

/** Shortest round-trip decimal text for a double. */
std::string FormatDouble(double value);

/** "# manifest: <json>" then the header, then rows. */
void WriteRatioCsv(std::ostream& out, const nlohmann::json& manifest, const std::vector<RatioRow>& rows, bool by_gamma);
void WriteRoICsv(std::ostream& out, const nlohmann::json& manifest, const std::vector<RoIRow>& rows);

/** Coefficient of determination of a least-squares line through (x, y). */
double LinearFitR2(const std::vector<double>& x, const std::vector<double>& y);

} // namespace htlcgp

#endif // HTLCGP_EXPERIMENT_H
