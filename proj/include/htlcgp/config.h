// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef HTLCGP_CONFIG_H
#define HTLCGP_CONFIG_H

#include <htlcgp/experiment.h>
#include <htlcgp/graph.h>
#include <htlcgp/penalty.h>
#include <htlcgp/protocol.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace htlcgp {

enum class ConfigFormat { Toml, Json };

/**
 * A TOML or JSON document held as JSON, with the source line of every key
 * and array element so errors can point at the offending line.
 */
class ConfigDocument
{
public:
    using Pointer = nlohmann::json::json_pointer;

    static ConfigDocument Parse(std::string_view text, ConfigFormat format, std::string source_name);
    /** Format from the extension (.toml, .json), else sniffed from the first character. */
    static ConfigDocument Load(const std::filesystem::path& path);

    const nlohmann::json& Root() const { return m_root; }
    const std::string& SourceName() const { return m_source; }
    const std::filesystem::path& BaseDir() const { return m_base_dir; }

    /** Line of the value at `where`, or of its closest ancestor that has one; 0 if unknown. */
    int LineOf(const Pointer& where) const;
    /** Throws ParseError "<source>:<line>: <what>". */
    [[noreturn]] void Fail(const Pointer& where, const std::string& what) const;

private:
    nlohmann::json m_root;
    std::map<std::string, int> m_lines; //!< keyed by JSON pointer text
    std::string m_source;
    std::filesystem::path m_base_dir;
};

/** Everything one `simulate` run needs. */
struct Scenario {
    PathPlan plan;
    NetworkGraph graph;
    BehaviorMap behaviors;
    Protocol protocol{Protocol::HtlcGp};
    SimulationConfig simulation;
};

/**
 * Scenario schema (amounts in msat or with sat/btc suffix, durations in minutes, gamma per minute):
 *   seed, protocol
 *   [payment]    path = [..] or hops = n, amount, fee or fees = [..], gamma, delta, t_base, k
 *   [network]    balance (each side of every path channel)
 *   [behaviors]  <node> = "withhold_preimage" | ...
 *   [[faults]]   position, kind, amount, locktime
 *   [simulation] latency, receiver_wait, onchain_fee
 */
Scenario ReadScenario(const ConfigDocument& doc);

nlohmann::json ToJson(const Scenario& scenario);

/** Overlay the keys present in `doc` on `base`. Key names follow ExperimentConfig fields. */
ExperimentConfig ReadExperimentConfig(const ConfigDocument& doc, ExperimentConfig base = {});

} // namespace htlcgp

#endif // HTLCGP_CONFIG_H
