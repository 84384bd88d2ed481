// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "cli_runner.h"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <sstream>

using namespace htlcgp::test;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::path{HTLCGP_TEST_WORKDIR} / "cli";
const std::string kScenarios = std::string{HTLCGP_SOURCE_DIR} + "/scenarios/";

/** roi_msat by (protocol, axis value) from an RoI CSV. */
std::map<std::pair<std::string, std::string>, long long> RoiColumn(const std::string& csv)
{
    std::map<std::pair<std::string, std::string>, long long> out;
    std::istringstream lines{csv};
    std::string line;
    std::getline(lines, line); // manifest
    std::getline(lines, line); // header
    while (std::getline(lines, line)) {
        std::vector<std::string> cells;
        std::stringstream ss{line};
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        REQUIRE(cells.size() == 7);
        out[{cells[1], cells[0]}] = std::stoll(cells[2]);
    }
    return out;
}

} // namespace

TEST_CASE("simulate writes trace and ledger that end in penalty settlement")
{
    const fs::path out = kWork / "grief";
    const CliResult r = RunCli("simulate " + kScenarios + "griefing.toml --out " + out.string(), kWork);
    REQUIRE(r.exit_code == 0);
    CHECK(r.stdout_text.find("\"kind\":\"griefed\"") != std::string::npos);
    const auto trace = nlohmann::json::parse(ReadText(out / "trace.json"));
    CHECK(trace["manifest"]["subcommand"] == "simulate");
    CHECK(trace["manifest"]["seed"] == 7);
    CHECK(trace["events"].back()["action"] == "accept_compensation");
    const auto& contracts = trace["contracts"];
    bool penalty_seen = false;
    for (const auto& c : contracts) {
        if (c["kind"] == "gp_cancellation" && c["credited_party"] == "alice") penalty_seen = true;
    }
    CHECK(penalty_seen);
    const auto ledger = nlohmann::json::parse(ReadText(out / "ledger.json"));
    CHECK(ledger["ledger"]["nodes"]["erin"]["delta_msat"].get<long long>() < 0);
}

TEST_CASE("simulate is byte-identical for the same seed and honours HTLCGP_SEED")
{
    const fs::path out = kWork / "det";
    const std::string cmd = "simulate " + kScenarios + "reverse_griefing.json --out " + out.string();
    REQUIRE(RunCli(cmd, kWork).exit_code == 0);
    const std::string first = ReadText(out / "trace.json");
    REQUIRE(RunCli(cmd, kWork).exit_code == 0);
    CHECK(ReadText(out / "trace.json") == first);
    REQUIRE(RunCli(cmd, kWork, "HTLCGP_SEED=99").exit_code == 0);
    const std::string reseeded = ReadText(out / "trace.json");
    CHECK(reseeded != first);
    CHECK(nlohmann::json::parse(reseeded)["manifest"]["seed"] == 99);
    REQUIRE(RunCli(cmd + " --seed 11", kWork, "HTLCGP_SEED=99").exit_code == 0);
    CHECK(ReadText(out / "trace.json") == first);
}

TEST_CASE("bad input exits nonzero")
{
    CHECK(RunCli("simulate " + kScenarios + "griefing.toml --protocol lightning", kWork).exit_code != 0);
    CHECK(RunCli("render-script --kind htlc", kWork).exit_code != 0);
    CHECK(RunCli("sweep --ratio-vs pathlen --lengths 9:4", kWork).exit_code != 0);
    CHECK(RunCli("attack --strategy 3", kWork).exit_code != 0);
    std::ofstream{kWork / "broken.toml"} << "[payment]\nhops = 2\namount = 5\nfoo = 1\n";
    const CliResult r = RunCli("simulate " + (kWork / "broken.toml").string(), kWork);
    CHECK(r.exit_code == 2);
    CHECK(r.stderr_text.find("broken.toml:4:") != std::string::npos);
}

TEST_CASE("render-script prints the golden templates")
{
    const std::string golden = std::string{HTLCGP_TEST_DATA} + "/golden/";
    CHECK(RunCli("render-script --kind cancellation", kWork).stdout_text == ReadText(golden + "cancellation_contract.txt"));
    CHECK(RunCli("render-script --kind payment", kWork).stdout_text == ReadText(golden + "payment_contract.txt"));
}

TEST_CASE("attack csv trends")
{
    const fs::path s1 = kWork / "s1";
    const fs::path s2 = kWork / "s2";
    const fs::path zero = kWork / "zero";
    REQUIRE(RunCli("attack --synthetic --strategy 1 --out " + s1.string(), kWork).exit_code == 0);
    REQUIRE(RunCli("attack --synthetic --strategy 2 --out " + s2.string(), kWork).exit_code == 0);
    REQUIRE(RunCli("attack --synthetic --strategy 1 --gamma 0 --out " + zero.string(), kWork).exit_code == 0);
    for (const char* file : {"roi_vs_value.csv", "roi_vs_budget.csv", "roi_vs_gamma.csv"}) {
        CAPTURE(file);
        const auto one = RoiColumn(ReadText(s1 / file));
        const auto two = RoiColumn(ReadText(s2 / file));
        for (const auto& [key, roi] : one) {
            if (key.first == "htlc") CHECK(roi >= 0);
        }
        for (const auto& [key, roi] : two) {
            if (key.first == "htlc") CHECK(roi >= 0);
        }
    }
    // with gamma 0 the htlc-gp rows equal the htlc rows
    const auto z = RoiColumn(ReadText(zero / "roi_vs_value.csv"));
    for (const auto& [key, roi] : z) {
        if (key.first == "htlc-gp") CHECK(roi == z.at({"htlc", key.second}));
    }
    const auto summary1 = nlohmann::json::parse(ReadText(s1 / "attack_summary.json"));
    const auto summary2 = nlohmann::json::parse(ReadText(s2 / "attack_summary.json"));
    const auto gp_roi = [](const nlohmann::json& s) {
        for (const auto& p : s["points"]) {
            if (p["protocol"] == "htlc-gp") return p["report"]["roi_msat"].get<long long>();
        }
        FAIL("no htlc-gp point");
        return 0LL;
    };
    CHECK(gp_roi(summary1) < 0);
    CHECK(gp_roi(summary2) <= gp_roi(summary1));
}

TEST_CASE("sweep csv carries the manifest and one row per point")
{
    const fs::path out = kWork / "sweep";
    REQUIRE(RunCli("sweep --ratio-vs gamma --gammas 1e-4,1e-3,1e-2 --out " + out.string(), kWork).exit_code == 0);
    std::istringstream lines{ReadText(out / "ratio_vs_gamma.csv")};
    std::string line;
    std::getline(lines, line);
    CHECK(line.starts_with("# manifest: {"));
    const auto manifest = nlohmann::json::parse(line.substr(12));
    CHECK(manifest["tool"] == "htlcgp");
    CHECK(manifest["subcommand"] == "sweep");
    CHECK(manifest["config"]["ratio_gamma_sweep"].size() == 3);
    std::getline(lines, line);
    CHECK(line == "gamma,multiple,multiple_exact");
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 3);
}
