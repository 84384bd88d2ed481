// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <htlcgp/config.h>
#include <htlcgp/contract.h>
#include <htlcgp/error.h>
#include <htlcgp/experiment.h>
#include <htlcgp/protocol.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace htlcgp;

namespace {

constexpr int kExitConfigError = 2;

/** HTLCGP_SEED beats the config file; an explicit --seed beats both. */
std::uint64_t ResolveSeed(std::uint64_t from_config, const std::optional<std::uint64_t>& flag)
{
    if (flag) return *flag;
    if (const char* env = std::getenv("HTLCGP_SEED"); env && *env) {
        std::uint64_t seed = 0;
        const std::string_view text{env};
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
        if (ec != std::errc{} || end != text.data() + text.size()) {
            throw Error(ErrorCode::ParseError, "HTLCGP_SEED: '" + std::string{text} + "' is not an unsigned integer");
        }
        return seed;
    }
    return from_config;
}

nlohmann::json Manifest(std::string_view subcommand, nlohmann::json config, std::uint64_t seed,
                        const std::vector<fs::path>& outputs)
{
    nlohmann::json paths = nlohmann::json::array();
    for (const fs::path& p : outputs) paths.push_back(p.filename().generic_string());
    return {{"tool", "htlcgp"},
            {"version", HTLCGP_VERSION},
            {"subcommand", subcommand},
            {"config", std::move(config)},
            {"seed", seed},
            {"outputs", paths}};
}

void WriteFile(const fs::path& path, const std::string& content)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(ErrorCode::InvalidArgument, "failed writing " + path.string());
}

CLI::Validator ProtocolName()
{
    return CLI::Validator(
        [](std::string& text) {
            try {
                ParseProtocol(text);
            } catch (const Error&) {
                return std::string{"unknown protocol '" + text + "' (htlc, htlc1, htlc-gp)"};
            }
            return std::string{};
        },
        "PROTOCOL");
}

template <typename Parse>
CLI::Validator Parses(Parse parse, std::string name)
{
    return CLI::Validator(
        [parse](std::string& text) {
            try {
                parse(text);
            } catch (const Error& e) {
                return std::string{e.what()};
            }
            return std::string{};
        },
        std::move(name));
}

/** "4:20" or "4,6,8". */
std::vector<std::size_t> ParseLengths(const std::string& text)
{
    std::vector<std::size_t> out;
    const auto number = [&](std::string_view part) {
        std::size_t v = 0;
        const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc{} || end != part.data() + part.size() || v == 0) {
            throw Error(ErrorCode::InvalidArgument, "bad path length '" + std::string{part} + "'");
        }
        return v;
    };
    if (const auto colon = text.find(':'); colon != std::string::npos) {
        const std::size_t lo = number(std::string_view{text}.substr(0, colon));
        const std::size_t hi = number(std::string_view{text}.substr(colon + 1));
        for (std::size_t n = lo; n <= hi; ++n) out.push_back(n);
    } else {
        std::stringstream ss{text};
        for (std::string part; std::getline(ss, part, ',');) out.push_back(number(part));
    }
    if (out.empty()) throw Error(ErrorCode::InvalidArgument, "path length range '" + text + "' is empty");
    return out;
}

struct SimulateArgs {
    std::string scenario;
    std::string protocol;
    std::string out_dir{"htlcgp-out"};
    std::optional<std::uint64_t> seed;
};

int RunSimulate(const SimulateArgs& args)
{
    Scenario scenario = ReadScenario(ConfigDocument::Load(args.scenario));
    if (!args.protocol.empty()) scenario.protocol = ParseProtocol(args.protocol);
    scenario.simulation.seed = ResolveSeed(scenario.simulation.seed, args.seed);

    NetworkGraph graph = scenario.graph;
    const PaymentOutcome outcome =
        ExecutePayment(graph, scenario.plan, scenario.behaviors, scenario.protocol, scenario.simulation);

    const fs::path out{args.out_dir};
    const std::vector<fs::path> outputs{out / "trace.json", out / "ledger.json"};
    const nlohmann::json manifest = Manifest("simulate", ToJson(scenario), scenario.simulation.seed, outputs);

    nlohmann::json events = nlohmann::json::array();
    for (const TraceEvent& e : outcome.trace) events.push_back(ToJson(e));
    nlohmann::json contracts = nlohmann::json::array();
    for (const ContractEvent& e : outcome.contract_log) contracts.push_back(ToJson(e));
    const nlohmann::json trace{{"manifest", manifest}, {"events", events}, {"contracts", contracts}};
    const nlohmann::json ledger{{"manifest", manifest},
                                {"outcome", OutcomeSummary(outcome)},
                                {"ledger", ToJson(outcome.ledger, scenario.plan.path)}};
    WriteFile(outputs[0], trace.dump(2) + "\n");
    WriteFile(outputs[1], ledger.dump(2) + "\n");
    std::cout << OutcomeSummary(outcome).dump() << '\n';
    return 0;
}

/** Flags shared by attack and sweep; every one overrides the config file. */
struct ExperimentArgs {
    std::string config_file;
    std::string out_dir{"htlcgp-out"};
    std::optional<std::uint64_t> seed;
    std::string gamma;
    std::string snapshot;
    bool synthetic{false};
    std::string victim;
    std::string attacker;
    std::optional<int> strategy;
    std::string budget;
    std::string tx_value;
    std::vector<std::string> protocols;
    std::string sweep{"all"};
    std::string ratio_vs;
    std::string lengths;
    std::vector<std::string> gammas;
    std::string alpha;
    std::optional<std::size_t> path_length;
};

ExperimentConfig ResolveExperiment(const ExperimentArgs& args)
{
    ExperimentConfig c;
    if (!args.config_file.empty()) c = ReadExperimentConfig(ConfigDocument::Load(args.config_file));
    if (!args.gamma.empty()) c.gamma = PenaltyRate{ParseRational(args.gamma)}.Value();
    if (!args.snapshot.empty()) c.snapshot = fs::path{args.snapshot};
    if (args.synthetic) c.snapshot.reset();
    if (!args.victim.empty()) c.victim = NodeId{args.victim};
    if (!args.attacker.empty()) c.attacker = NodeId{args.attacker};
    if (args.strategy) c.strategy = *args.strategy;
    if (!args.budget.empty()) c.budget = ParseAmount(args.budget);
    if (!args.tx_value.empty()) c.tx_value = ParseAmount(args.tx_value);
    if (!args.protocols.empty()) {
        c.protocols.clear();
        for (const std::string& p : args.protocols) c.protocols.push_back(ParseProtocol(p));
    }
    if (!args.lengths.empty()) c.path_length_sweep = ParseLengths(args.lengths);
    if (!args.gammas.empty()) {
        c.ratio_gamma_sweep.clear();
        for (const std::string& g : args.gammas) c.ratio_gamma_sweep.push_back(ParseRational(g));
    }
    if (!args.alpha.empty()) c.ratio_alpha = ParseAmount(args.alpha);
    if (args.path_length) c.ratio_path_length = *args.path_length;
    c.seed = ResolveSeed(c.seed, args.seed);
    c.Validate();
    return c;
}

int RunAttack(const ExperimentArgs& args)
{
    const ExperimentConfig config = ResolveExperiment(args);
    const AttackSetting setting = PrepareAttackSetting(config);
    const fs::path out{args.out_dir};

    struct Axis {
        std::string_view name;
        RoIAxis axis;
        std::string_view file;
    };
    const Axis axes[] = {{"value", RoIAxis::TxValue, "roi_vs_value.csv"},
                         {"budget", RoIAxis::Budget, "roi_vs_budget.csv"},
                         {"gamma", RoIAxis::Gamma, "roi_vs_gamma.csv"}};
    std::vector<const Axis*> chosen;
    for (const Axis& a : axes) {
        if (args.sweep == "all" || args.sweep == a.name) chosen.push_back(&a);
    }
    std::vector<fs::path> outputs;
    for (const Axis* a : chosen) outputs.push_back(out / a->file);
    outputs.push_back(out / "attack_summary.json");
    const nlohmann::json manifest = Manifest("attack", ToJson(config), config.seed, outputs);

    for (std::size_t i = 0; i < chosen.size(); ++i) {
        std::ostringstream csv;
        WriteRoICsv(csv, manifest, SweepRoI(setting, config, chosen[i]->axis));
        WriteFile(outputs[i], csv.str());
    }

    AttackParams params;
    params.budget = config.budget;
    params.tx_value = config.tx_value;
    params.gamma = PenaltyRate{config.gamma};
    params.delta = config.delta;
    params.t_base = config.t_base;
    params.k = config.k;
    params.attacker_policy = config.attacker_policy;
    nlohmann::json points = nlohmann::json::array();
    for (Protocol protocol : config.protocols) {
        params.protocol = protocol;
        nlohmann::json point{{"protocol", ToString(protocol)}};
        try {
            const AttackReport report = config.strategy == 2
                                            ? AttackExistingChannels(setting.graph, *setting.attacker, setting.targets, params)
                                            : AttackNewChannels(setting.graph, setting.targets, params);
            point["status"] = "ok";
            point["report"] = ToJson(report);
        } catch (const Error& e) {
            if (e.Code() != ErrorCode::BudgetTooSmall) throw;
            point["status"] = ErrorCodeName(e.Code());
        }
        points.push_back(point);
    }
    nlohmann::json summary{{"manifest", manifest}, {"victim", setting.targets.victim.Str()}, {"points", points}};
    WriteFile(outputs.back(), summary.dump(2) + "\n");
    for (const nlohmann::json& p : points) {
        std::cout << p["protocol"].get<std::string>() << ": "
                  << (p.contains("report") ? "roi_msat=" + std::to_string(p["report"]["roi_msat"].get<SignedMsat>())
                                           : p["status"].get<std::string>())
                  << '\n';
    }
    return 0;
}

int RunSweep(const ExperimentArgs& args)
{
    const ExperimentConfig config = ResolveExperiment(args);
    const bool by_gamma = args.ratio_vs == "gamma";
    const fs::path out{args.out_dir};
    const std::vector<fs::path> outputs{out / (by_gamma ? "ratio_vs_gamma.csv" : "ratio_vs_pathlen.csv")};
    const nlohmann::json manifest = Manifest("sweep", ToJson(config), config.seed, outputs);
    const std::vector<RatioRow> rows = by_gamma ? SweepRatioVsGamma(config) : SweepRatioVsPathLength(config);
    std::ostringstream csv;
    WriteRatioCsv(csv, manifest, rows, by_gamma);
    WriteFile(outputs[0], csv.str());
    for (const RatioRow& r : rows) {
        std::cout << (by_gamma ? FormatDouble(ToDouble(r.gamma)) : std::to_string(r.path_length)) << ' '
                  << FormatDouble(ToDouble(r.multiple)) << '\n';
    }
    if (!by_gamma && rows.size() >= 2) {
        std::vector<double> x;
        std::vector<double> y;
        for (const RatioRow& r : rows) {
            x.push_back(static_cast<double>(r.path_length));
            y.push_back(ToDouble(r.multiple));
        }
        std::cout << "linear fit R^2 " << FormatDouble(LinearFitR2(x, y)) << '\n';
    }
    return 0;
}

void AddExperimentFlags(CLI::App& cmd, ExperimentArgs& args)
{
    cmd.add_option("--config", args.config_file, "TOML or JSON experiment config")->check(CLI::ExistingFile);
    cmd.add_option("--out", args.out_dir, "output directory")->capture_default_str();
    cmd.add_option("--seed", args.seed, "seed (overrides HTLCGP_SEED and the config)");
    cmd.add_option("--gamma", args.gamma, "griefing-penalty rate per minute")->check(Parses(ParseRational, "RATE"));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"HTLC-GP payment, attack and investment simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", HTLCGP_VERSION);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "run one payment scenario");
    simulate->add_option("scenario", sim.scenario, "scenario file (.toml or .json)")->required()->check(CLI::ExistingFile);
    simulate->add_option("--protocol", sim.protocol, "htlc, htlc1 or htlc-gp (overrides the scenario)")->check(ProtocolName());
    simulate->add_option("--out", sim.out_dir, "output directory")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "seed (overrides HTLCGP_SEED and the scenario)");

    ExperimentArgs attack_args;
    CLI::App* attack = app.add_subcommand("attack", "griefing attack RoI on a snapshot or the synthetic topology");
    AddExperimentFlags(*attack, attack_args);
    auto* snapshot = attack->add_option("--snapshot", attack_args.snapshot, "topology snapshot JSON")->check(CLI::ExistingFile);
    attack->add_flag("--synthetic", attack_args.synthetic, "use the built-in hub-and-spoke topology")->excludes(snapshot);
    attack->add_option("--strategy", attack_args.strategy, "1: new channels, 2: existing channels")->check(CLI::IsMember({1, 2}));
    attack->add_option("--budget", attack_args.budget, "attacker budget")->check(Parses(ParseAmount, "AMOUNT"));
    attack->add_option("--tx-value", attack_args.tx_value, "value per griefed payment")->check(Parses(ParseAmount, "AMOUNT"));
    attack->add_option("--protocol", attack_args.protocols, "protocol (repeatable)")->check(ProtocolName());
    attack->add_option("--victim", attack_args.victim, "victim node id");
    attack->add_option("--attacker", attack_args.attacker, "attacker node id for strategy 2");
    attack->add_option("--sweep", attack_args.sweep, "value, budget, gamma or all")
        ->check(CLI::IsMember({"value", "budget", "gamma", "all"}))
        ->capture_default_str();

    ExperimentArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "investment multiple of HTLC-GP over HTLC");
    AddExperimentFlags(*sweep, sweep_args);
    sweep->add_option("--ratio-vs", sweep_args.ratio_vs, "pathlen or gamma")
        ->required()
        ->check(CLI::IsMember({"pathlen", "gamma"}));
    sweep->add_option("--lengths", sweep_args.lengths, "path lengths, \"4:20\" or \"4,8,12\"");
    sweep->add_option("--gammas", sweep_args.gammas, "rates for the gamma sweep")->delimiter(',')->check(Parses(ParseRational, "RATE"));
    sweep->add_option("--alpha", sweep_args.alpha, "payment amount")->check(Parses(ParseAmount, "AMOUNT"));
    sweep->add_option("--path-length", sweep_args.path_length, "path length for the gamma sweep")->check(CLI::PositiveNumber);

    std::string kind;
    CLI::App* render = app.add_subcommand("render-script", "print a witness script template");
    render->add_option("--kind", kind, "cancellation or payment")->required()->check(CLI::IsMember({"cancellation", "payment"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return RunSimulate(sim);
        if (attack->parsed()) return RunAttack(attack_args);
        if (sweep->parsed()) return RunSweep(sweep_args);
        std::cout << RenderScriptTemplate(kind == "payment" ? ContractKind::GpPayment : ContractKind::GpCancellation);
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        const bool config_error = e.Code() == ErrorCode::ParseError || e.Code() == ErrorCode::InvalidArgument ||
                                  e.Code() == ErrorCode::InvalidBase || e.Code() == ErrorCode::ZeroAmount;
        return config_error ? kExitConfigError : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
