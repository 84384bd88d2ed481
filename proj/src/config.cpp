// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <htlcgp/config.h>
#include <htlcgp/error.h>

#include <toml.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <type_traits>

namespace htlcgp {
namespace {

using Pointer = ConfigDocument::Pointer;
using Json = nlohmann::json;

struct LineCounter {
    int line{1};
    int last_token_line{1}; //!< line of the most recent non-blank character
};

/** Forwards characters to the JSON parser and counts lines as they are consumed. */
class CountingIterator
{
public:
    using iterator_category = std::input_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    CountingIterator(std::string_view::const_iterator it, LineCounter* counter) : m_it{it}, m_counter{counter} {}

    reference operator*() const { return *m_it; }
    CountingIterator& operator++()
    {
        if (*m_it == '\n') {
            ++m_counter->line;
        } else if (!std::isspace(static_cast<unsigned char>(*m_it))) {
            m_counter->last_token_line = m_counter->line;
        }
        ++m_it;
        return *this;
    }
    CountingIterator operator++(int)
    {
        CountingIterator old = *this;
        ++*this;
        return old;
    }
    friend bool operator==(const CountingIterator& a, const CountingIterator& b) { return a.m_it == b.m_it; }

private:
    std::string_view::const_iterator m_it;
    LineCounter* m_counter;
};

/** Builds the DOM and records the line of every key and array element. */
class LineSax : public nlohmann::json_sax<Json>
{
public:
    LineSax(Json& root, std::map<std::string, int>& lines, const LineCounter& counter, std::string source)
        : m_root{root}, m_lines{lines}, m_counter{counter}, m_source{std::move(source)} {}

    bool null() override { return Put(nullptr); }
    bool boolean(bool v) override { return Put(v); }
    bool number_integer(number_integer_t v) override { return Put(v); }
    bool number_unsigned(number_unsigned_t v) override { return Put(v); }
    bool number_float(number_float_t v, const string_t&) override { return Put(v); }
    bool string(string_t& v) override { return Put(v); }
    bool binary(binary_t&) override { return false; }
    bool start_object(std::size_t) override { return Open(Json::object()); }
    bool end_object() override { return Close(); }
    bool start_array(std::size_t) override { return Open(Json::array()); }
    bool end_array() override { return Close(); }
    bool key(string_t& k) override
    {
        m_key = k;
        m_key_line = m_counter.last_token_line;
        if (m_stack.back()->contains(k)) {
            throw Error(ErrorCode::ParseError, m_source + ":" + std::to_string(m_key_line) + ": duplicate key '" + k + "'");
        }
        return true;
    }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) override
    {
        std::string what = ex.what();
        if (const auto colon = what.rfind(": "); colon != std::string::npos) what = what.substr(colon + 2);
        throw Error(ErrorCode::ParseError, m_source + ":" + std::to_string(m_counter.line) + ": " + what);
    }

private:
    Json* Insert(Json value)
    {
        if (m_stack.empty()) {
            m_root = std::move(value);
            m_lines[""] = m_counter.last_token_line;
            return &m_root;
        }
        Json& top = *m_stack.back();
        Pointer where;
        Json* slot = nullptr;
        if (top.is_object()) {
            where = m_paths.back() / m_key;
            top[m_key] = std::move(value);
            slot = &top[m_key];
            m_lines[where.to_string()] = m_key_line;
        } else {
            where = m_paths.back() / top.size();
            top.push_back(std::move(value));
            slot = &top.back();
            m_lines[where.to_string()] = m_counter.last_token_line;
        }
        m_last_path = where;
        return slot;
    }
    template <typename V>
    bool Put(V&& v)
    {
        Insert(Json(std::forward<V>(v)));
        return true;
    }
    bool Open(Json container)
    {
        const bool is_root = m_stack.empty();
        Json* slot = Insert(std::move(container));
        m_stack.push_back(slot);
        m_paths.push_back(is_root ? Pointer{} : m_last_path);
        return true;
    }
    bool Close()
    {
        m_stack.pop_back();
        m_paths.pop_back();
        return true;
    }

    Json& m_root;
    std::map<std::string, int>& m_lines;
    const LineCounter& m_counter;
    std::string m_source;
    std::vector<Json*> m_stack;
    std::vector<Pointer> m_paths;
    Pointer m_last_path;
    std::string m_key;
    int m_key_line{0};
};

Json FromToml(const toml::node& node, const Pointer& where, std::map<std::string, int>& lines)
{
    lines[where.to_string()] = static_cast<int>(node.source().begin.line);
    if (const auto* table = node.as_table()) {
        Json out = Json::object();
        for (auto&& [key, value] : *table) {
            const std::string k{key.str()};
            out[k] = FromToml(value, where / k, lines);
        }
        return out;
    }
    if (const auto* array = node.as_array()) {
        Json out = Json::array();
        for (std::size_t i = 0; i < array->size(); ++i) out.push_back(FromToml(*array->get(i), where / i, lines));
        return out;
    }
    if (const auto* v = node.as_string()) return Json(v->get());
    if (const auto* v = node.as_integer()) return Json(v->get());
    if (const auto* v = node.as_floating_point()) return Json(v->get());
    if (const auto* v = node.as_boolean()) return Json(v->get());
    std::ostringstream text;
    node.visit([&](auto&& n) { text << n; });
    return Json(text.str());
}

std::string Join(const std::vector<std::string_view>& keys)
{
    std::string out;
    for (std::string_view k : keys) {
        if (!out.empty()) out += ", ";
        out += k;
    }
    return out;
}

/** Typed access to one table of the document. */
class Section
{
public:
    Section(const ConfigDocument& doc, Pointer where, std::vector<std::string_view> allowed)
        : m_doc{doc}, m_where{std::move(where)}
    {
        const Json& node = m_doc.Root().at(m_where);
        if (!node.is_object()) m_doc.Fail(m_where, "expected a table");
        for (const auto& [key, _] : node.items()) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                m_doc.Fail(m_where / key, "unknown key '" + key + "' (expected one of: " + Join(allowed) + ")");
            }
        }
    }

    bool Has(const std::string& key) const { return Node().contains(key); }
    Pointer At(const std::string& key) const { return m_where / key; }
    const Json& Get(const std::string& key) const { return Node().at(key); }

    std::optional<Section> Sub(const std::string& key, std::vector<std::string_view> allowed) const
    {
        if (!Has(key)) return std::nullopt;
        return Section{m_doc, At(key), std::move(allowed)};
    }

    std::string String(const std::string& key) const { return StringAt(At(key)); }
    std::string StringAt(const Pointer& p) const
    {
        const Json& v = m_doc.Root().at(p);
        if (!v.is_string()) m_doc.Fail(p, "expected a string");
        return v.get<std::string>();
    }
    std::uint64_t Unsigned(const std::string& key) const { return UnsignedAt(At(key)); }
    std::uint64_t UnsignedAt(const Pointer& p) const
    {
        const Json& v = m_doc.Root().at(p);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
        m_doc.Fail(p, "expected a non-negative integer");
    }
    bool Bool(const std::string& key) const
    {
        const Json& v = Get(key);
        if (!v.is_boolean()) m_doc.Fail(At(key), "expected true or false");
        return v.get<bool>();
    }
    Duration Minutes(const std::string& key) const { return Duration{static_cast<std::int64_t>(Unsigned(key))}; }
    Amount AmountValue(const std::string& key) const { return AmountAt(At(key)); }
    Amount AmountAt(const Pointer& p) const
    {
        const Json& v = m_doc.Root().at(p);
        if (v.is_number_integer()) return Amount{UnsignedAt(p)};
        if (!v.is_string()) m_doc.Fail(p, "expected an amount (msat integer or string such as \"10sat\")");
        return Guard(p, [&] { return ParseAmount(v.get<std::string>()); });
    }
    Rational RationalValue(const std::string& key) const { return RationalAt(At(key)); }
    Rational RationalAt(const Pointer& p) const
    {
        const Json& v = m_doc.Root().at(p);
        if (v.is_number_integer()) return Rational{v.get<std::int64_t>()};
        if (v.is_number_float()) return Guard(p, [&] { return RationalFromDouble(v.get<double>()); });
        if (!v.is_string()) m_doc.Fail(p, "expected a number");
        return Guard(p, [&] { return ParseRational(v.get<std::string>()); });
    }
    PenaltyRate Rate(const std::string& key) const
    {
        return Guard(At(key), [&] { return PenaltyRate{RationalValue(key)}; });
    }
    /** Non-empty array under key, each element read with `read(pointer)`. */
    template <typename Read>
    auto List(const std::string& key, Read read) const
    {
        const Json& v = Get(key);
        if (!v.is_array()) m_doc.Fail(At(key), "expected an array");
        if (v.empty()) m_doc.Fail(At(key), "list must not be empty");
        std::vector<decltype(read(Pointer{}))> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(read(At(key) / i));
        return out;
    }

    template <typename Fn>
    std::invoke_result_t<Fn> Guard(const Pointer& p, Fn fn) const
    {
        try {
            return fn();
        } catch (const Error& e) {
            if (e.Code() == ErrorCode::ParseError && std::string_view{e.what()}.find(m_doc.SourceName()) == 0) throw;
            m_doc.Fail(p, e.what());
        }
    }

private:
    const Json& Node() const { return m_doc.Root().at(m_where); }

    const ConfigDocument& m_doc;
    Pointer m_where;
};

} // namespace

ConfigDocument ConfigDocument::Parse(std::string_view text, ConfigFormat format, std::string source_name)
{
    ConfigDocument doc;
    doc.m_source = std::move(source_name);
    if (format == ConfigFormat::Toml) {
        try {
            const toml::table table = toml::parse(text, std::string_view{doc.m_source});
            doc.m_root = FromToml(table, Pointer{}, doc.m_lines);
            doc.m_lines[""] = 1;
        } catch (const toml::parse_error& e) {
            throw Error(ErrorCode::ParseError, doc.m_source + ":" + std::to_string(e.source().begin.line) + ": " +
                                                   std::string{e.description()});
        }
    } else {
        LineCounter counter;
        LineSax sax{doc.m_root, doc.m_lines, counter, doc.m_source};
        Json::sax_parse(CountingIterator{text.begin(), &counter}, CountingIterator{text.end(), &counter}, &sax);
    }
    return doc;
}

ConfigDocument ConfigDocument::Load(const std::filesystem::path& path)
{
    std::ifstream in{path, std::ios::binary};
    if (!in) throw Error(ErrorCode::ParseError, path.string() + ": cannot open file");
    const std::string text{std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
    ConfigFormat format = ConfigFormat::Toml;
    if (path.extension() == ".json") {
        format = ConfigFormat::Json;
    } else if (path.extension() != ".toml") {
        const auto first = std::find_if(text.begin(), text.end(), [](char c) { return !std::isspace(static_cast<unsigned char>(c)); });
        if (first != text.end() && (*first == '{' || *first == '[')) format = ConfigFormat::Json;
    }
    ConfigDocument doc = Parse(text, format, path.string());
    doc.m_base_dir = path.parent_path();
    return doc;
}

int ConfigDocument::LineOf(const Pointer& where) const
{
    Pointer p = where;
    while (true) {
        if (const auto it = m_lines.find(p.to_string()); it != m_lines.end()) return it->second;
        if (p.empty()) return 0;
        p = p.parent_pointer();
    }
}

void ConfigDocument::Fail(const Pointer& where, const std::string& what) const
{
    const std::string key = where.empty() ? std::string{"document"} : where.to_string();
    throw Error(ErrorCode::ParseError, m_source + ":" + std::to_string(LineOf(where)) + ": " + key + ": " + what);
}

Scenario ReadScenario(const ConfigDocument& doc)
{
    const Section top{doc, Pointer{}, {"seed", "protocol", "payment", "network", "behaviors", "faults", "simulation"}};
    Scenario s;
    if (top.Has("seed")) s.simulation.seed = top.Unsigned("seed");
    if (top.Has("protocol")) {
        s.protocol = top.Guard(top.At("protocol"), [&] { return ParseProtocol(top.String("protocol")); });
    }

    const auto payment =
        top.Sub("payment", {"path", "hops", "amount", "fee", "fees", "gamma", "delta", "t_base", "k", "psi"});
    if (!payment) doc.Fail(Pointer{}, "missing [payment] table");
    PlanParams params;
    if (payment->Has("path") == payment->Has("hops")) doc.Fail(top.At("payment"), "give exactly one of 'path' or 'hops'");
    if (payment->Has("path")) {
        std::set<std::string> seen;
        for (std::string& name : payment->List("path", [&](const Pointer& p) { return payment->StringAt(p); })) {
            if (!seen.insert(name).second) doc.Fail(payment->At("path"), "node '" + name + "' appears twice");
            params.path.emplace_back(std::move(name));
        }
        if (params.path.size() < 2) doc.Fail(payment->At("path"), "path needs at least two nodes");
    } else {
        const std::uint64_t hops = payment->Unsigned("hops");
        if (hops == 0) doc.Fail(payment->At("hops"), "hops must be positive");
        params.path = SyntheticPath(hops);
    }
    const std::size_t hops = params.path.size() - 1;
    if (!payment->Has("amount")) doc.Fail(top.At("payment"), "missing 'amount'");
    params.alpha = payment->AmountValue("amount");
    if (payment->Has("fee") && payment->Has("fees")) doc.Fail(top.At("payment"), "give 'fee' or 'fees', not both");
    if (payment->Has("fee")) params.fees.assign(hops - 1, payment->AmountValue("fee"));
    if (payment->Has("fees")) {
        params.fees = payment->List("fees", [&](const Pointer& p) { return payment->AmountAt(p); });
        if (params.fees.size() != hops - 1) {
            doc.Fail(payment->At("fees"), "expected " + std::to_string(hops - 1) + " fees for " + std::to_string(hops) +
                                              " hops");
        }
    }
    if (payment->Has("gamma")) params.gamma = payment->Rate("gamma");
    if (payment->Has("delta")) params.delta = payment->Minutes("delta");
    if (payment->Has("t_base")) params.t_base = payment->Minutes("t_base");
    if (payment->Has("k")) params.k = static_cast<std::uint32_t>(payment->Unsigned("k"));
    if (payment->Has("psi")) params.psi_override = payment->AmountValue("psi");
    s.plan = payment->Guard(top.At("payment"), [&] { return BuildPathPlan(params); });

    Amount balance{100'000'000'000};
    if (const auto network = top.Sub("network", {"balance"})) {
        if (network->Has("balance")) balance = network->AmountValue("balance");
    }
    for (const NodeId& node : s.plan.path) s.graph.AddNode(node);
    for (std::size_t h = 0; h < hops; ++h) {
        s.graph.AddChannel(ChannelId{"c" + std::to_string(h)}, s.plan.path[h], s.plan.path[h + 1], balance, balance);
    }

    if (top.Has("behaviors")) {
        if (!top.Get("behaviors").is_object()) doc.Fail(top.At("behaviors"), "expected a table");
        for (const auto& [name, _] : top.Get("behaviors").items()) {
            const Pointer p = top.At("behaviors") / name;
            const NodeId node{name};
            if (!s.graph.HasNode(node)) doc.Fail(p, "'" + name + "' is not on the path");
            s.behaviors[node] = top.Guard(p, [&] { return ParseBehavior(top.StringAt(p)); });
        }
    }

    if (top.Has("faults")) {
        const Json& list = top.Get("faults");
        if (!list.is_array()) doc.Fail(top.At("faults"), "expected an array of tables");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const Section f{doc, top.At("faults") / i, {"position", "kind", "amount", "locktime"}};
            TermsFault fault;
            if (!f.Has("position") || !f.Has("kind")) doc.Fail(top.At("faults") / i, "fault needs 'position' and 'kind'");
            fault.position = f.Unsigned("position");
            if (fault.position >= hops) {
                doc.Fail(f.At("position"), "position must be below " + std::to_string(hops));
            }
            fault.kind = f.Guard(f.At("kind"), [&] { return ParseFaultKind(f.String("kind")); });
            if (f.Has("amount")) fault.amount_short = f.AmountValue("amount");
            if (f.Has("locktime")) fault.locktime_short = f.Minutes("locktime");
            s.simulation.faults.push_back(fault);
        }
    }

    if (const auto sim = top.Sub("simulation", {"latency", "receiver_wait", "onchain_fee"})) {
        if (sim->Has("latency")) s.simulation.latency = sim->Minutes("latency");
        if (s.simulation.latency <= Duration{0}) doc.Fail(sim->At("latency"), "latency must be positive");
        if (sim->Has("receiver_wait")) s.simulation.receiver_wait = sim->Minutes("receiver_wait");
        if (sim->Has("onchain_fee")) s.simulation.onchain_fee = sim->AmountValue("onchain_fee");
    }
    return s;
}

nlohmann::json ToJson(const Scenario& s)
{
    Json behaviors = Json::object();
    for (const auto& [node, b] : s.behaviors) behaviors[node.Str()] = ToString(b);
    Json faults = Json::array();
    for (const TermsFault& f : s.simulation.faults) {
        faults.push_back({{"position", f.position},
                          {"kind", ToString(f.kind)},
                          {"amount_msat", f.amount_short.Msat()},
                          {"locktime_min", f.locktime_short.Minutes()}});
    }
    Json sim{{"latency_min", s.simulation.latency.Minutes()},
             {"onchain_fee_msat", s.simulation.onchain_fee.Msat()},
             {"receiver_wait_min", s.simulation.receiver_wait ? Json(s.simulation.receiver_wait->Minutes()) : Json(nullptr)}};
    const Channel& first = s.graph.Channels().front();
    return {{"protocol", ToString(s.protocol)},
            {"seed", s.simulation.seed},
            {"plan", PlanToJson(s.plan)},
            {"channel_balance_msat", first.Remain(first.A()).Msat()},
            {"behaviors", behaviors},
            {"faults", faults},
            {"simulation", sim}};
}

ExperimentConfig ReadExperimentConfig(const ConfigDocument& doc, ExperimentConfig c)
{
    const Section top{doc,
                      Pointer{},
                      {"protocols", "strategy", "gamma", "tx_value", "budget", "tx_value_sweep", "budget_sweep",
                       "gamma_sweep", "ratio_alpha", "ratio_path_length", "path_length_sweep", "ratio_gamma_sweep", "k",
                       "delta", "t_base", "attacker_base_fee", "attacker_fee_rate", "snapshot", "synthetic", "victim",
                       "attacker", "seed"}};
    if (top.Has("protocols")) {
        c.protocols = top.List("protocols", [&](const Pointer& p) {
            return top.Guard(p, [&] { return ParseProtocol(top.StringAt(p)); });
        });
    }
    if (top.Has("strategy")) c.strategy = static_cast<int>(top.Unsigned("strategy"));
    if (top.Has("gamma")) c.gamma = top.Rate("gamma").Value();
    if (top.Has("tx_value")) c.tx_value = top.AmountValue("tx_value");
    if (top.Has("budget")) c.budget = top.AmountValue("budget");
    if (top.Has("tx_value_sweep")) c.tx_value_sweep = top.List("tx_value_sweep", [&](const Pointer& p) { return top.AmountAt(p); });
    if (top.Has("budget_sweep")) c.budget_sweep = top.List("budget_sweep", [&](const Pointer& p) { return top.AmountAt(p); });
    if (top.Has("gamma_sweep")) c.gamma_sweep = top.List("gamma_sweep", [&](const Pointer& p) { return top.RationalAt(p); });
    if (top.Has("ratio_alpha")) c.ratio_alpha = top.AmountValue("ratio_alpha");
    if (top.Has("ratio_path_length")) c.ratio_path_length = top.Unsigned("ratio_path_length");
    if (top.Has("path_length_sweep")) {
        c.path_length_sweep = top.List("path_length_sweep", [&](const Pointer& p) { return std::size_t{top.UnsignedAt(p)}; });
    }
    if (top.Has("ratio_gamma_sweep")) {
        c.ratio_gamma_sweep = top.List("ratio_gamma_sweep", [&](const Pointer& p) { return top.RationalAt(p); });
    }
    if (top.Has("k")) c.k = static_cast<std::uint32_t>(top.Unsigned("k"));
    if (top.Has("delta")) c.delta = top.Minutes("delta");
    if (top.Has("t_base")) c.t_base = top.Minutes("t_base");
    if (top.Has("attacker_base_fee")) c.attacker_policy.base_fee = top.AmountValue("attacker_base_fee");
    if (top.Has("attacker_fee_rate")) c.attacker_policy.fee_rate = top.RationalValue("attacker_fee_rate");
    if (top.Has("snapshot")) {
        std::filesystem::path p{top.String("snapshot")};
        if (p.is_relative() && !doc.BaseDir().empty()) p = doc.BaseDir() / p;
        c.snapshot = p;
    }
    if (const auto syn = top.Sub("synthetic", {"sources", "sinks", "spoke_capacity", "resident_attacker", "relays",
                                               "attacker_capacity", "base_fee", "fee_rate"})) {
        if (syn->Has("sources")) c.synthetic.sources = syn->Unsigned("sources");
        if (syn->Has("sinks")) c.synthetic.sinks = syn->Unsigned("sinks");
        if (syn->Has("spoke_capacity")) c.synthetic.spoke_capacity = syn->AmountValue("spoke_capacity");
        if (syn->Has("resident_attacker")) c.synthetic.resident_attacker = syn->Bool("resident_attacker");
        if (syn->Has("relays")) c.synthetic.relays = syn->Unsigned("relays");
        if (syn->Has("attacker_capacity")) c.synthetic.attacker_capacity = syn->AmountValue("attacker_capacity");
        if (syn->Has("base_fee")) c.synthetic.policy.base_fee = syn->AmountValue("base_fee");
        if (syn->Has("fee_rate")) c.synthetic.policy.fee_rate = syn->RationalValue("fee_rate");
    }
    if (top.Has("victim")) c.victim = NodeId{top.String("victim")};
    if (top.Has("attacker")) c.attacker = NodeId{top.String("attacker")};
    if (top.Has("seed")) c.seed = top.Unsigned("seed");
    top.Guard(Pointer{}, [&] {
        c.Validate();
        return 0;
    });
    return c;
}

} // namespace htlcgp
