// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <htlcgp/error.h>
#include <htlcgp/snapshot.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>

namespace htlcgp {
namespace {

struct Record {
    ChannelId id;
    NodeId node1;
    NodeId node2;
    std::uint64_t capacity_sat{0};
    std::optional<FeePolicy> policy1;
    std::optional<FeePolicy> policy2;
};

std::string Where(std::size_t index) { return "record " + std::to_string(index) + ": "; }

// Topology dumps quote 64-bit numbers as strings; accept both.
std::uint64_t ReadUnsigned(const nlohmann::json& value, std::size_t index, const char* field)
{
    if (value.is_number_unsigned()) return value.get<std::uint64_t>();
    if (value.is_number_integer() && value.get<std::int64_t>() >= 0) return value.get<std::uint64_t>();
    if (value.is_string()) {
        const std::string& text = value.get_ref<const std::string&>();
        std::uint64_t out = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
        if (ec == std::errc{} && ptr == text.data() + text.size() && !text.empty()) return out;
    }
    throw Error(ErrorCode::ParseError, Where(index) + "'" + field + "' is not a non-negative integer");
}

std::string ReadString(const nlohmann::json& record, std::size_t index, const char* field)
{
    const auto it = record.find(field);
    if (it == record.end() || !it->is_string() || it->get_ref<const std::string&>().empty()) {
        throw Error(ErrorCode::ParseError, Where(index) + "missing string field '" + field + "'");
    }
    return it->get<std::string>();
}

std::optional<FeePolicy> ReadPolicy(const nlohmann::json& record, std::size_t index, const char* field)
{
    const auto it = record.find(field);
    if (it == record.end() || it->is_null()) return std::nullopt;
    if (!it->is_object()) throw Error(ErrorCode::ParseError, Where(index) + "'" + field + "' is not an object");
    FeePolicy policy;
    if (const auto base = it->find("base_fee_msat"); base != it->end()) {
        policy.base_fee = Amount{ReadUnsigned(*base, index, "base_fee_msat")};
    }
    if (const auto rate = it->find("fee_rate_ppm"); rate != it->end()) {
        policy.fee_rate = Rational{BigInt{ReadUnsigned(*rate, index, "fee_rate_ppm")}, BigInt{1'000'000}};
    }
    return policy;
}

std::vector<Record> ReadRecords(const nlohmann::json& document)
{
    const nlohmann::json* list = &document;
    if (document.is_object()) {
        if (document.contains("channels")) {
            list = &document["channels"];
        } else if (document.contains("edges")) {
            list = &document["edges"];
        } else {
            throw Error(ErrorCode::ParseError, "snapshot object has neither 'channels' nor 'edges'");
        }
    }
    if (!list->is_array()) throw Error(ErrorCode::ParseError, "snapshot channel list is not an array");

    std::vector<Record> records;
    std::set<ChannelId> seen;
    for (std::size_t i = 0; i < list->size(); ++i) {
        const nlohmann::json& r = (*list)[i];
        if (!r.is_object()) throw Error(ErrorCode::ParseError, Where(i) + "not an object");
        bool disabled = false;
        if (const auto it = r.find("disabled"); it != r.end()) {
            if (!it->is_boolean()) throw Error(ErrorCode::ParseError, Where(i) + "'disabled' is not a boolean");
            disabled = it->get<bool>();
        }
        Record rec;
        rec.id = ChannelId{ReadString(r, i, "channel_id")};
        rec.node1 = NodeId{ReadString(r, i, "node1_pub")};
        rec.node2 = NodeId{ReadString(r, i, "node2_pub")};
        const auto cap = r.find("capacity_sat");
        if (cap == r.end()) throw Error(ErrorCode::ParseError, Where(i) + "missing 'capacity_sat'");
        rec.capacity_sat = ReadUnsigned(*cap, i, "capacity_sat");
        rec.policy1 = ReadPolicy(r, i, "node1_policy");
        rec.policy2 = ReadPolicy(r, i, "node2_policy");
        if (rec.node1 == rec.node2) throw Error(ErrorCode::ParseError, Where(i) + "self-loop channel");
        if (!seen.insert(rec.id).second) {
            throw Error(ErrorCode::ParseError, Where(i) + "duplicate channel id " + rec.id.Str());
        }
        if (!disabled) records.push_back(std::move(rec));
    }
    return records;
}

/** Union-find over node ids. */
class Components
{
public:
    void Add(const NodeId& n) { m_parent.try_emplace(n, n); }
    NodeId Find(const NodeId& n)
    {
        NodeId root = n;
        while (m_parent.at(root) != root) root = m_parent.at(root);
        for (NodeId cur = n; cur != root;) {
            NodeId next = m_parent.at(cur);
            m_parent[cur] = root;
            cur = next;
        }
        return root;
    }
    void Join(const NodeId& a, const NodeId& b)
    {
        NodeId ra = Find(a), rb = Find(b);
        if (ra == rb) return;
        // Keep the smallest id as root so component order is stable.
        if (rb < ra) std::swap(ra, rb);
        m_parent[rb] = ra;
    }
    const std::map<NodeId, NodeId>& Parents() const { return m_parent; }

private:
    std::map<NodeId, NodeId> m_parent;
};

} // namespace

NetworkGraph ParseSnapshot(const nlohmann::json& document)
{
    const std::vector<Record> records = ReadRecords(document);
    if (records.empty()) throw Error(ErrorCode::EmptyGraph, "snapshot has no enabled channels");

    Components components;
    for (const Record& r : records) {
        components.Add(r.node1);
        components.Add(r.node2);
        components.Join(r.node1, r.node2);
    }
    std::map<NodeId, std::size_t> sizes;
    for (const auto& [node, parent] : components.Parents()) ++sizes[components.Find(node)];
    // Roots are component minima, so the first maximum in map order breaks ties by smallest id.
    const NodeId keep = std::max_element(sizes.begin(), sizes.end(), [](const auto& a, const auto& b) {
                            return a.second < b.second;
                        })->first;

    std::map<NodeId, FeePolicy> policies;
    for (const Record& r : records) {
        if (components.Find(r.node1) != keep) continue;
        policies.try_emplace(r.node1, FeePolicy{});
        policies.try_emplace(r.node2, FeePolicy{});
    }
    std::set<NodeId> have_policy;
    for (const Record& r : records) {
        if (components.Find(r.node1) != keep) continue;
        if (r.policy1 && have_policy.insert(r.node1).second) policies[r.node1] = *r.policy1;
        if (r.policy2 && have_policy.insert(r.node2).second) policies[r.node2] = *r.policy2;
    }

    NetworkGraph graph;
    for (const auto& [node, policy] : policies) graph.AddNode(node, policy);
    for (const Record& r : records) {
        if (components.Find(r.node1) != keep) continue;
        const Amount capacity = Amount{r.capacity_sat} * 1000;
        const Amount half{capacity.Msat() / 2};
        const Amount odd{capacity.Msat() % 2};
        const bool first_smaller = r.node1 < r.node2;
        graph.AddChannel(r.id, r.node1, r.node2, first_smaller ? half + odd : half, first_smaller ? half : half + odd);
    }
    return graph;
}

NetworkGraph LoadSnapshot(const std::filesystem::path& path)
{
    std::ifstream in{path};
    if (!in) throw Error(ErrorCode::ParseError, "cannot open snapshot " + path.string());
    nlohmann::json document;
    try {
        document = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    return ParseSnapshot(document);
}

} // namespace htlcgp
