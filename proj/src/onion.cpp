// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <htlcgp/error.h>
#include <htlcgp/onion.h>

#include <nlohmann/json.hpp>
#include <sodium.h>

#include <algorithm>

namespace htlcgp {

namespace {

constexpr std::size_t kHeader = crypto_box_PUBLICKEYBYTES + crypto_box_NONCEBYTES;

nlohmann::json::binary_t Bin(const Bytes32& b)
{
    return nlohmann::json::binary_t{std::vector<std::uint8_t>(b.begin(), b.end())};
}

std::optional<Bytes32> FromBin(const nlohmann::json& j)
{
    if (!j.is_binary() || j.get_binary().size() != 32) return std::nullopt;
    Bytes32 out{};
    std::copy(j.get_binary().begin(), j.get_binary().end(), out.begin());
    return out;
}

std::vector<std::uint8_t> Encode(const HopPayload& p, const std::optional<OnionPacket>& inner,
                                 const std::optional<Rational>& phi)
{
    nlohmann::json j;
    j["H"] = Bin(p.payment_hash.bytes);
    j["Y"] = Bin(p.cancellation_hash.bytes);
    j["amt"] = p.amount.Msat();
    j["lock"] = p.locktime.Minute();
    j["tgp"] = p.penalty.Msat();
    j["next"] = p.next_hop ? nlohmann::json(p.next_hop->Str()) : nlohmann::json(nullptr);
    j["epoch"] = p.epoch.Minute();
    j["inner"] = inner ? nlohmann::json(nlohmann::json::binary_t{inner->bytes}) : nlohmann::json(nullptr);
    j["phi"] = phi ? nlohmann::json(FormatRational(*phi)) : nlohmann::json(nullptr);
    return nlohmann::json::to_cbor(j);
}

std::optional<PeeledLayer> Decode(const std::vector<std::uint8_t>& plain)
{
    const nlohmann::json j = nlohmann::json::from_cbor(plain, true, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    try {
        PeeledLayer out;
        const auto h = FromBin(j.at("H"));
        const auto y = FromBin(j.at("Y"));
        if (!h || !y) return std::nullopt;
        out.payload.payment_hash = Digest{*h};
        out.payload.cancellation_hash = Digest{*y};
        out.payload.amount = Amount{j.at("amt").get<std::uint64_t>()};
        out.payload.locktime = TimePoint{j.at("lock").get<std::int64_t>()};
        out.payload.penalty = Amount{j.at("tgp").get<std::uint64_t>()};
        if (!j.at("next").is_null()) out.payload.next_hop = NodeId{j.at("next").get<std::string>()};
        out.payload.epoch = TimePoint{j.at("epoch").get<std::int64_t>()};
        if (!j.at("inner").is_null()) out.inner = OnionPacket{j.at("inner").get_binary()};
        if (!j.at("phi").is_null()) out.phi = ParseRational(j.at("phi").get<std::string>());
        return out;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

} // namespace

KeyRing KeyRing::Derive(const std::vector<NodeId>& nodes, std::uint64_t seed)
{
    EnsureSodium();
    KeyRing ring;
    for (const NodeId& node : nodes) {
        if (ring.Has(node)) continue;
        const Bytes32 node_seed = DeriveBytes(seed, "node-key:" + node.Str());
        KeyPair kp;
        crypto_box_seed_keypair(kp.public_key.data(), kp.secret_key.data(), node_seed.data());
        ring.Add(node, kp);
    }
    return ring;
}

const KeyPair& KeyRing::Get(const NodeId& node) const
{
    const auto it = m_keys.find(node);
    if (it == m_keys.end()) throw Error(ErrorCode::UnknownNode, "no keys for " + node.Str());
    return it->second;
}

OnionPacket BuildOnion(const std::vector<HopPayload>& payloads, const std::vector<Bytes32>& public_keys,
                       const Rational& phi, std::uint64_t seed)
{
    if (payloads.empty() || payloads.size() != public_keys.size()) {
        throw Error(ErrorCode::InvalidArgument, "one public key per payload required");
    }
    EnsureSodium();
    std::optional<OnionPacket> inner;
    for (std::size_t i = payloads.size(); i-- > 0;) {
        const bool last = i + 1 == payloads.size();
        const std::vector<std::uint8_t> plain = Encode(payloads[i], inner, last ? std::optional{phi} : std::nullopt);

        const std::string layer = "onion-layer:" + std::to_string(i);
        const Bytes32 eph_seed = DeriveBytes(seed, layer + ":eph");
        const Bytes32 nonce_src = DeriveBytes(seed, layer + ":nonce");
        Bytes32 eph_pk{};
        Bytes32 eph_sk{};
        crypto_box_seed_keypair(eph_pk.data(), eph_sk.data(), eph_seed.data());

        OnionPacket packet;
        packet.bytes.resize(kHeader + crypto_box_MACBYTES + plain.size());
        std::copy(eph_pk.begin(), eph_pk.end(), packet.bytes.begin());
        std::copy_n(nonce_src.begin(), crypto_box_NONCEBYTES, packet.bytes.begin() + crypto_box_PUBLICKEYBYTES);
        if (crypto_box_easy(packet.bytes.data() + kHeader, plain.data(), plain.size(),
                            packet.bytes.data() + crypto_box_PUBLICKEYBYTES, public_keys[i].data(),
                            eph_sk.data()) != 0) {
            throw Error(ErrorCode::CryptoFailure, "crypto_box_easy failed");
        }
        sodium_memzero(eph_sk.data(), eph_sk.size());
        inner = std::move(packet);
    }
    return *inner;
}

std::optional<PeeledLayer> PeelOnion(const OnionPacket& packet, const KeyPair& keys)
{
    EnsureSodium();
    if (packet.bytes.size() < kHeader + crypto_box_MACBYTES) return std::nullopt;
    std::vector<std::uint8_t> plain(packet.bytes.size() - kHeader - crypto_box_MACBYTES);
    if (crypto_box_open_easy(plain.data(), packet.bytes.data() + kHeader, packet.bytes.size() - kHeader,
                             packet.bytes.data() + crypto_box_PUBLICKEYBYTES, packet.bytes.data(),
                             keys.secret_key.data()) != 0) {
        return std::nullopt;
    }
    return Decode(plain);
}

} // namespace htlcgp
