// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <htlcgp/crypto.h>
#include <htlcgp/error.h>

#include <sodium.h>

namespace htlcgp {

void EnsureSodium()
{
    static const int status = sodium_init();
    if (status < 0) throw Error(ErrorCode::CryptoFailure, "sodium_init failed");
}

Bytes32 Sha256(std::span<const std::uint8_t> data)
{
    EnsureSodium();
    Bytes32 out{};
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

Digest HashPreimage(const Preimage& preimage)
{
    return Digest{Sha256(preimage.bytes)};
}

Bytes32 DeriveBytes(std::uint64_t seed, std::string_view label)
{
    std::vector<std::uint8_t> buf;
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
    buf.insert(buf.end(), label.begin(), label.end());
    return Sha256(buf);
}

std::string ToHex(std::span<const std::uint8_t> bytes)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

} // namespace htlcgp
