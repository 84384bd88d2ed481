// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef HTLCGP_CRYPTO_H
#define HTLCGP_CRYPTO_H

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace htlcgp {

using Bytes32 = std::array<std::uint8_t, 32>;

struct Preimage {
    Bytes32 bytes{};
    friend bool operator==(const Preimage&, const Preimage&) = default;
};

struct Digest {
    Bytes32 bytes{};
    friend bool operator==(const Digest&, const Digest&) = default;
};

Bytes32 Sha256(std::span<const std::uint8_t> data);
Digest HashPreimage(const Preimage& preimage);

/** Deterministic 32 bytes from (seed, label); used for every derived secret. */
Bytes32 DeriveBytes(std::uint64_t seed, std::string_view label);

std::string ToHex(std::span<const std::uint8_t> bytes);

/** Throws if libsodium cannot be initialised. Safe to call repeatedly. */
void EnsureSodium();

} // namespace htlcgp

#endif // HTLCGP_CRYPTO_H
