// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef HTLCGP_AMOUNT_H
#define HTLCGP_AMOUNT_H

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace htlcgp {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/** Non-negative millisatoshi amount. Underflow and overflow throw. */
class Amount
{
public:
    constexpr Amount() = default;
    constexpr explicit Amount(std::uint64_t msat) : m_msat{msat} {}

    constexpr std::uint64_t Msat() const { return m_msat; }

    Amount& operator+=(Amount other);
    Amount& operator-=(Amount other);
    friend Amount operator+(Amount a, Amount b) { return a += b; }
    friend Amount operator-(Amount a, Amount b) { return a -= b; }
    Amount operator*(std::uint64_t factor) const;

    friend constexpr auto operator<=>(Amount, Amount) = default;

    Rational ToRational() const { return Rational{BigInt{m_msat}}; }

private:
    std::uint64_t m_msat{0};
};

/** Signed msat difference, used for ledger deltas and RoI. */
using SignedMsat = std::int64_t;

SignedMsat Diff(Amount after, Amount before);

/** Simulation durations are whole minutes. */
class Duration
{
public:
    constexpr Duration() = default;
    constexpr explicit Duration(std::int64_t minutes) : m_minutes{minutes} {}

    constexpr std::int64_t Minutes() const { return m_minutes; }

    friend constexpr Duration operator+(Duration a, Duration b) { return Duration{a.m_minutes + b.m_minutes}; }
    friend constexpr Duration operator-(Duration a, Duration b) { return Duration{a.m_minutes - b.m_minutes}; }
    friend constexpr Duration operator*(Duration a, std::int64_t f) { return Duration{a.m_minutes * f}; }
    friend constexpr auto operator<=>(Duration, Duration) = default;

private:
    std::int64_t m_minutes{0};
};

/** Absolute point on the global simulation clock, in minutes since start. */
class TimePoint
{
public:
    constexpr TimePoint() = default;
    constexpr explicit TimePoint(std::int64_t minute) : m_minute{minute} {}

    constexpr std::int64_t Minute() const { return m_minute; }

    friend constexpr TimePoint operator+(TimePoint t, Duration d) { return TimePoint{t.m_minute + d.Minutes()}; }
    friend constexpr TimePoint operator-(TimePoint t, Duration d) { return TimePoint{t.m_minute - d.Minutes()}; }
    friend constexpr Duration operator-(TimePoint a, TimePoint b) { return Duration{a.m_minute - b.m_minute}; }
    friend constexpr auto operator<=>(TimePoint, TimePoint) = default;

private:
    std::int64_t m_minute{0};
};

/** Penalty fraction per minute of collateral-time, kept exact. */
class PenaltyRate
{
public:
    PenaltyRate() = default;
    explicit PenaltyRate(Rational gamma);

    const Rational& Value() const { return m_gamma; }
    bool IsZero() const { return m_gamma == 0; }

    friend bool operator==(const PenaltyRate&, const PenaltyRate&) = default;

private:
    Rational m_gamma{0};
};

/** Base fee plus proportional rate, as advertised by a node. */
struct FeePolicy {
    Amount base_fee{};
    Rational fee_rate{0};

    /** Fee charged for forwarding value, floored to whole msat. */
    Amount FeeFor(Amount value) const;

    friend bool operator==(const FeePolicy&, const FeePolicy&) = default;
};

/** Parse "0.001", "1e-3", "1/1000" or an integer into an exact rational. */
Rational ParseRational(std::string_view text);

/** Exact rational from a double via its shortest round-trip decimal form. */
Rational RationalFromDouble(double value);

/** "num/den" or "num" when the denominator is 1. */
std::string FormatRational(const Rational& value);

double ToDouble(const Rational& value);

BigInt Floor(const Rational& value);
BigInt Ceil(const Rational& value);

/** Round half-up to a whole msat. Negative input is an error. */
Amount RoundHalfUpMsat(const Rational& value);
Amount FloorMsat(const Rational& value);

/** Parse "1500", "1500msat", "10sat", "0.03btc" into msat. */
Amount ParseAmount(std::string_view text);

} // namespace htlcgp

#endif // HTLCGP_AMOUNT_H
