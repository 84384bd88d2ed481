// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <htlcgp/amount.h>
#include <htlcgp/error.h>

#include <array>
#include <cctype>
#include <charconv>
#include <limits>

namespace htlcgp {

Amount& Amount::operator+=(Amount other)
{
    if (m_msat > std::numeric_limits<std::uint64_t>::max() - other.m_msat) {
        throw Error(ErrorCode::Overflow, "amount addition overflows");
    }
    m_msat += other.m_msat;
    return *this;
}

Amount& Amount::operator-=(Amount other)
{
    if (other.m_msat > m_msat) {
        throw Error(ErrorCode::Underflow, std::to_string(m_msat) + " - " + std::to_string(other.m_msat));
    }
    m_msat -= other.m_msat;
    return *this;
}

Amount Amount::operator*(std::uint64_t factor) const
{
    if (factor != 0 && m_msat > std::numeric_limits<std::uint64_t>::max() / factor) {
        throw Error(ErrorCode::Overflow, "amount multiplication overflows");
    }
    return Amount{m_msat * factor};
}

SignedMsat Diff(Amount after, Amount before)
{
    return static_cast<SignedMsat>(after.Msat()) - static_cast<SignedMsat>(before.Msat());
}

PenaltyRate::PenaltyRate(Rational gamma) : m_gamma{std::move(gamma)}
{
    if (m_gamma < 0 || m_gamma > 1) {
        throw Error(ErrorCode::InvalidArgument, "penalty rate must lie in [0, 1], got " + FormatRational(m_gamma));
    }
}

Amount FeePolicy::FeeFor(Amount value) const
{
    return base_fee + FloorMsat(fee_rate * value.ToRational());
}

namespace {

BigInt Pow10(unsigned exp)
{
    BigInt result{1};
    for (unsigned i = 0; i < exp; ++i) result *= 10;
    return result;
}

std::string_view Trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

[[noreturn]] void BadNumber(std::string_view text)
{
    throw Error(ErrorCode::ParseError, "not a number: '" + std::string{text} + "'");
}

Rational ParseDecimal(std::string_view text)
{
    std::string_view s = text;
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    BigInt digits{0};
    long scale = 0;
    bool any = false;
    bool seen_point = false;
    std::size_t pos = 0;
    for (; pos < s.size(); ++pos) {
        const char c = s[pos];
        if (c >= '0' && c <= '9') {
            digits = digits * 10 + (c - '0');
            if (seen_point) ++scale;
            any = true;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!any) BadNumber(text);
    long exponent = 0;
    if (pos < s.size()) {
        if (s[pos] != 'e' && s[pos] != 'E') BadNumber(text);
        const std::string_view exp_text = s.substr(pos + 1);
        const char* first = exp_text.data();
        const char* last = first + exp_text.size();
        if (first != last && *first == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, last, exponent);
        if (ec != std::errc{} || ptr != last || first == last) BadNumber(text);
        if (exponent > 400 || exponent < -400) BadNumber(text);
    }
    const long shift = exponent - scale;
    Rational value = shift >= 0 ? Rational{digits * Pow10(static_cast<unsigned>(shift))}
                                : Rational{digits, Pow10(static_cast<unsigned>(-shift))};
    return negative ? Rational{-value} : value;
}

} // namespace

Rational ParseRational(std::string_view text)
{
    const std::string_view s = Trim(text);
    if (s.empty()) BadNumber(text);
    if (const auto slash = s.find('/'); slash != std::string_view::npos) {
        const Rational num = ParseDecimal(Trim(s.substr(0, slash)));
        const Rational den = ParseDecimal(Trim(s.substr(slash + 1)));
        if (den == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + std::string{text} + "'");
        return num / den;
    }
    return ParseDecimal(s);
}

Rational RationalFromDouble(double value)
{
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw Error(ErrorCode::ParseError, "cannot format double");
    return ParseRational(std::string_view{buf.data(), static_cast<std::size_t>(ptr - buf.data())});
}

std::string FormatRational(const Rational& value)
{
    const BigInt num = boost::multiprecision::numerator(value);
    const BigInt den = boost::multiprecision::denominator(value);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

double ToDouble(const Rational& value)
{
    return value.convert_to<double>();
}

BigInt Floor(const Rational& value)
{
    const BigInt num = boost::multiprecision::numerator(value);
    const BigInt den = boost::multiprecision::denominator(value);
    BigInt q = num / den;
    if (num % den != 0 && num < 0) q -= 1;
    return q;
}

BigInt Ceil(const Rational& value)
{
    return -Floor(Rational{-value});
}

namespace {

Amount ToAmount(const BigInt& value)
{
    if (value < 0) throw Error(ErrorCode::Underflow, "negative amount " + value.str());
    if (value > std::numeric_limits<std::uint64_t>::max()) throw Error(ErrorCode::Overflow, "amount too large");
    return Amount{value.convert_to<std::uint64_t>()};
}

} // namespace

Amount RoundHalfUpMsat(const Rational& value)
{
    return ToAmount(Floor(value + Rational{1, 2}));
}

Amount FloorMsat(const Rational& value)
{
    return ToAmount(Floor(value));
}

Amount ParseAmount(std::string_view text)
{
    std::string_view s = Trim(text);
    std::string lower;
    for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    Rational scale{1};
    std::string_view body = lower;
    const auto ends_with = [&](std::string_view suffix) {
        if (body.size() >= suffix.size() && body.substr(body.size() - suffix.size()) == suffix) {
            body.remove_suffix(suffix.size());
            return true;
        }
        return false;
    };
    if (ends_with("msat")) {
    } else if (ends_with("sat")) {
        scale = 1000;
    } else if (ends_with("btc")) {
        scale = Rational{BigInt{100000000000LL}};
    }
    const Rational value = ParseRational(Trim(body)) * scale;
    if (boost::multiprecision::denominator(value) != 1) {
        throw Error(ErrorCode::ParseError, "amount is not a whole msat: '" + std::string{text} + "'");
    }
    return ToAmount(boost::multiprecision::numerator(value));
}

} // namespace htlcgp
