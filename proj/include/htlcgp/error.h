// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef HTLCGP_ERROR_H
#define HTLCGP_ERROR_H

#include <stdexcept>
#include <string>
#include <string_view>

namespace htlcgp {

enum class ErrorCode {
    InvalidArgument,
    Underflow,
    Overflow,
    InsufficientBalance,
    UnknownNode,
    UnknownChannel,
    UnknownContract,
    IllegalOutcome,
    InvalidBase,
    IndexOutOfRange,
    MissingHash,
    ZeroAmount,
    ExpiredLocktime,
    LocktimeExpired,
    WrongPreimage,
    TooEarly,
    AlreadyTerminal,
    NotAccepted,
    InsufficientCompensation,
    UnsupportedKind,
    PlanInfeasible,
    ParseError,
    EmptyGraph,
    VictimNotFound,
    BudgetTooSmall,
    NoCycleThroughVictim,
    CryptoFailure,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string{ErrorCodeName(code)} + ": " + what), m_code{code} {}

    ErrorCode Code() const noexcept { return m_code; }

private:
    ErrorCode m_code;
};

} // namespace htlcgp

#endif // HTLCGP_ERROR_H
