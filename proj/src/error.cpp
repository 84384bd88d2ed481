// Copyright (c) 2026 The htlcgp developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <htlcgp/error.h>

namespace htlcgp {

std::string_view ErrorCodeName(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Underflow: return "Underflow";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::InsufficientBalance: return "InsufficientBalance";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::UnknownChannel: return "UnknownChannel";
    case ErrorCode::UnknownContract: return "UnknownContract";
    case ErrorCode::IllegalOutcome: return "IllegalOutcome";
    case ErrorCode::InvalidBase: return "InvalidBase";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::MissingHash: return "MissingHash";
    case ErrorCode::ZeroAmount: return "ZeroAmount";
    case ErrorCode::ExpiredLocktime: return "ExpiredLocktime";
    case ErrorCode::LocktimeExpired: return "LocktimeExpired";
    case ErrorCode::WrongPreimage: return "WrongPreimage";
    case ErrorCode::TooEarly: return "TooEarly";
    case ErrorCode::AlreadyTerminal: return "AlreadyTerminal";
    case ErrorCode::NotAccepted: return "NotAccepted";
    case ErrorCode::InsufficientCompensation: return "InsufficientCompensation";
    case ErrorCode::UnsupportedKind: return "UnsupportedKind";
    case ErrorCode::PlanInfeasible: return "PlanInfeasible";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::VictimNotFound: return "VictimNotFound";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::NoCycleThroughVictim: return "NoCycleThroughVictim";
    case ErrorCode::CryptoFailure: return "CryptoFailure";
    }
    return "Unknown";
}

} // namespace htlcgp
