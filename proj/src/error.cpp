#include "ripe/error.hpp"

namespace ripe {

std::string_view error_code_name(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::EmptyData: return "EMPTY_DATA";
    case ErrorCode::InvalidObservation: return "INVALID_OBSERVATION";
    case ErrorCode::InvalidParam: return "INVALID_PARAM";
    case ErrorCode::OutOfSupport: return "OUT_OF_SUPPORT";
    case ErrorCode::DomainError: return "DOMAIN_ERROR";
    case ErrorCode::BracketInvalid: return "BRACKET_INVALID";
    case ErrorCode::TargetNotBracketed: return "TARGET_NOT_BRACKETED";
    case ErrorCode::NonConvergence: return "NON_CONVERGENCE";
    case ErrorCode::NonFiniteIntegrand: return "NON_FINITE_INTEGRAND";
    case ErrorCode::NonFiniteObjective: return "NON_FINITE_OBJECTIVE";
    case ErrorCode::DivergentLoss: return "DIVERGENT_LOSS";
    case ErrorCode::DegenerateCriterion: return "DEGENERATE_CRITERION";
    case ErrorCode::MethodInapplicable: return "METHOD_INAPPLICABLE";
    case ErrorCode::NoNuisance: return "NO_NUISANCE";
    case ErrorCode::GridTooCoarse: return "GRID_TOO_COARSE";
    }
    return "UNKNOWN";
}

bool is_numeric_failure(ErrorCode code)
{
    switch (code) {
    case ErrorCode::NonConvergence:
    case ErrorCode::NonFiniteIntegrand:
    case ErrorCode::NonFiniteObjective:
    case ErrorCode::TargetNotBracketed:
    case ErrorCode::GridTooCoarse:
        return true;
    default:
        return false;
    }
}

}  // namespace ripe
