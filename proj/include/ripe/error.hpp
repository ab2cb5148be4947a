#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ripe {

/// Failure categories shared by every module. The CLI maps these onto
/// machine-readable error codes and exit statuses.
enum class ErrorCode {
    InvalidArgument,
    EmptyData,
    InvalidObservation,
    InvalidParam,
    OutOfSupport,
    DomainError,
    BracketInvalid,
    TargetNotBracketed,
    NonConvergence,
    NonFiniteIntegrand,
    NonFiniteObjective,
    DivergentLoss,
    DegenerateCriterion,
    MethodInapplicable,
    NoNuisance,
    GridTooCoarse,
};

/// Upper-snake name used in error documents, e.g. "DIVERGENT_LOSS".
std::string_view error_code_name(ErrorCode code);

/// True for failures of the numerical machinery (as opposed to bad input).
bool is_numeric_failure(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string field = {})
        : std::runtime_error(message), code_(code), field_(std::move(field))
    {
    }

    ErrorCode code() const noexcept { return code_; }

    /// Name of the offending input field, empty when not attributable.
    const std::string& field() const noexcept { return field_; }

private:
    ErrorCode code_;
    std::string field_;
};

}  // namespace ripe
