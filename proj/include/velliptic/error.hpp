#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace velliptic {

enum class ErrorCode {
    fiber_mismatch,
    non_invertible,
    parabolic_degeneracy,
    ellipticity_violation,
    out_of_domain,
    not_parabolic,
    missing_derivatives,
    non_convergence,
    crossing_detected,
    not_integrable,
    not_rigid,
    invalid_argument,
    parse_error,
    quadrature_failure,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::fiber_mismatch: return "fiber-mismatch";
        case ErrorCode::non_invertible: return "non-invertible";
        case ErrorCode::parabolic_degeneracy: return "parabolic-degeneracy";
        case ErrorCode::ellipticity_violation: return "ellipticity-violation";
        case ErrorCode::out_of_domain: return "out-of-domain";
        case ErrorCode::not_parabolic: return "not-parabolic";
        case ErrorCode::missing_derivatives: return "missing-derivatives";
        case ErrorCode::non_convergence: return "non-convergence";
        case ErrorCode::crossing_detected: return "crossing-detected";
        case ErrorCode::not_integrable: return "not-integrable";
        case ErrorCode::not_rigid: return "not-rigid";
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::parse_error: return "parse-error";
        case ErrorCode::quadrature_failure: return "quadrature-failure";
    }
    return "unknown";
}

/// Every failure raised by the library carries a code so callers (the CLI in
/// particular) can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace velliptic
