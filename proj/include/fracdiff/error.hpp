#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracdiff {

enum class ErrorCode {
    invalid_parameter,
    pole_of_gamma,
    singular_point,
    dimension_mismatch,
    non_convergence,
    quadrature_failure,
    fit_failure,
    insufficient_grid,
    coincident_points,
    not_psd,
    dimension_too_large,
    grid_coverage,
    unsupported_contour,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_parameter: return "invalid-parameter";
        case ErrorCode::pole_of_gamma: return "pole-of-gamma";
        case ErrorCode::singular_point: return "singular-point";
        case ErrorCode::dimension_mismatch: return "dimension-mismatch";
        case ErrorCode::non_convergence: return "non-convergence";
        case ErrorCode::quadrature_failure: return "quadrature-failure";
        case ErrorCode::fit_failure: return "fit-failure";
        case ErrorCode::insufficient_grid: return "insufficient-grid";
        case ErrorCode::coincident_points: return "coincident-points";
        case ErrorCode::not_psd: return "not-psd";
        case ErrorCode::dimension_too_large: return "dimension-too-large";
        case ErrorCode::grid_coverage: return "grid-coverage";
        case ErrorCode::unsupported_contour: return "unsupported-contour";
    }
    return "unknown";
}

/// Exception carrying a machine-readable code; every library failure is one of these.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

    /// True for failures caused by the caller's inputs rather than by the numerics.
    [[nodiscard]] bool is_validation() const noexcept {
        switch (code_) {
            case ErrorCode::invalid_parameter:
            case ErrorCode::dimension_mismatch:
            case ErrorCode::singular_point:
            case ErrorCode::coincident_points:
            case ErrorCode::pole_of_gamma:
            case ErrorCode::dimension_too_large:
            case ErrorCode::unsupported_contour:
                return true;
            default:
                return false;
        }
    }

private:
    ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
    if (!condition) throw Error(code, what);
}

}  // namespace fracdiff
