#pragma once

#include <stdexcept>
#include <string>

namespace qslit {

enum class ErrorCode {
    cutoff_too_small,
    degenerate_cat,
    truncation_mismatch,
    unnormalized_input,
    layout_mismatch,
    unknown_id,
    missing_association,
    impossible_outcome,
    insufficient_extrema,
    nonpositive_time,
    single_stage_geometry,
    dimension_too_large,
    config_mismatch,
    invariant_violation,
    unknown_key,
    parse_error,
    io_error,
    internal_error,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::cutoff_too_small: return "cutoff-too-small";
        case ErrorCode::degenerate_cat: return "degenerate-cat";
        case ErrorCode::truncation_mismatch: return "truncation-mismatch";
        case ErrorCode::unnormalized_input: return "unnormalized-input";
        case ErrorCode::layout_mismatch: return "layout-mismatch";
        case ErrorCode::unknown_id: return "unknown-id";
        case ErrorCode::missing_association: return "missing-association";
        case ErrorCode::impossible_outcome: return "impossible-outcome";
        case ErrorCode::insufficient_extrema: return "insufficient-extrema";
        case ErrorCode::nonpositive_time: return "nonpositive-time";
        case ErrorCode::single_stage_geometry: return "single-stage-geometry";
        case ErrorCode::dimension_too_large: return "dimension-too-large";
        case ErrorCode::config_mismatch: return "config-mismatch";
        case ErrorCode::invariant_violation: return "invariant-violation";
        case ErrorCode::unknown_key: return "unknown-key";
        case ErrorCode::parse_error: return "parse-error";
        case ErrorCode::io_error: return "io-error";
        case ErrorCode::internal_error: return "internal-error";
    }
    return "error";
}

}  // namespace qslit
