#pragma once

#include <stdexcept>
#include <string>

namespace strobe {

// Failure categories surfaced to callers. Each maps to one simulation-level
// condition so tests and the CLI can react to the category, not the message.
enum class Errc {
    grid_too_small,
    boundary_contamination,
    binning_mismatch,
    invalid_window,
    all_zero_flow,
    zero_denominator,
    degenerate_sigma,
    step_too_large,
    trace_drift,
    no_clicks,
    config_error,
    io_error,
    invalid_argument,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::grid_too_small: return "GridTooSmall";
        case Errc::boundary_contamination: return "BoundaryContamination";
        case Errc::binning_mismatch: return "BinningMismatch";
        case Errc::invalid_window: return "InvalidWindow";
        case Errc::all_zero_flow: return "AllZeroFlow";
        case Errc::zero_denominator: return "ZeroDenominator";
        case Errc::degenerate_sigma: return "DegenerateSigma";
        case Errc::step_too_large: return "StepTooLarge";
        case Errc::trace_drift: return "TraceDrift";
        case Errc::no_clicks: return "NoClicks";
        case Errc::config_error: return "ConfigError";
        case Errc::io_error: return "IoError";
        case Errc::invalid_argument: return "InvalidArgument";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool cond, Errc code, const std::string& message) {
    if (!cond) raise(code, message);
}

}  // namespace strobe
