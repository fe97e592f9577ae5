#pragma once

#include <stdexcept>
#include <string>

namespace lvann {

// Each code maps to a distinct failure class; the CLI translates them into
// process exit codes (see tools/lvann_cli.cpp).
enum class ErrorCode {
    InvalidArgument,      // precondition violated by the caller
    DimensionMismatch,
    ParameterInfeasible,  // geometry or cost budget rules out the configuration
    VerificationFailure,  // a sampled family never passed its net check
    Overflow,             // a result or enumeration exceeded its configured cap
    NotFound,
    MalformedHeader,
    RecordDimMismatch,
    VersionMismatch,
    Io,
    Estimation,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) {
        throw Error(code, message);
    }
}

}  // namespace lvann
