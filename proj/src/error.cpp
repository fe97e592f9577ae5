#include "lvann/error.hpp"

namespace lvann {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::DimensionMismatch: return "dimension-mismatch";
        case ErrorCode::ParameterInfeasible: return "parameter-infeasible";
        case ErrorCode::VerificationFailure: return "verification-failure";
        case ErrorCode::Overflow: return "overflow";
        case ErrorCode::NotFound: return "not-found";
        case ErrorCode::MalformedHeader: return "malformed-header";
        case ErrorCode::RecordDimMismatch: return "record-dim-mismatch";
        case ErrorCode::VersionMismatch: return "version-mismatch";
        case ErrorCode::Io: return "io";
        case ErrorCode::Estimation: return "estimation-failure";
    }
    return "unknown";
}

}  // namespace lvann
