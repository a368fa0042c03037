#include "facesynth/error.hpp"

namespace facesynth {

const char* to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::invalid_input: return "invalid input";
    case ErrorCode::io_error: return "i/o error";
    case ErrorCode::insufficient_landmarks: return "insufficient landmarks";
    case ErrorCode::pose_failure: return "pose failure";
    case ErrorCode::degenerate_configuration: return "degenerate configuration";
    case ErrorCode::expression_unfittable: return "expression unfittable";
    case ErrorCode::alignment_failure: return "alignment failure";
    case ErrorCode::embedding_not_found: return "embedding not found";
    case ErrorCode::zero_variance: return "zero variance";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::empty_input: return "empty input";
    case ErrorCode::protocol_error: return "protocol error";
    case ErrorCode::leakage: return "train/test leakage";
    }
    return "unknown error";
}

} // namespace facesynth
