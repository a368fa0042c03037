#pragma once

#include <stdexcept>
#include <string>

namespace facesynth {

enum class ErrorCode {
    invalid_input,
    io_error,
    insufficient_landmarks,
    pose_failure,
    degenerate_configuration,
    expression_unfittable,
    alignment_failure,
    embedding_not_found,
    zero_variance,
    dimension_mismatch,
    empty_input,
    protocol_error,
    leakage,
};

const char* to_string(ErrorCode code) noexcept;

/**
 * Exception thrown by every facesynth module. Carries a machine-checkable code
 * next to the human readable message.
 */
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace facesynth
