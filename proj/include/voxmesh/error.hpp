#pragma once

#include <stdexcept>
#include <string>

namespace voxmesh {

enum class ErrorCode {
    EmptyInput,
    InsufficientPoints,
    InvalidParam,
    DegenerateInput,
    TargetExceedsInput,
    QuotaExceedsPopulation,
    NonManifoldEdge,
    OrientationError,
    NonManifoldInput,
    MeshingFailed,
    EmptyMesh,
    ParseError,
    IoError,
    ProjectionUnstable,
};

const char* to_string(ErrorCode code);

/// Single exception type for the whole library; `code()` identifies the
/// contract violation, `what()` carries the details.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace voxmesh
