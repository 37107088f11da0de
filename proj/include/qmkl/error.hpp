#pragma once

#include <stdexcept>
#include <string>

namespace qmkl {

/// Failure categories shared by every module. The C API maps these one-to-one
/// onto its status codes.
enum class ErrorCode {
    Size = 1,
    Index,
    Argument,
    Dimension,
    Kind,
    Degenerate,
    Weight,
    Label,
    Parse,
    Io,
    UndefinedMetric,
    Placement,
    Aggregation,
    Internal,
};

const char *error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &what) {
    throw Error(code, what);
}

} // namespace qmkl
