#pragma once

#include <stdexcept>
#include <string>

namespace vtsync {

enum class ErrorKind {
    Configuration,
    PreEpoch,
    Trace,
    BeforeStart,
    UnsupportedPrecondition,
    Path,
    Ambiguity,
    EmptyScope,
    Ordering,
    Protocol,
    Estimation,
    ModelViolation,
    Provenance,
    Schema,
    Io,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; the kind distinguishes the failure class.
class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what)
        , m_kind(kind)
    {}

    ErrorKind kind() const noexcept { return m_kind; }

private:
    ErrorKind m_kind;
};

}  // namespace vtsync
