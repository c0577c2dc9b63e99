#include "vtsync/units.hpp"

#include <cstdio>
#include <limits>

#include "vtsync/error.hpp"

namespace vtsync {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Configuration:           return "configuration";
    case ErrorKind::PreEpoch:                return "pre-epoch";
    case ErrorKind::Trace:                   return "trace";
    case ErrorKind::BeforeStart:             return "before-start";
    case ErrorKind::UnsupportedPrecondition: return "unsupported-precondition";
    case ErrorKind::Path:                    return "path";
    case ErrorKind::Ambiguity:               return "ambiguity";
    case ErrorKind::EmptyScope:              return "empty-scope";
    case ErrorKind::Ordering:                return "ordering";
    case ErrorKind::Protocol:                return "protocol";
    case ErrorKind::Estimation:              return "estimation";
    case ErrorKind::ModelViolation:          return "model-violation";
    case ErrorKind::Provenance:              return "provenance";
    case ErrorKind::Schema:                  return "schema";
    case ErrorKind::Io:                      return "io";
    }
    return "unknown";
}

std::int64_t unit_scale(std::string_view unit)
{
    if (unit == "ps") return 1;
    if (unit == "ns") return 1'000;
    if (unit == "us") return 1'000'000;
    if (unit == "ms") return 1'000'000'000;
    if (unit == "s") return 1'000'000'000'000;
    throw Error(ErrorKind::Schema, "unknown time unit '" + std::string(unit) + "' (expected ps, ns, us, ms or s)");
}

Picoseconds to_picoseconds(std::int64_t value, std::string_view unit)
{
    const auto scale = unit_scale(unit);
    if (value > std::numeric_limits<std::int64_t>::max() / scale ||
        value < std::numeric_limits<std::int64_t>::min() / scale) {
        throw Error(ErrorKind::Schema, "duration overflows 64-bit picoseconds");
    }
    return Picoseconds{value * scale};
}

std::string format_ns(Picoseconds d)
{
    const auto v = d.count();
    const auto mag = v < 0 ? -v : v;
    // two decimals of a nanosecond, rounded half-up on the magnitude
    const auto hundredths = (mag + 5) / 10;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld ns", v < 0 ? "-" : "",
                  static_cast<long long>(hundredths / 100), static_cast<long long>(hundredths % 100));
    return buf;
}

}  // namespace vtsync
