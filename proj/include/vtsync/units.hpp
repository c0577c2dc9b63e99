#pragma once

#include <chrono>
#include <cstdint>
#include <ratio>
#include <string>
#include <string_view>

namespace vtsync {

/// Durations everywhere are integer picoseconds.
using Picoseconds = std::chrono::duration<std::int64_t, std::pico>;

/// Tag clock for the simulation reference timeline (granularity 1 ps).
struct ReferenceClock
{
    using rep = std::int64_t;
    using period = std::pico;
    using duration = Picoseconds;
    using time_point = std::chrono::time_point<ReferenceClock, Picoseconds>;
    static constexpr bool is_steady = true;
};

using RefTime = ReferenceClock::time_point;

/// Counter value of a physical or virtual clock.
using Microtick = std::int64_t;

constexpr RefTime ref_time(std::int64_t ps) { return RefTime{Picoseconds{ps}}; }

constexpr Picoseconds ps(std::int64_t v) { return Picoseconds{v}; }
constexpr Picoseconds ns(std::int64_t v) { return Picoseconds{v * 1'000}; }
constexpr Picoseconds us(std::int64_t v) { return Picoseconds{v * 1'000'000}; }
constexpr Picoseconds ms(std::int64_t v) { return Picoseconds{v * 1'000'000'000}; }
constexpr Picoseconds sec(std::int64_t v) { return Picoseconds{v * 1'000'000'000'000}; }

/// Picoseconds per unit for the suffixes accepted in documents ("ps", "ns", "us", "ms", "s").
/// Throws vtsync::Error on an unknown suffix.
std::int64_t unit_scale(std::string_view unit);

/// Converts an integer count in `unit` to picoseconds, rejecting overflow.
Picoseconds to_picoseconds(std::int64_t value, std::string_view unit);

/// Renders a duration in nanoseconds with two decimals, e.g. "307.96 ns".
std::string format_ns(Picoseconds d);

constexpr __int128 div_floor(__int128 a, __int128 b)
{
    __int128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

/// Round-half-up of a / b for b > 0.
constexpr __int128 div_round_half_up(__int128 a, __int128 b) { return div_floor(2 * a + b, 2 * b); }

}  // namespace vtsync
