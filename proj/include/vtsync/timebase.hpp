#pragma once

#include <string>
#include <vector>

#include "vtsync/units.hpp"

namespace vtsync {

/// Dimensionless ratio held as an exact fixed-point count of 1e-15 units,
/// so that tick sums can be accumulated without floating-point error.
class DriftRate
{
public:
    static constexpr std::int64_t kScale = 1'000'000'000'000'000;  // 1e15

    constexpr DriftRate() = default;

    static DriftRate from_double(double ratio);
    static constexpr DriftRate from_fixed(std::int64_t fixed) { return DriftRate{fixed}; }

    constexpr std::int64_t fixed() const { return m_fixed; }
    double value() const { return static_cast<double>(m_fixed) / static_cast<double>(kScale); }

    friend constexpr auto operator<=>(DriftRate, DriftRate) = default;

private:
    constexpr explicit DriftRate(std::int64_t fixed) : m_fixed(fixed) {}
    std::int64_t m_fixed = kScale;
};

struct DriftSegment
{
    Microtick from = 0;
    DriftRate rate;
};

/// Piecewise-constant drift, one rate per run of microticks starting at `from`.
struct DriftModel
{
    enum class Kind { Constant, PiecewiseConstant };

    Kind kind = Kind::Constant;
    std::vector<DriftSegment> rates;
    double r_max = 0.0;

    static DriftModel constant(double rate, double r_max);

    /// True if every segment rate lies within [1 - r_max, 1 + r_max].
    bool respects_bound() const;
};

/// A drifting oscillator. Tick times are computed lazily from the drift model
/// against an exact rational accumulator and rounded half-up to 1 ps.
class PhysicalClock
{
public:
    PhysicalClock(std::string id, Picoseconds granularity, DriftModel drift, RefTime epoch = RefTime{});

    const std::string& id() const { return m_id; }
    Picoseconds granularity() const { return m_granularity; }
    const DriftModel& drift() const { return m_drift; }
    RefTime epoch() const { return m_epoch; }

    /// Reference time of microtick l.
    RefTime tick_time(Microtick l) const;

    /// Largest l with tick_time(l) <= t.
    Microtick timestamp(RefTime t) const;

    /// Local time reading at t: granularity times the latest microtick.
    Picoseconds local_time(RefTime t) const { return m_granularity * timestamp(t); }

    DriftRate rate_at(Microtick l) const;

private:
    std::size_t segment_for_tick(Microtick l) const;
    __int128 exact_numerator(Microtick l) const;  // g * sum(rate) in 1e-15 ps units

    std::string m_id;
    Picoseconds m_granularity;
    DriftModel m_drift;
    RefTime m_epoch;
    std::vector<__int128> m_prefix;  // sum of count*rate before each segment
};

struct TraceSample
{
    Microtick tick = 0;
    RefTime time;
};

struct ClockTrace
{
    std::string clock_id;
    std::vector<TraceSample> samples;
};

/// Samples tick_time for every microtick in [first, last].
ClockTrace make_trace(const PhysicalClock& clock, Microtick first, Microtick last);

/// |ts(l+1) - ts(l)| / g for the samples at l and l+1.
double drift_rate(const ClockTrace& trace, Microtick l, Picoseconds g);

/// Good-clock certification. Each consecutive pair spanning k microticks must
/// satisfy |dt - k*g| < r_max*k*g + reference_granularity, the last term being
/// the quantization of the integer-picosecond reference timeline.
bool is_good_clock(const ClockTrace& trace, Picoseconds g, double r_max,
                   Picoseconds reference_granularity = Picoseconds{1});

}  // namespace vtsync
