#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vtsync/timebase.hpp"

namespace vtsync {

/// One preemption of a VM, in microticks of its host's physical clock.
struct PreemptionRecord
{
    std::size_t index = 0;
    Microtick preempt = 0;
    Microtick resume = 0;

    Microtick duration() const { return resume - preempt; }
};

/// Sorted, non-overlapping preemptions with positive durations.
class PreemptionSet
{
public:
    PreemptionSet() = default;
    explicit PreemptionSet(std::vector<PreemptionRecord> records);

    /// Appends a preemption that starts at or after the end of the last one.
    void append(Microtick preempt, Microtick resume);

    const std::vector<PreemptionRecord>& records() const { return m_records; }
    bool empty() const { return m_records.empty(); }

    /// Sum of durations of the preemptions that resumed at or before l.
    Microtick completed_duration(Microtick l) const;

    /// The preemption in progress at l (preempt < l < resume), if any.
    const PreemptionRecord* ongoing(Microtick l) const;

private:
    std::vector<PreemptionRecord> m_records;
    std::vector<Microtick> m_cumulative;  // durations summed through each record
};

enum class VirtualClockKind { Discontinuous, Continuous };

struct VirtualReading
{
    Microtick value = 0;
    bool frozen = false;  // CVC read during an ongoing preemption
};

/// A virtual clock derived from its host's physical clock by an offset applied on read.
class VirtualClock
{
public:
    VirtualClock(std::string host_clock_id, VirtualClockKind kind, Microtick start_tick,
                 PreemptionSet preemptions = {});

    const std::string& host_clock_id() const { return m_host; }
    VirtualClockKind kind() const { return m_kind; }
    Microtick start_tick() const { return m_start; }
    const PreemptionSet& preemptions() const { return m_preemptions; }
    PreemptionSet& preemptions() { return m_preemptions; }

    /// o(l): l0 for a DVC, l0 plus completed preemption durations for a CVC.
    Microtick clock_offset(Microtick l) const;

    /// nu(l) = l - o(l). A CVC inside a preemption stays at its pre-preemption value.
    VirtualReading virtual_microtick(Microtick l) const;

    /// nu(l) = l - o(l) without the freeze; used for the succession analysis.
    Microtick raw_virtual_microtick(Microtick l) const { return l - clock_offset(l); }

private:
    std::string m_host;
    VirtualClockKind m_kind;
    Microtick m_start;
    PreemptionSet m_preemptions;
};

struct SuccessionViolation
{
    Microtick at = 0;    // host microtick l where nu(l+1) - nu(l) != 1
    Microtick step = 0;  // nu(l+1) - nu(l), i.e. 1 - p across a CVC resume
};

struct SuccessionVerdict
{
    bool holds = true;
    std::vector<SuccessionViolation> violations;
};

/// Checks nu(l+1) = nu(l) + 1 for l in [first, last).
SuccessionVerdict check_succession(const VirtualClock& vc, Microtick first, Microtick last);

/// Offset-on-read virtual tick trace: one (nu, ts) sample per host sample outside
/// ongoing preemptions.
ClockTrace make_virtual_trace(const VirtualClock& vc, const ClockTrace& host_trace);

/// True iff every virtual tick in `virtual_trace` is the same event as the host tick
/// carrying that virtual value.
bool check_simultaneity(const VirtualClock& vc, const ClockTrace& host_trace, const ClockTrace& virtual_trace);
bool check_simultaneity(const VirtualClock& vc, const ClockTrace& host_trace);

struct VirtualClockVerdict
{
    bool good = false;
    SuccessionVerdict succession;
    bool simultaneity = false;
    bool drift_equal = false;  // per-interval virtual drift equals host drift
};

/// Succession + simultaneity over a good host clock. Throws
/// ErrorKind::UnsupportedPrecondition when the host trace is not a good clock.
VirtualClockVerdict virtual_clock_condition(const VirtualClock& vc, const ClockTrace& host_trace,
                                            Picoseconds g, double r_max);

}  // namespace vtsync
