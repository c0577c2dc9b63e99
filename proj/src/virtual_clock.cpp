#include "vtsync/virtual_clock.hpp"

#include <algorithm>

#include "vtsync/error.hpp"

namespace vtsync {

PreemptionSet::PreemptionSet(std::vector<PreemptionRecord> records)
{
    for (const auto& r : records) append(r.preempt, r.resume);
}

void PreemptionSet::append(Microtick preempt, Microtick resume)
{
    if (resume <= preempt) {
        throw Error(ErrorKind::Configuration, "preemption must resume after it starts");
    }
    if (!m_records.empty() && preempt < m_records.back().resume) {
        throw Error(ErrorKind::Configuration, "preemptions must be sorted and non-overlapping");
    }
    const Microtick before = m_cumulative.empty() ? 0 : m_cumulative.back();
    m_records.push_back({m_records.size(), preempt, resume});
    m_cumulative.push_back(before + (resume - preempt));
}

Microtick PreemptionSet::completed_duration(Microtick l) const
{
    auto it = std::upper_bound(m_records.begin(), m_records.end(), l,
                               [](Microtick v, const PreemptionRecord& r) { return v < r.resume; });
    if (it == m_records.begin()) return 0;
    return m_cumulative[static_cast<std::size_t>(std::distance(m_records.begin(), it)) - 1];
}

const PreemptionRecord* PreemptionSet::ongoing(Microtick l) const
{
    auto it = std::upper_bound(m_records.begin(), m_records.end(), l,
                               [](Microtick v, const PreemptionRecord& r) { return v < r.resume; });
    if (it != m_records.end() && it->preempt < l) return &*it;
    return nullptr;
}

VirtualClock::VirtualClock(std::string host_clock_id, VirtualClockKind kind, Microtick start_tick,
                           PreemptionSet preemptions)
    : m_host(std::move(host_clock_id))
    , m_kind(kind)
    , m_start(start_tick)
    , m_preemptions(std::move(preemptions))
{
    if (m_start < 0) {
        throw Error(ErrorKind::Configuration, "virtual clock start microtick must be non-negative");
    }
    if (!m_preemptions.empty() && m_preemptions.records().front().preempt < m_start) {
        throw Error(ErrorKind::Configuration, "a VM cannot be preempted before it starts");
    }
}

Microtick VirtualClock::clock_offset(Microtick l) const
{
    if (l < m_start) {
        throw Error(ErrorKind::BeforeStart,
                    "host microtick " + std::to_string(l) + " precedes VM start " + std::to_string(m_start));
    }
    if (m_kind == VirtualClockKind::Discontinuous) return m_start;
    return m_start + m_preemptions.completed_duration(l);
}

VirtualReading VirtualClock::virtual_microtick(Microtick l) const
{
    if (m_kind == VirtualClockKind::Continuous) {
        if (const auto* p = m_preemptions.ongoing(l)) {
            return {raw_virtual_microtick(p->preempt), true};
        }
    }
    return {raw_virtual_microtick(l), false};
}

SuccessionVerdict check_succession(const VirtualClock& vc, Microtick first, Microtick last)
{
    SuccessionVerdict verdict;
    first = std::max(first, vc.start_tick());
    if (last <= first) return verdict;
    Microtick prev = vc.raw_virtual_microtick(first);
    for (Microtick l = first; l < last; ++l) {
        const Microtick next = vc.raw_virtual_microtick(l + 1);
        if (next - prev != 1) {
            verdict.holds = false;
            verdict.violations.push_back({l, next - prev});
        }
        prev = next;
    }
    return verdict;
}

ClockTrace make_virtual_trace(const VirtualClock& vc, const ClockTrace& host_trace)
{
    ClockTrace out{host_trace.clock_id + "/virtual", {}};
    out.samples.reserve(host_trace.samples.size());
    for (const auto& s : host_trace.samples) {
        if (s.tick < vc.start_tick()) continue;
        const auto r = vc.virtual_microtick(s.tick);
        if (r.frozen) continue;
        // A CVC reaches its frozen value again at resume; the tick event is the first one.
        if (!out.samples.empty() && r.value <= out.samples.back().tick) continue;
        out.samples.push_back({r.value, s.time});
    }
    return out;
}

bool check_simultaneity(const VirtualClock& vc, const ClockTrace& host_trace, const ClockTrace& virtual_trace)
{
    for (const auto& v : virtual_trace.samples) {
        auto it = std::lower_bound(host_trace.samples.begin(), host_trace.samples.end(), v.time,
                                   [](const TraceSample& s, RefTime t) { return s.time < t; });
        if (it == host_trace.samples.end() || it->time != v.time) return false;
        if (it->tick < vc.start_tick()) return false;
        const auto r = vc.virtual_microtick(it->tick);
        if (r.frozen || r.value != v.tick) return false;
    }
    return true;
}

bool check_simultaneity(const VirtualClock& vc, const ClockTrace& host_trace)
{
    return check_simultaneity(vc, host_trace, make_virtual_trace(vc, host_trace));
}

VirtualClockVerdict virtual_clock_condition(const VirtualClock& vc, const ClockTrace& host_trace,
                                            Picoseconds g, double r_max)
{
    if (!is_good_clock(host_trace, g, r_max)) {
        throw Error(ErrorKind::UnsupportedPrecondition, "host clock '" + host_trace.clock_id + "' is not a good clock");
    }
    VirtualClockVerdict out;
    const auto& hs = host_trace.samples;
    out.succession = check_succession(vc, hs.front().tick, hs.back().tick);

    const auto vtrace = make_virtual_trace(vc, host_trace);
    out.simultaneity = check_simultaneity(vc, host_trace, vtrace);

    // r_{nu(l),nu(l+1)} must equal r_{l,l+1}: each virtual interval must span exactly
    // one host interval of the same length.
    out.drift_equal = true;
    for (std::size_t i = 1; i < vtrace.samples.size(); ++i) {
        const auto& a = vtrace.samples[i - 1];
        const auto& b = vtrace.samples[i];
        if (b.tick != a.tick + 1) {
            out.drift_equal = false;
            break;
        }
        auto it = std::lower_bound(hs.begin(), hs.end(), a.time,
                                   [](const TraceSample& s, RefTime t) { return s.time < t; });
        if (it == hs.end() || std::next(it) == hs.end() || std::next(it)->time != b.time) {
            out.drift_equal = false;
            break;
        }
    }
    out.good = out.succession.holds && out.simultaneity;
    return out;
}

}  // namespace vtsync
