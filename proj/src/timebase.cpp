#include "vtsync/timebase.hpp"

#include <algorithm>
#include <cmath>

#include "vtsync/error.hpp"

namespace vtsync {

DriftRate DriftRate::from_double(double ratio)
{
    if (!std::isfinite(ratio) || ratio <= 0.0) {
        throw Error(ErrorKind::Configuration, "drift rate must be a positive finite ratio");
    }
    return DriftRate{static_cast<std::int64_t>(std::llround(static_cast<long double>(ratio) * kScale))};
}

DriftModel DriftModel::constant(double rate, double r_max)
{
    DriftModel m;
    m.kind = Kind::Constant;
    m.rates.push_back({0, DriftRate::from_double(rate)});
    m.r_max = r_max;
    return m;
}

bool DriftModel::respects_bound() const
{
    const auto lo = static_cast<long double>(DriftRate::kScale) * (1.0L - r_max);
    const auto hi = static_cast<long double>(DriftRate::kScale) * (1.0L + r_max);
    return std::all_of(rates.begin(), rates.end(), [&](const DriftSegment& s) {
        const auto f = static_cast<long double>(s.rate.fixed());
        return f >= std::floor(lo) && f <= std::ceil(hi);
    });
}

PhysicalClock::PhysicalClock(std::string id, Picoseconds granularity, DriftModel drift, RefTime epoch)
    : m_id(std::move(id))
    , m_granularity(granularity)
    , m_drift(std::move(drift))
    , m_epoch(epoch)
{
    if (m_granularity.count() < 1) {
        throw Error(ErrorKind::Configuration, "clock '" + m_id + "': granularity must be >= 1 ps");
    }
    if (m_drift.rates.empty()) {
        throw Error(ErrorKind::Configuration, "clock '" + m_id + "': drift model has no rates");
    }
    if (m_drift.rates.front().from != 0) {
        throw Error(ErrorKind::Configuration, "clock '" + m_id + "': first drift segment must start at microtick 0");
    }
    if (m_drift.r_max < 0.0) {
        throw Error(ErrorKind::Configuration, "clock '" + m_id + "': r_max must be non-negative");
    }
    if (m_epoch.time_since_epoch().count() < 0) {
        throw Error(ErrorKind::Configuration, "clock '" + m_id + "': epoch must be non-negative");
    }
    m_prefix.reserve(m_drift.rates.size());
    __int128 acc = 0;
    for (std::size_t i = 0; i < m_drift.rates.size(); ++i) {
        if (m_drift.rates[i].rate.fixed() <= 0) {
            throw Error(ErrorKind::Configuration, "clock '" + m_id + "': drift rates must be positive");
        }
        if (i > 0) {
            const auto count = m_drift.rates[i].from - m_drift.rates[i - 1].from;
            if (count <= 0) {
                throw Error(ErrorKind::Configuration, "clock '" + m_id + "': drift segments must be strictly increasing");
            }
            acc += static_cast<__int128>(count) * m_drift.rates[i - 1].rate.fixed();
        }
        m_prefix.push_back(acc);
    }
}

std::size_t PhysicalClock::segment_for_tick(Microtick l) const
{
    auto it = std::upper_bound(m_drift.rates.begin(), m_drift.rates.end(), l,
                               [](Microtick v, const DriftSegment& s) { return v < s.from; });
    return static_cast<std::size_t>(std::distance(m_drift.rates.begin(), it)) - 1;
}

__int128 PhysicalClock::exact_numerator(Microtick l) const
{
    const auto k = segment_for_tick(l);
    const auto& seg = m_drift.rates[k];
    const __int128 sum = m_prefix[k] + static_cast<__int128>(l - seg.from) * seg.rate.fixed();
    return sum * m_granularity.count();
}

RefTime PhysicalClock::tick_time(Microtick l) const
{
    if (l < 0) {
        throw Error(ErrorKind::Configuration, "clock '" + m_id + "': microtick must be non-negative");
    }
    const auto offset = div_round_half_up(exact_numerator(l), DriftRate::kScale);
    return m_epoch + Picoseconds{static_cast<std::int64_t>(offset)};
}

Microtick PhysicalClock::timestamp(RefTime t) const
{
    if (t < m_epoch) {
        throw Error(ErrorKind::PreEpoch, "clock '" + m_id + "': time precedes the clock epoch");
    }
    // Last segment whose first tick is not after t.
    std::size_t lo = 0;
    std::size_t hi = m_drift.rates.size();
    while (hi - lo > 1) {
        const auto mid = lo + (hi - lo) / 2;
        if (tick_time(m_drift.rates[mid].from) <= t) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const auto k = lo;
    const auto& seg = m_drift.rates[k];
    const __int128 x = static_cast<__int128>((t - m_epoch).count()) * DriftRate::kScale;
    const __int128 g = m_granularity.count();
    const __int128 est = div_floor(x - g * m_prefix[k], g * seg.rate.fixed());
    Microtick l = seg.from + static_cast<Microtick>(std::max<__int128>(est, 0));
    while (l > 0 && tick_time(l) > t) --l;
    while (tick_time(l + 1) <= t) ++l;
    return l;
}

DriftRate PhysicalClock::rate_at(Microtick l) const
{
    return m_drift.rates[segment_for_tick(std::max<Microtick>(l, 0))].rate;
}

ClockTrace make_trace(const PhysicalClock& clock, Microtick first, Microtick last)
{
    if (first < 0 || last < first) {
        throw Error(ErrorKind::Trace, "invalid trace range");
    }
    ClockTrace trace{clock.id(), {}};
    trace.samples.reserve(static_cast<std::size_t>(last - first + 1));
    for (Microtick l = first; l <= last; ++l) {
        trace.samples.push_back({l, clock.tick_time(l)});
    }
    return trace;
}

namespace {

const TraceSample& sample_at(const ClockTrace& trace, Microtick l)
{
    auto it = std::lower_bound(trace.samples.begin(), trace.samples.end(), l,
                               [](const TraceSample& s, Microtick v) { return s.tick < v; });
    if (it == trace.samples.end() || it->tick != l) {
        throw Error(ErrorKind::Trace, "trace '" + trace.clock_id + "' has no sample at microtick " + std::to_string(l));
    }
    return *it;
}

}  // namespace

double drift_rate(const ClockTrace& trace, Microtick l, Picoseconds g)
{
    const auto& a = sample_at(trace, l);
    const auto& b = sample_at(trace, l + 1);
    const auto dt = std::llabs((b.time - a.time).count());
    return static_cast<double>(dt) / static_cast<double>(g.count());
}

bool is_good_clock(const ClockTrace& trace, Picoseconds g, double r_max, Picoseconds reference_granularity)
{
    if (trace.samples.size() < 2) {
        throw Error(ErrorKind::Trace, "good-clock check needs at least two samples");
    }
    for (std::size_t i = 1; i < trace.samples.size(); ++i) {
        const auto& a = trace.samples[i - 1];
        const auto& b = trace.samples[i];
        if (b.tick <= a.tick || b.time <= a.time) {
            throw Error(ErrorKind::Trace, "trace samples must be strictly increasing");
        }
        const long double nominal = static_cast<long double>(b.tick - a.tick) * g.count();
        const long double dt = static_cast<long double>((b.time - a.time).count());
        const long double slack = r_max * nominal + reference_granularity.count();
        if (std::fabs(dt - nominal) >= slack) return false;
    }
    return true;
}

}  // namespace vtsync
