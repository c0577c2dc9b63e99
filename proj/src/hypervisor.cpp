#include "vtsync/hypervisor.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vtsync/error.hpp"
#include "vtsync/timebase.hpp"
#include "vtsync/virtual_clock.hpp"

namespace vtsync {

void LatencyRange::validate(const std::string& what) const
{
    if (min.count() < 0 || max < min) {
        throw Error(ErrorKind::Configuration, what + ": latency range requires 0 <= min <= max");
    }
    if (distribution == LatencyDistribution::Constant && min != max) {
        throw Error(ErrorKind::Configuration, what + ": constant latency requires min == max");
    }
}

Picoseconds LatencyRange::sample(Rng& rng) const
{
    switch (distribution) {
    case LatencyDistribution::Constant:
        return min;
    case LatencyDistribution::TwoPoint:
        return std::bernoulli_distribution(0.5)(rng) ? max : min;
    case LatencyDistribution::Uniform:
        break;
    }
    if (min == max) return min;
    return Picoseconds{std::uniform_int_distribution<std::int64_t>(min.count(), max.count())(rng)};
}

Picoseconds sample_under_load(const LatencyRange& range, Rng& rng, double load)
{
    load = std::clamp(load, 0.0, 1.0);
    const auto span = static_cast<double>(range.jitter().count()) * (0.25 + 0.75 * load);
    const auto hi = range.min + Picoseconds{std::llround(span)};
    return LatencyRange{range.min, std::min(hi, range.max), range.distribution == LatencyDistribution::Constant
                                                                 ? LatencyDistribution::Uniform
                                                                 : range.distribution}
        .sample(rng);
}

HypervisorConfig HypervisorConfig::normalized() const
{
    vme.validate("hypervisor vme");
    sched.validate("hypervisor sched");
    vn.validate("hypervisor vn");
    if (vme.min.count() != 0) {
        throw Error(ErrorKind::Configuration, "hypervisor vme: minimum VM-exit latency must be 0");
    }
    if (sched.min.count() != 0) {
        throw Error(ErrorKind::Configuration, "hypervisor sched: minimum scheduling latency must be 0");
    }
    if (timestamping == Timestamping::HardwarePassthrough) {
        return HypervisorConfig{{}, {}, {}, Timestamping::HardwarePassthrough};
    }
    return *this;
}

HvLatencyBounds hv_latency_bounds(const HypervisorConfig& cfg)
{
    if (cfg.timestamping == Timestamping::HardwarePassthrough) return {};
    return {cfg.vn.min, cfg.vme.max + cfg.sched.max + cfg.vn.max};
}

Picoseconds sample_hv_latency(const HypervisorConfig& cfg, Rng& rng)
{
    if (cfg.timestamping == Timestamping::HardwarePassthrough) return Picoseconds{0};
    // vme and sched may draw 0; vn contributes the non-zero floor.
    return cfg.vme.sample(rng) + cfg.sched.sample(rng) + cfg.vn.sample(rng);
}

void SchedulerPolicy::validate() const
{
    if (kind == Kind::QuantumRoundRobin && quantum.count() <= 0) {
        throw Error(ErrorKind::Configuration, "round-robin scheduler requires a positive quantum");
    }
    std::set<std::string> vms;
    std::map<int, int> per_pcpu;
    for (const auto& [vm, pcpu] : vcpu_map) {
        if (!vms.insert(vm).second) {
            throw Error(ErrorKind::Configuration, "VM '" + vm + "' listed twice in the vCPU map");
        }
        if (pcpu < 0) throw Error(ErrorKind::Configuration, "pCPU index must be non-negative");
        if (++per_pcpu[pcpu] > 1 && kind == Kind::Pinned) {
            throw Error(ErrorKind::Configuration,
                        "pinned scheduler maps more than one vCPU to pCPU " + std::to_string(pcpu));
        }
    }
    for (const auto& [vm, steps] : load_profile) {
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (steps[i].busy_fraction < 0.0 || steps[i].busy_fraction > 1.0) {
                throw Error(ErrorKind::Configuration, "busy fraction of '" + vm + "' must lie in [0, 1]");
            }
            if (i > 0 && steps[i].at <= steps[i - 1].at) {
                throw Error(ErrorKind::Configuration, "load steps of '" + vm + "' must be strictly increasing");
            }
        }
    }
}

double SchedulerPolicy::busy_fraction(const std::string& vm, RefTime t) const
{
    auto it = load_profile.find(vm);
    if (it == load_profile.end()) return 1.0;
    double busy = 1.0;
    for (const auto& step : it->second) {
        if (step.at > t) break;
        busy = step.busy_fraction;
    }
    return busy;
}

double SchedulerPolicy::interference(const std::string& vm, RefTime t) const
{
    // Only VMs with a load profile are background load; others are assumed to be light.
    double load = 0.0;
    for (const auto& [other, steps] : load_profile) {
        if (other != vm) load = std::max(load, busy_fraction(other, t));
    }
    return load;
}

VcpuSchedule::VcpuSchedule(SchedulerPolicy policy, std::uint64_t seed)
    : m_policy(std::move(policy))
{
    m_policy.validate();
    Rng rng(seed);
    for (const auto& [vm, pcpu] : m_policy.vcpu_map) {
        m_phase[vm] = m_policy.phase_jitter.count() > 0
            ? Picoseconds{std::uniform_int_distribution<std::int64_t>(0, m_policy.phase_jitter.count())(rng)}
            : Picoseconds{0};
    }
}

Picoseconds VcpuSchedule::phase(const std::string& vm) const
{
    auto it = m_phase.find(vm);
    return it == m_phase.end() ? Picoseconds{0} : it->second;
}

std::vector<RefTime> VcpuSchedule::segment_starts(const std::string& vm) const
{
    std::vector<RefTime> starts{RefTime{}};
    auto self = std::find_if(m_policy.vcpu_map.begin(), m_policy.vcpu_map.end(),
                             [&](const auto& e) { return e.first == vm; });
    if (self == m_policy.vcpu_map.end()) return starts;
    for (const auto& [other, pcpu] : m_policy.vcpu_map) {
        if (other == vm || pcpu != self->second) continue;
        auto it = m_policy.load_profile.find(other);
        if (it == m_policy.load_profile.end()) continue;
        for (const auto& step : it->second) {
            if (step.at > RefTime{}) starts.push_back(step.at);
        }
    }
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    return starts;
}

VcpuSchedule::Layout VcpuSchedule::layout(const std::string& vm, RefTime segment_start) const
{
    Layout out;
    auto self = std::find_if(m_policy.vcpu_map.begin(), m_policy.vcpu_map.end(),
                             [&](const auto& e) { return e.first == vm; });
    if (self == m_policy.vcpu_map.end()) return out;
    out.own = m_policy.quantum;
    out.round = m_policy.quantum;
    bool before = true;
    for (const auto& [other, pcpu] : m_policy.vcpu_map) {
        if (other == vm) {
            before = false;
            continue;
        }
        if (pcpu != self->second) continue;
        const auto slot = Picoseconds{std::llround(static_cast<double>(m_policy.quantum.count()) *
                                                   m_policy.busy_fraction(other, segment_start))};
        out.round += slot;
        if (before) out.pre += slot;
    }
    return out;
}

std::optional<TimeWindow> VcpuSchedule::preemption_at(const std::string& vm, RefTime t) const
{
    if (m_policy.kind == SchedulerPolicy::Kind::Pinned) return std::nullopt;
    const auto starts = segment_starts(vm);
    auto it = std::upper_bound(starts.begin(), starts.end(), t);
    if (it == starts.begin()) return std::nullopt;
    const RefTime seg_start = *std::prev(it);
    const RefTime seg_end = it == starts.end() ? RefTime::max() : *it;

    const auto lay = layout(vm, seg_start);
    if (lay.round <= lay.own) return std::nullopt;

    const auto shifted = (t - seg_start) + phase(vm);
    const Picoseconds pos = shifted % lay.round;
    const RefTime rstart = t - pos;

    TimeWindow w;
    if (pos < lay.pre) {
        w = {rstart - lay.round + lay.pre + lay.own, rstart + lay.pre};
    } else if (pos >= lay.pre + lay.own) {
        w = {rstart + lay.pre + lay.own, rstart + lay.round + lay.pre};
    } else {
        return std::nullopt;
    }
    w.preempt = std::max(w.preempt, seg_start);
    w.resume = std::min(w.resume, seg_end);
    if (t < w.preempt || t >= w.resume) return std::nullopt;
    return w;
}

RefTime VcpuSchedule::next_running(const std::string& vm, RefTime t) const
{
    while (auto w = preemption_at(vm, t)) t = w->resume;
    return t;
}

std::vector<TimeWindow> VcpuSchedule::windows(const std::string& vm, RefTime horizon) const
{
    std::vector<TimeWindow> out;
    if (m_policy.kind == SchedulerPolicy::Kind::Pinned) return out;
    const auto starts = segment_starts(vm);
    for (std::size_t s = 0; s < starts.size() && starts[s] < horizon; ++s) {
        const RefTime seg_start = starts[s];
        const RefTime seg_end = std::min(s + 1 < starts.size() ? starts[s + 1] : horizon, horizon);
        const auto lay = layout(vm, seg_start);
        if (lay.round <= lay.own) continue;
        const Picoseconds ph = phase(vm) % lay.round;
        // Rotation k starts at seg_start - ph + k * round.
        for (RefTime r = seg_start - ph - lay.round; r < seg_end; r += lay.round) {
            TimeWindow w{r + lay.pre + lay.own, r + lay.round + lay.pre};
            w.preempt = std::max(w.preempt, seg_start);
            w.resume = std::min(w.resume, seg_end);
            if (w.resume <= w.preempt) continue;
            if (!out.empty() && out.back().resume >= w.preempt) {
                out.back().resume = std::max(out.back().resume, w.resume);
            } else {
                out.push_back(w);
            }
        }
    }
    return out;
}

std::vector<TimeWindow> generate_preemptions(const SchedulerPolicy& policy, const std::string& vm,
                                             Picoseconds horizon, std::uint64_t seed)
{
    if (horizon.count() <= 0) {
        throw Error(ErrorKind::Configuration, "preemption horizon must be positive");
    }
    return VcpuSchedule(policy, seed).windows(vm, RefTime{horizon});
}

PreemptionSet to_host_preemptions(const std::vector<TimeWindow>& windows, const PhysicalClock& host)
{
    PreemptionSet set;
    for (const auto& w : windows) {
        if (w.preempt < host.epoch()) continue;
        const auto a = host.timestamp(w.preempt);
        const auto b = host.timestamp(w.resume);
        if (b <= a) continue;
        if (!set.empty() && a < set.records().back().resume) continue;
        set.append(a, b);
    }
    return set;
}

}  // namespace vtsync
