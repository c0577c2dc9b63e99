#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vtsync/units.hpp"

namespace vtsync {

using Rng = std::mt19937_64;

enum class LatencyDistribution { Uniform, Constant, TwoPoint };

struct LatencyRange
{
    Picoseconds min{0};
    Picoseconds max{0};
    LatencyDistribution distribution = LatencyDistribution::Uniform;

    static LatencyRange zero() { return {}; }
    static LatencyRange between(Picoseconds lo, Picoseconds hi) { return {lo, hi, LatencyDistribution::Uniform}; }

    void validate(const std::string& what) const;
    Picoseconds jitter() const { return max - min; }

    /// Draws one latency within [min, max].
    Picoseconds sample(Rng& rng) const;

    friend bool operator==(const LatencyRange&, const LatencyRange&) = default;
};

/// Draws from [min, min + span * (0.25 + 0.75 * load)], load clamped to [0, 1].
/// Models host interference shifting a latency towards the upper end of its range.
Picoseconds sample_under_load(const LatencyRange& range, Rng& rng, double load);

enum class Timestamping { HardwarePassthrough, SoftwareInVm };

struct HypervisorConfig
{
    LatencyRange vme;    // VM exits
    LatencyRange sched;  // vCPU scheduling
    LatencyRange vn;     // virtual networking
    Timestamping timestamping = Timestamping::SoftwareInVm;

    /// Checks L_min(vme) = L_min(sched) = 0 and zeroes every range under passthrough.
    HypervisorConfig normalized() const;

    friend bool operator==(const HypervisorConfig&, const HypervisorConfig&) = default;
};

struct HvLatencyBounds
{
    Picoseconds min{0};
    Picoseconds max{0};
};

/// L_min(hv) = L_min(vn); L_max(hv) = L_max(vme) + L_max(sched) + L_max(vn).
HvLatencyBounds hv_latency_bounds(const HypervisorConfig& cfg);

/// One hypervisor latency draw; 0 under hardware passthrough.
Picoseconds sample_hv_latency(const HypervisorConfig& cfg, Rng& rng);

struct LoadStep
{
    RefTime at;
    double busy_fraction = 1.0;
};

struct SchedulerPolicy
{
    enum class Kind { Pinned, QuantumRoundRobin };

    Kind kind = Kind::Pinned;
    Picoseconds quantum{0};
    /// vCPU -> pCPU, in rotation order (one vCPU per VM).
    std::vector<std::pair<std::string, int>> vcpu_map;
    /// Per-VM busy fraction over time; VMs without steps are fully busy.
    std::map<std::string, std::vector<LoadStep>> load_profile;
    /// Upper bound of a seeded random phase shift applied to the rotation.
    Picoseconds phase_jitter{0};

    void validate() const;
    double busy_fraction(const std::string& vm, RefTime t) const;
    /// Highest busy fraction at t among the other VMs that have a load profile.
    double interference(const std::string& vm, RefTime t) const;
};

struct TimeWindow
{
    RefTime preempt;
    RefTime resume;

    friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// Round-robin rotation of the vCPUs sharing a pCPU. Within a rotation the VM under
/// consideration runs a full quantum and each co-runner runs busy_fraction * quantum;
/// a load change restarts the rotation at the change time.
class VcpuSchedule
{
public:
    VcpuSchedule(SchedulerPolicy policy, std::uint64_t seed);

    const SchedulerPolicy& policy() const { return m_policy; }

    /// The preemption window of `vm` containing t (preempt <= t < resume), if any.
    /// Windows are clipped at load-change boundaries.
    std::optional<TimeWindow> preemption_at(const std::string& vm, RefTime t) const;

    /// Earliest time >= t at which `vm` is running.
    RefTime next_running(const std::string& vm, RefTime t) const;

    /// All preemption windows of `vm` starting before `horizon`, merged and clipped.
    std::vector<TimeWindow> windows(const std::string& vm, RefTime horizon) const;

private:
    struct Layout
    {
        Picoseconds pre{0};    // co-runner time before the VM's slot
        Picoseconds own{0};    // the VM's slot
        Picoseconds round{0};  // full rotation
    };

    std::vector<RefTime> segment_starts(const std::string& vm) const;
    Layout layout(const std::string& vm, RefTime segment_start) const;
    Picoseconds phase(const std::string& vm) const;

    SchedulerPolicy m_policy;
    std::map<std::string, Picoseconds> m_phase;
};

/// Preemption windows for one VM over [0, horizon). Pinned policies and uncontended
/// pCPUs yield an empty trace. Deterministic for a fixed seed.
std::vector<TimeWindow> generate_preemptions(const SchedulerPolicy& policy, const std::string& vm,
                                             Picoseconds horizon, std::uint64_t seed);

class PhysicalClock;
class PreemptionSet;

/// Expresses reference-time preemption windows in host microticks.
PreemptionSet to_host_preemptions(const std::vector<TimeWindow>& windows, const PhysicalClock& host);

}  // namespace vtsync
