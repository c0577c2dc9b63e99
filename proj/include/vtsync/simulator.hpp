#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vtsync/analysis.hpp"
#include "vtsync/gptp.hpp"
#include "vtsync/hypervisor.hpp"
#include "vtsync/topology.hpp"

namespace vtsync {

enum class RateMode { None, Estimated, Oracle };
enum class ServoKind { Step, PI };
enum class DriftKind { Uniform, Identical };

const char* to_string(RateMode mode);
const char* to_string(ServoKind kind);
RateMode rate_mode_from_string(const std::string& s);
ServoKind servo_kind_from_string(const std::string& s);

struct LoadChange
{
    std::string host;
    std::string vm;
    std::int64_t at_probe = 0;
    double busy_fraction = 1.0;
};

struct HostSchedule
{
    SchedulerPolicy policy;  // load_profile is filled from the experiment's load changes
};

/// Adds `extra` to the correction term of `node` for periods [period, period + periods).
struct FaultInjection
{
    std::int64_t period = 0;
    std::int64_t periods = 1;
    std::string node;
    Picoseconds extra{0};
};

struct ExperimentConfig
{
    std::string name = "custom";
    std::string scenario = "custom";  // native-hwts, consolidating-hwts, partitioned-hwts, custom
    Topology topology;
    std::string provenance;

    Picoseconds sync_interval{0};  // defaults to the topology's period
    Picoseconds probe_period = sec(1);
    Picoseconds duration = sec(3600);
    Picoseconds warmup = sec(2);
    std::uint64_t seed = 1;

    Picoseconds granularity = ns(1);
    Picoseconds epoch_spread = us(500);
    DriftKind drift = DriftKind::Uniform;

    ServoKind servo = ServoKind::Step;
    double servo_kp = 0.7;
    double servo_ki = 0.3;
    RateMode rate_mode = RateMode::Estimated;
    bool syntonize = false;  // step servo also applies the rate ratio to the clock
    std::size_t rate_window = gptp::RateRatioEstimator::kDefaultWindow;

    Picoseconds pdelay_interval{0};  // defaults to the sync interval
    std::size_t pdelay_window = gptp::PortState::kDefaultWindow;
    LatencyRange pdelay_turnaround = LatencyRange::between(us(1), us(10));
    LatencyRange followup_delay = LatencyRange::between(us(1), us(10));
    LatencyRange default_residence = LatencyRange::between(us(5), us(50));

    std::map<std::string, HostSchedule> hosts;
    /// Per-node software timestamping latency, replacing the topology's value.
    std::map<std::string, LatencyRange> sw_timestamp;
    std::vector<LoadChange> load_changes;
    std::optional<FaultInjection> fault;

    /// Resolves defaults and checks cross-references. ErrorKind::Configuration on failure.
    void validate();

    std::int64_t probe_count() const { return duration / probe_period; }
};

enum class EventKind {
    ClockTickBatch,
    LoadChange,
    Preempt,
    Resume,
    ResyncStart,
    MsgDepart,
    MsgArrive,
    ProbeBroadcast,
    ProbeReceive,
};

const char* to_string(EventKind kind);

/// Link traversal of a message, available to observers for causality checks.
struct Transit
{
    std::string from;
    std::string to;
    RefTime depart;
};

struct SyncArrival
{
    std::int64_t period = 0;
    Transit transit;
};

struct FollowUpArrival
{
    gptp::SyncMessage message;
    Transit transit;
};

struct PdelayRequest
{
    std::size_t port = 0;
};

struct ProbeArrival
{
    std::int64_t probe = 0;
    Transit transit;
};

struct LoadChangePayload
{
    std::size_t change = 0;
};

using EventPayload =
    std::variant<std::monostate, SyncArrival, FollowUpArrival, PdelayRequest, ProbeArrival, LoadChangePayload>;

struct Event
{
    RefTime time;
    EventKind kind = EventKind::ClockTickBatch;
    std::string node;
    std::uint64_t seq = 0;
    EventPayload payload;
};

/// Total order (time, kind priority, node id, insertion sequence).
bool event_after(const Event& a, const Event& b);

using EventObserver = std::function<void(const Event&)>;

/// Timestamps of one probe at one receiver, in synchronized time.
struct ProbeReading
{
    std::string node;
    Picoseconds hw{0};
    Picoseconds sw{0};
};

/// sw - hw. ErrorKind::ModelViolation if the software timestamp precedes the hardware one.
Picoseconds gamma_virt(Picoseconds hw, Picoseconds sw);

struct PrecisionSample
{
    Picoseconds raw{0};       // max pairwise |sw difference|
    Picoseconds adjusted{0};  // max pairwise |hw difference|, i.e. after subtracting gamma_virt
    std::string node_a;       // pair attaining `adjusted`
    std::string node_b;
};

/// Max pairwise |difference| of raw and gamma_virt-adjusted timestamps. Empty with fewer
/// than two receivers.
std::optional<PrecisionSample> measure_precision(const std::vector<ProbeReading>& readings);

/// Max pairwise |difference| of plain timestamps; 0 for fewer than two.
Picoseconds measure_precision(const std::vector<Picoseconds>& timestamps);

struct ProbeSample
{
    std::int64_t index = 0;
    std::int64_t period = 0;
    RefTime time;
    std::vector<ProbeReading> readings;
    PrecisionSample precision;
    Picoseconds gamma_virt_a{0};
    Picoseconds gamma_virt_b{0};
};

struct CorrectionRecord
{
    std::int64_t period = 0;
    std::string node;
    RefTime applied;
    gptp::CorrectionDecomposition decomposition;
    double rate_ratio = 1.0;
};

struct SummaryStats
{
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;
    Picoseconds max{0};
};

SummaryStats summarize(const std::vector<Picoseconds>& values);

struct ExperimentResult
{
    std::string name;
    std::string provenance;
    std::uint64_t seed = 0;
    Picoseconds precision{0};
    Picoseconds reading_error{0};
    Picoseconds drift_offset{0};
    Picoseconds measurement_error{0};
    std::vector<ProbeSample> samples;
    std::vector<CorrectionRecord> corrections;
    std::size_t raw_violations = 0;       // raw > precision + gamma
    std::size_t adjusted_violations = 0;  // adjusted > precision
    SummaryStats raw;
    SummaryStats adjusted;
    std::optional<std::int64_t> load_change_probe;  // first load change after probe 0
    std::uint64_t unmatched_follow_ups = 0;
    std::uint64_t skipped_samples = 0;
    std::uint64_t events = 0;
    std::vector<std::string> leaves;
};

/// Largest per-period spread of reading delays across leaves.
Picoseconds max_reading_delay_spread(const ExperimentResult& result);

ExperimentResult run_experiment(ExperimentConfig config, const EventObserver& observer = {});

}  // namespace vtsync
