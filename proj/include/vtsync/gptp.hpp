#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include "vtsync/hypervisor.hpp"
#include "vtsync/topology.hpp"

namespace vtsync::gptp {

enum class MessageKind { Sync, FollowUp, PdelayReq, PdelayResp, PdelayRespFollowUp };

const char* to_string(MessageKind kind);

/// Synchronization information of a two-step Follow_Up.
struct FollowUpPayload
{
    Picoseconds precise_origin{0};    // grandmaster tx timestamp of the Sync
    Picoseconds correction_field{0};  // accumulated link delays and residence times
    double rate_ratio = 1.0;          // sender's grandmaster/local frequency ratio
};

struct PdelayPayload
{
    Picoseconds request_receipt{0};    // t2, responder time
    Picoseconds response_origin{0};    // t3, responder time
};

/// (estimated delay, tx timestamp, payload) tuple; Sync carries (0, 0, empty).
struct SyncMessage
{
    MessageKind kind = MessageKind::Sync;
    Picoseconds estimated_delay{0};
    Picoseconds tx_timestamp{0};
    std::variant<std::monostate, FollowUpPayload, PdelayPayload> payload;
    std::uint64_t sequence = 0;
    std::string grandmaster;

    static SyncMessage sync(std::uint64_t sequence, std::string grandmaster);
    static SyncMessage follow_up(std::uint64_t sequence, std::string grandmaster, FollowUpPayload p);
};

/// ((t4 - t1) - (t3 - t2)) / 2, rounded half-up to 1 ps.
Picoseconds two_way_delay(Picoseconds t1, Picoseconds t2, Picoseconds t3, Picoseconds t4);

/// Link-delay state kept by the downstream end of a sync-tree link.
class PortState
{
public:
    static constexpr std::size_t kDefaultWindow = 8;

    PortState(std::string node, std::string neighbor, std::size_t window = kDefaultWindow);

    const std::string& node() const { return m_node; }
    const std::string& neighbor() const { return m_neighbor; }
    std::size_t window() const { return m_window; }

    /// Adds one two-way measurement; the estimate is the mean over the window,
    /// clamped at zero.
    Picoseconds record_exchange(Picoseconds measured);

    Picoseconds estimated_link_delay() const { return m_estimate; }
    bool has_estimate() const { return !m_history.empty(); }

    double neighbor_rate_ratio = 1.0;
    std::optional<Picoseconds> last_sync_rx;

private:
    std::string m_node;
    std::string m_neighbor;
    std::size_t m_window;
    std::deque<Picoseconds> m_history;
    Picoseconds m_estimate{0};
};

/// One standard two-way exchange over sampled latencies of `link`, initiated by
/// `state.node()`. The responder turnaround is drawn from `turnaround`.
Picoseconds pdelay_estimate(const Link& link, PortState& state, Rng& rng,
                            const LatencyRange& turnaround = LatencyRange::between(us(1), us(10)));

/// R * (tx - rx), rounded half-up to 1 ps. ErrorKind::Ordering if tx precedes rx.
Picoseconds residence_time(Picoseconds rx_ts, Picoseconds tx_ts, double rate_ratio);

/// Correction field leaving a bridge: upstream field + link delay + residence time.
Picoseconds accumulate_correction(Picoseconds upstream_field, Picoseconds link_delay, Picoseconds residence);

struct CorrectionDecomposition
{
    Picoseconds correction_term{0};
    Picoseconds actual_offset{0};  // ground truth, instrumentation only
    Picoseconds reading_delay{0};  // correction_term - actual_offset
};

/// c = R * rx - (precise origin + correction field + link delay). `rx_ts` and the
/// precise origin must be expressed against a common epoch.
CorrectionDecomposition correction_term(Picoseconds rx_ts, const FollowUpPayload& follow_up, Picoseconds link_delay,
                                        double rate_ratio, Picoseconds actual_offset = Picoseconds{0});

/// offset - c.
constexpr Picoseconds apply_correction(Picoseconds offset, Picoseconds c) { return offset - c; }

/// Grandmaster-time estimate layered over a raw physical clock:
/// sync(local) = base_sync + R * (local - base_local). The physical clock is never touched.
class SynchronizedClock
{
public:
    Picoseconds read(Picoseconds local) const;

    /// Shifts the synchronized time by -c.
    void apply_correction(Picoseconds c) { m_base_sync -= c; }

    /// Changes the applied rate without a jump at `local`.
    void set_rate(Picoseconds local, double rate);

    double rate() const { return m_rate; }

    /// Rebases correction-term inputs onto this clock's anchor: returns {rx', origin'}
    /// such that R * rx' - origin' == read(rx) - origin.
    std::pair<Picoseconds, Picoseconds> rebase(Picoseconds rx_local, Picoseconds origin) const;

private:
    Picoseconds m_base_local{0};
    Picoseconds m_base_sync{0};
    double m_rate = 1.0;
};

/// Proportional-integral alternative to the step servo. Applies kp * c as a step and
/// integrates ki * c / interval into the applied rate.
class PiServo
{
public:
    PiServo(double kp, double ki, Picoseconds interval);
    void update(SynchronizedClock& clock, Picoseconds local_now, Picoseconds c);

private:
    double m_kp;
    double m_ki;
    Picoseconds m_interval;
    double m_rate_adjust = 0.0;
};

/// Grandmaster/local frequency ratio from a sliding window of
/// (grandmaster time at reception, local reception time) pairs.
class RateRatioEstimator
{
public:
    static constexpr std::size_t kDefaultWindow = 8;

    explicit RateRatioEstimator(std::size_t window = kDefaultWindow);

    void add(Picoseconds grandmaster_time, Picoseconds local_time);
    std::size_t size() const { return m_history.size(); }

    /// ErrorKind::Estimation with fewer than two entries or a zero local span.
    double estimate() const;

private:
    std::size_t m_window;
    std::deque<std::pair<Picoseconds, Picoseconds>> m_history;
};

/// Matches Follow_Ups to Syncs by (sequence, grandmaster). Unmatched Follow_Ups are
/// dropped and counted.
class SyncMatcher
{
public:
    void record_sync(std::uint64_t sequence, const std::string& grandmaster, Picoseconds rx_local);
    std::optional<Picoseconds> match(const SyncMessage& follow_up);
    std::uint64_t unmatched() const { return m_unmatched; }

private:
    std::map<std::pair<std::uint64_t, std::string>, Picoseconds> m_pending;
    std::uint64_t m_unmatched = 0;
};

}  // namespace vtsync::gptp
