#include "vtsync/gptp.hpp"

#include <cmath>

#include "vtsync/error.hpp"

namespace vtsync::gptp {

namespace {

Picoseconds scale_round(double factor, Picoseconds d)
{
    const long double x = static_cast<long double>(factor) * static_cast<long double>(d.count());
    return Picoseconds{static_cast<std::int64_t>(std::floor(x + 0.5L))};
}

}  // namespace

const char* to_string(MessageKind kind)
{
    switch (kind) {
    case MessageKind::Sync:               return "Sync";
    case MessageKind::FollowUp:           return "Follow_Up";
    case MessageKind::PdelayReq:          return "Pdelay_Req";
    case MessageKind::PdelayResp:         return "Pdelay_Resp";
    case MessageKind::PdelayRespFollowUp: return "Pdelay_Resp_Follow_Up";
    }
    return "unknown";
}

SyncMessage SyncMessage::sync(std::uint64_t sequence, std::string grandmaster)
{
    return SyncMessage{MessageKind::Sync, Picoseconds{0}, Picoseconds{0}, std::monostate{}, sequence,
                       std::move(grandmaster)};
}

SyncMessage SyncMessage::follow_up(std::uint64_t sequence, std::string grandmaster, FollowUpPayload p)
{
    if (p.correction_field.count() < 0) {
        throw Error(ErrorKind::Protocol, "correction field must be non-negative");
    }
    return SyncMessage{MessageKind::FollowUp, Picoseconds{0}, Picoseconds{0}, p, sequence, std::move(grandmaster)};
}

Picoseconds two_way_delay(Picoseconds t1, Picoseconds t2, Picoseconds t3, Picoseconds t4)
{
    const auto twice = (t4 - t1) - (t3 - t2);
    return Picoseconds{static_cast<std::int64_t>(div_round_half_up(twice.count(), 2))};
}

PortState::PortState(std::string node, std::string neighbor, std::size_t window)
    : m_node(std::move(node))
    , m_neighbor(std::move(neighbor))
    , m_window(window == 0 ? 1 : window)
{}

Picoseconds PortState::record_exchange(Picoseconds measured)
{
    m_history.push_back(measured);
    if (m_history.size() > m_window) m_history.pop_front();
    __int128 sum = 0;
    for (auto v : m_history) sum += v.count();
    const auto mean = div_round_half_up(sum, static_cast<__int128>(m_history.size()));
    m_estimate = Picoseconds{std::max<std::int64_t>(0, static_cast<std::int64_t>(mean))};
    return m_estimate;
}

Picoseconds pdelay_estimate(const Link& link, PortState& state, Rng& rng, const LatencyRange& turnaround)
{
    const auto& initiator = state.node();
    const auto& responder = state.neighbor();
    if (!((link.a == initiator && link.b == responder) || (link.b == initiator && link.a == responder))) {
        throw Error(ErrorKind::Configuration, "port state does not belong to link " + link.a + "-" + link.b);
    }
    auto draw = [&](const LinkLatencies& l) { return l.txts.sample(rng) + l.ma_c.sample(rng) + l.rxts.sample(rng); };
    const Picoseconds t1{0};
    const Picoseconds t2 = t1 + draw(link.direction(initiator));
    const Picoseconds t3 = t2 + turnaround.sample(rng);
    const Picoseconds t4 = t3 + draw(link.direction(responder));
    return state.record_exchange(two_way_delay(t1, t2, t3, t4));
}

Picoseconds residence_time(Picoseconds rx_ts, Picoseconds tx_ts, double rate_ratio)
{
    if (tx_ts < rx_ts) {
        throw Error(ErrorKind::Ordering, "bridge transmitted a Sync before receiving it");
    }
    return scale_round(rate_ratio, tx_ts - rx_ts);
}

Picoseconds accumulate_correction(Picoseconds upstream_field, Picoseconds link_delay, Picoseconds residence)
{
    if (upstream_field.count() < 0 || link_delay.count() < 0 || residence.count() < 0) {
        throw Error(ErrorKind::Protocol, "correction field terms must be non-negative");
    }
    return upstream_field + link_delay + residence;
}

CorrectionDecomposition correction_term(Picoseconds rx_ts, const FollowUpPayload& follow_up, Picoseconds link_delay,
                                        double rate_ratio, Picoseconds actual_offset)
{
    const auto propagation = follow_up.correction_field + link_delay;
    const auto c = scale_round(rate_ratio, rx_ts) - (follow_up.precise_origin + propagation);
    return {c, actual_offset, c - actual_offset};
}

Picoseconds SynchronizedClock::read(Picoseconds local) const
{
    return m_base_sync + scale_round(m_rate, local - m_base_local);
}

void SynchronizedClock::set_rate(Picoseconds local, double rate)
{
    m_base_sync = read(local);
    m_base_local = local;
    m_rate = rate;
}

std::pair<Picoseconds, Picoseconds> SynchronizedClock::rebase(Picoseconds rx_local, Picoseconds origin) const
{
    return {rx_local - m_base_local, origin - m_base_sync};
}

PiServo::PiServo(double kp, double ki, Picoseconds interval)
    : m_kp(kp)
    , m_ki(ki)
    , m_interval(interval)
{
    if (interval.count() <= 0) throw Error(ErrorKind::Configuration, "servo interval must be positive");
}

void PiServo::update(SynchronizedClock& clock, Picoseconds local_now, Picoseconds c)
{
    const double err = static_cast<double>(c.count()) / static_cast<double>(m_interval.count());
    m_rate_adjust -= m_ki * err;
    clock.apply_correction(Picoseconds{std::llround(m_kp * static_cast<double>(c.count()))});
    clock.set_rate(local_now, 1.0 + m_rate_adjust);
}

RateRatioEstimator::RateRatioEstimator(std::size_t window)
    : m_window(window < 2 ? 2 : window)
{}

void RateRatioEstimator::add(Picoseconds grandmaster_time, Picoseconds local_time)
{
    m_history.emplace_back(grandmaster_time, local_time);
    if (m_history.size() > m_window) m_history.pop_front();
}

double RateRatioEstimator::estimate() const
{
    if (m_history.size() < 2) {
        throw Error(ErrorKind::Estimation, "rate ratio needs at least two observations");
    }
    const auto gm_span = m_history.back().first - m_history.front().first;
    const auto local_span = m_history.back().second - m_history.front().second;
    if (local_span.count() == 0) {
        throw Error(ErrorKind::Estimation, "rate ratio window has zero local span");
    }
    return static_cast<double>(static_cast<long double>(gm_span.count()) / static_cast<long double>(local_span.count()));
}

void SyncMatcher::record_sync(std::uint64_t sequence, const std::string& grandmaster, Picoseconds rx_local)
{
    m_pending[{sequence, grandmaster}] = rx_local;
    // Keep the table bounded; anything this old can no longer be matched.
    while (m_pending.size() > 64) m_pending.erase(m_pending.begin());
}

std::optional<Picoseconds> SyncMatcher::match(const SyncMessage& follow_up)
{
    auto it = m_pending.find({follow_up.sequence, follow_up.grandmaster});
    if (follow_up.kind != MessageKind::FollowUp || it == m_pending.end()) {
        ++m_unmatched;
        return std::nullopt;
    }
    const auto rx = it->second;
    m_pending.erase(it);
    return rx;
}

}  // namespace vtsync::gptp
