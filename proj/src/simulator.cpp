#include "vtsync/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <queue>
#include <set>

#include "vtsync/error.hpp"
#include "vtsync/timebase.hpp"

namespace vtsync {

const char* to_string(RateMode mode)
{
    switch (mode) {
    case RateMode::None:      return "none";
    case RateMode::Estimated: return "estimated";
    case RateMode::Oracle:    return "oracle";
    }
    return "unknown";
}

const char* to_string(ServoKind kind)
{
    return kind == ServoKind::Step ? "step" : "pi";
}

RateMode rate_mode_from_string(const std::string& s)
{
    if (s == "none") return RateMode::None;
    if (s == "estimated") return RateMode::Estimated;
    if (s == "oracle") return RateMode::Oracle;
    throw Error(ErrorKind::Configuration, "unknown rate ratio mode '" + s + "'");
}

ServoKind servo_kind_from_string(const std::string& s)
{
    if (s == "step") return ServoKind::Step;
    if (s == "pi") return ServoKind::PI;
    throw Error(ErrorKind::Configuration, "unknown servo '" + s + "'");
}

const char* to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::ClockTickBatch: return "clock-tick-batch";
    case EventKind::LoadChange:     return "load-change";
    case EventKind::Preempt:        return "preempt";
    case EventKind::Resume:         return "resume";
    case EventKind::ResyncStart:    return "resync-start";
    case EventKind::MsgDepart:      return "msg-depart";
    case EventKind::MsgArrive:      return "msg-arrive";
    case EventKind::ProbeBroadcast: return "probe-broadcast";
    case EventKind::ProbeReceive:   return "probe-receive";
    }
    return "unknown";
}

bool event_after(const Event& a, const Event& b)
{
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    if (a.node != b.node) return a.node > b.node;
    return a.seq > b.seq;
}

void ExperimentConfig::validate()
{
    topology.validate();
    if (sync_interval.count() == 0) sync_interval = topology.sync_interval;
    if (sync_interval.count() <= 0) throw Error(ErrorKind::Configuration, "sync interval must be positive");
    if (pdelay_interval.count() == 0) pdelay_interval = sync_interval;
    if (pdelay_interval.count() <= 0) throw Error(ErrorKind::Configuration, "pdelay interval must be positive");
    if (probe_period.count() <= 0) throw Error(ErrorKind::Configuration, "probe period must be positive");
    if (duration < probe_period) throw Error(ErrorKind::Configuration, "duration is shorter than one probe period");
    if (warmup.count() < 0) throw Error(ErrorKind::Configuration, "warm-up must be non-negative");
    if (granularity.count() <= 0) throw Error(ErrorKind::Configuration, "clock granularity must be positive");
    if (epoch_spread.count() < 0) throw Error(ErrorKind::Configuration, "epoch spread must be non-negative");
    pdelay_turnaround.validate("pdelay turnaround");
    followup_delay.validate("follow-up delay");
    default_residence.validate("default residence");

    const auto& gm = topology.grandmaster();
    (void)topology.tree_edges(gm.id);
    if (!topology.probe) throw Error(ErrorKind::Configuration, "experiment needs a probe specification");
    for (const auto& t : topology.probe->targets) {
        try {
            (void)topology.shortest_path(topology.probe->source, t);
        } catch (const Error& e) {
            throw Error(ErrorKind::Configuration, "probe target '" + t + "' is unreachable: " + e.what());
        }
    }

    for (const auto& [id, r] : sw_timestamp) {
        if (!topology.has_node(id)) throw Error(ErrorKind::Configuration, "sw_timestamp for unknown node '" + id + "'");
        r.validate("sw_timestamp of " + id);
        for (auto& n : topology.nodes) {
            if (n.id == id) n.sw_timestamp = r;
        }
    }

    std::set<std::string> domains;
    for (const auto& n : topology.nodes) domains.insert(n.clock_domain());
    for (auto& [host, sched] : hosts) {
        if (!domains.count(host)) throw Error(ErrorKind::Configuration, "scheduler for unknown host '" + host + "'");
        sched.policy.validate();
    }
    for (const auto& c : load_changes) {
        if (!hosts.count(c.host)) {
            throw Error(ErrorKind::Configuration, "load change on host '" + c.host + "' without a scheduler");
        }
    }
    if (fault && !topology.has_node(fault->node)) {
        throw Error(ErrorKind::Configuration, "fault injection names unknown node '" + fault->node + "'");
    }
}

Picoseconds gamma_virt(Picoseconds hw, Picoseconds sw)
{
    if (sw < hw) {
        throw Error(ErrorKind::ModelViolation, "software timestamp precedes the hardware timestamp");
    }
    return sw - hw;
}

std::optional<PrecisionSample> measure_precision(const std::vector<ProbeReading>& readings)
{
    if (readings.size() < 2) return std::nullopt;
    auto hw_lo = readings.begin();
    auto hw_hi = readings.begin();
    Picoseconds sw_lo = readings.front().sw;
    Picoseconds sw_hi = readings.front().sw;
    for (auto it = readings.begin(); it != readings.end(); ++it) {
        if (it->hw < hw_lo->hw) hw_lo = it;
        if (it->hw > hw_hi->hw) hw_hi = it;
        sw_lo = std::min(sw_lo, it->sw);
        sw_hi = std::max(sw_hi, it->sw);
    }
    if (hw_lo == hw_hi) hw_hi = std::next(readings.begin());
    if (hw_lo > hw_hi) std::swap(hw_lo, hw_hi);
    return PrecisionSample{sw_hi - sw_lo, std::chrono::abs(hw_hi->hw - hw_lo->hw), hw_lo->node, hw_hi->node};
}

Picoseconds measure_precision(const std::vector<Picoseconds>& timestamps)
{
    if (timestamps.size() < 2) return Picoseconds{0};
    const auto [lo, hi] = std::minmax_element(timestamps.begin(), timestamps.end());
    return *hi - *lo;
}

SummaryStats summarize(const std::vector<Picoseconds>& values)
{
    SummaryStats s;
    s.count = values.size();
    if (values.empty()) return s;
    long double sum = 0;
    for (auto v : values) {
        sum += static_cast<long double>(v.count());
        s.max = std::max(s.max, v);
    }
    const long double mean = sum / static_cast<long double>(values.size());
    long double sq = 0;
    for (auto v : values) {
        const long double d = static_cast<long double>(v.count()) - mean;
        sq += d * d;
    }
    s.mean = static_cast<double>(mean);
    s.stddev = static_cast<double>(std::sqrt(sq / static_cast<long double>(values.size())));
    return s;
}

Picoseconds max_reading_delay_spread(const ExperimentResult& result)
{
    const std::set<std::string> leaves(result.leaves.begin(), result.leaves.end());
    std::map<std::int64_t, std::pair<Picoseconds, Picoseconds>> per_period;
    for (const auto& c : result.corrections) {
        if (!leaves.count(c.node)) continue;
        const auto eps = c.decomposition.reading_delay;
        auto [it, fresh] = per_period.try_emplace(c.period, eps, eps);
        if (!fresh) {
            it->second.first = std::min(it->second.first, eps);
            it->second.second = std::max(it->second.second, eps);
        }
    }
    Picoseconds spread{0};
    for (const auto& [period, range] : per_period) spread = std::max(spread, range.second - range.first);
    return spread;
}

namespace {

Rng make_rng(std::uint64_t seed, std::uint32_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    return Rng(seq);
}

struct EventOrder
{
    bool operator()(const Event& a, const Event& b) const { return event_after(a, b); }
};

struct SyncRecord
{
    Picoseconds rx_local{0};
    RefTime rx_time;
    Picoseconds tx_local{0};
    RefTime tx_time;
};

struct TreeNode
{
    std::string parent;
    std::vector<std::string> children;
    std::optional<gptp::PortState> port;
    gptp::RateRatioEstimator estimator;
    gptp::SyncMatcher matcher;
    std::map<std::int64_t, SyncRecord> syncs;
};

struct Domain
{
    gptp::SynchronizedClock sync;
    std::optional<gptp::PiServo> pi;
};

struct PendingProbe
{
    ProbeSample sample;
    std::size_t expected = 0;
};

class Engine
{
public:
    Engine(ExperimentConfig cfg, const EventObserver& observer)
        : m_cfg(std::move(cfg))
        , m_topo(m_cfg.topology)
        , m_observer(observer)
        , m_clock_rng(make_rng(m_cfg.seed, 1))
        , m_net_rng(make_rng(m_cfg.seed, 2))
        , m_probe_rng(make_rng(m_cfg.seed, 3))
    {}

    ExperimentResult run();

private:
    void setup();
    void push(RefTime t, EventKind kind, std::string node, EventPayload payload = {});
    void handle(const Event& e);

    void on_resync(const Event& e);
    void on_sync_arrival(const Event& e, const SyncArrival& a);
    void on_follow_up(const Event& e, const FollowUpArrival& a, bool deferred);
    void on_pdelay(const Event& e, const PdelayRequest& r);
    void on_probe_broadcast(const Event& e);
    void on_probe_receive(const Event& e, const ProbeArrival& a);

    void apply_correction(const std::string& node, const gptp::SyncMessage& msg, RefTime now);
    void schedule_probe(std::int64_t k);

    const PhysicalClock& clock_of(const std::string& node) const
    {
        return m_clocks.at(m_topo.node(node).clock_domain());
    }
    Picoseconds local(const std::string& node, RefTime t) const { return clock_of(node).local_time(t); }
    Picoseconds synchronized(const std::string& node, Picoseconds local_time) const;
    Picoseconds sample_hop(const std::string& from, const std::string& to);
    LatencyRange residence_of(const std::string& node) const;
    double rate_ratio(const std::string& node) const;
    const VcpuSchedule* schedule_of(const std::string& node) const;

    ExperimentConfig m_cfg;
    const Topology& m_topo;
    const EventObserver& m_observer;
    Rng m_clock_rng;
    Rng m_net_rng;
    Rng m_probe_rng;

    std::priority_queue<Event, std::vector<Event>, EventOrder> m_queue;
    std::uint64_t m_seq = 0;

    std::map<std::string, PhysicalClock> m_clocks;
    std::map<std::string, Domain> m_domains;
    std::map<std::string, TreeNode> m_tree;
    std::map<std::string, VcpuSchedule> m_schedules;
    std::map<std::int64_t, PendingProbe> m_pending;
    std::string m_gm;

    RefTime m_pdelay_start;
    RefTime m_start;
    RefTime m_end;
    std::int64_t m_probes = 0;

    ExperimentResult m_result;
};

void Engine::push(RefTime t, EventKind kind, std::string node, EventPayload payload)
{
    m_queue.push(Event{t, kind, std::move(node), m_seq++, std::move(payload)});
}

Picoseconds Engine::synchronized(const std::string& node, Picoseconds local_time) const
{
    auto it = m_domains.find(m_topo.node(node).clock_domain());
    return it == m_domains.end() ? local_time : it->second.sync.read(local_time);
}

Picoseconds Engine::sample_hop(const std::string& from, const std::string& to)
{
    const auto* link = m_topo.find_link(from, to);
    if (!link) throw Error(ErrorKind::Path, "no link between '" + from + "' and '" + to + "'");
    const auto& l = link->direction(from);
    auto d = l.txts.sample(m_net_rng) + l.ma_c.sample(m_net_rng) + l.rxts.sample(m_net_rng);
    for (const auto* id : {&from, &to}) {
        const auto& n = m_topo.node(*id);
        if (n.hypervisor) d += sample_hv_latency(n.hypervisor->normalized(), m_net_rng);
    }
    return d;
}

LatencyRange Engine::residence_of(const std::string& node) const
{
    const auto& n = m_topo.node(node);
    return n.residence ? *n.residence : m_cfg.default_residence;
}

const VcpuSchedule* Engine::schedule_of(const std::string& node) const
{
    const auto& n = m_topo.node(node);
    if (!n.host) return nullptr;
    auto it = m_schedules.find(*n.host);
    return it == m_schedules.end() ? nullptr : &it->second;
}

double Engine::rate_ratio(const std::string& node) const
{
    switch (m_cfg.rate_mode) {
    case RateMode::None:
        return 1.0;
    case RateMode::Oracle: {
        // Ticks of a clock with rate r last r*g, so grandmaster/local = r_local / r_gm.
        const auto rn = static_cast<long double>(clock_of(node).drift().rates.front().rate.fixed());
        const auto rg = static_cast<long double>(clock_of(m_gm).drift().rates.front().rate.fixed());
        return static_cast<double>(rn / rg);
    }
    case RateMode::Estimated: {
        const auto& est = m_tree.at(node).estimator;
        if (est.size() < 2) return 1.0;
        try {
            return est.estimate();
        } catch (const Error&) {
            return 1.0;
        }
    }
    }
    return 1.0;
}

void Engine::setup()
{
    m_gm = m_topo.grandmaster().id;

    std::uniform_real_distribution<double> drift(-m_topo.r_max, m_topo.r_max);
    std::uniform_int_distribution<std::int64_t> epoch(0, m_cfg.epoch_spread.count());
    for (const auto& n : m_topo.nodes) {
        const auto& dom = n.clock_domain();
        if (m_clocks.count(dom)) continue;
        double rate = 1.0;
        RefTime ep{};
        if (m_cfg.drift == DriftKind::Uniform) {
            rate = 1.0 + drift(m_clock_rng);
            ep = RefTime{Picoseconds{epoch(m_clock_rng)}};
        }
        m_clocks.emplace(dom, PhysicalClock(dom, m_cfg.granularity, DriftModel::constant(rate, m_topo.r_max), ep));
    }

    m_pdelay_start = RefTime{m_cfg.epoch_spread + us(1)};
    m_start = m_pdelay_start + m_cfg.pdelay_interval * static_cast<std::int64_t>(m_cfg.pdelay_window);
    m_probes = m_cfg.probe_count();
    const RefTime probes_begin = m_start + m_cfg.warmup;
    m_end = probes_begin + m_cfg.probe_period * m_probes + m_cfg.sync_interval;

    for (const auto& [p, c] : m_topo.tree_edges(m_gm)) {
        m_tree[p].children.push_back(c);
        auto& child = m_tree[c];
        child.parent = p;
        child.port.emplace(c, p, m_cfg.pdelay_window);
        child.estimator = gptp::RateRatioEstimator(m_cfg.rate_window);
        auto& dom = m_domains[m_topo.node(c).clock_domain()];
        if (m_cfg.servo == ServoKind::PI && !dom.pi) {
            dom.pi.emplace(m_cfg.servo_kp, m_cfg.servo_ki, m_cfg.sync_interval);
        }
    }
    m_tree[m_gm];
    for (const auto& [id, node] : m_tree) {
        const auto kind = m_topo.node(id).kind;
        if (id != m_gm && (kind == NodeKind::Endpoint || kind == NodeKind::VirtualEndpoint)) {
            m_result.leaves.push_back(id);
        }
    }

    auto probe_time = [&](std::int64_t k) { return k <= 0 ? RefTime{} : probes_begin + m_cfg.probe_period * k; };
    std::uint64_t host_index = 0;
    for (const auto& [host, sched] : m_cfg.hosts) {
        auto policy = sched.policy;
        for (const auto& c : m_cfg.load_changes) {
            if (c.host == host) policy.load_profile[c.vm].push_back({probe_time(c.at_probe), c.busy_fraction});
        }
        for (auto& [vm, steps] : policy.load_profile) {
            std::stable_sort(steps.begin(), steps.end(), [](const LoadStep& a, const LoadStep& b) { return a.at < b.at; });
        }
        m_schedules.emplace(host, VcpuSchedule(std::move(policy), m_cfg.seed + 101 * ++host_index));
    }
    for (std::size_t i = 0; i < m_cfg.load_changes.size(); ++i) {
        const auto& c = m_cfg.load_changes[i];
        push(probe_time(c.at_probe), EventKind::LoadChange, c.host, LoadChangePayload{i});
        if (c.at_probe > 0 && (!m_result.load_change_probe || c.at_probe < *m_result.load_change_probe)) {
            m_result.load_change_probe = c.at_probe;
        }
    }

    std::size_t port = 0;
    for (const auto& [id, node] : m_tree) {
        if (node.port) push(m_pdelay_start, EventKind::MsgDepart, id, PdelayRequest{port});
        ++port;
    }
    push(m_start, EventKind::ResyncStart, m_gm);
    if (m_probes > 0) schedule_probe(0);
}

void Engine::schedule_probe(std::int64_t k)
{
    const auto window = std::min(m_cfg.sync_interval, m_cfg.probe_period);
    const Picoseconds phase{std::uniform_int_distribution<std::int64_t>(0, window.count() - 1)(m_probe_rng)};
    push(m_start + m_cfg.warmup + m_cfg.probe_period * k + phase, EventKind::ProbeBroadcast, m_topo.probe->source,
         ProbeArrival{k, {}});
}

ExperimentResult Engine::run()
{
    setup();
    while (!m_queue.empty()) {
        const Event e = m_queue.top();
        m_queue.pop();
        ++m_result.events;
        if (m_observer) m_observer(e);
        handle(e);
    }
    for (const auto& [id, node] : m_tree) m_result.unmatched_follow_ups += node.matcher.unmatched();
    return std::move(m_result);
}

void Engine::handle(const Event& e)
{
    switch (e.kind) {
    case EventKind::ResyncStart:
        on_resync(e);
        break;
    case EventKind::MsgArrive:
        if (auto* s = std::get_if<SyncArrival>(&e.payload)) on_sync_arrival(e, *s);
        else if (auto* f = std::get_if<FollowUpArrival>(&e.payload)) on_follow_up(e, *f, false);
        break;
    case EventKind::Resume:
        if (auto* f = std::get_if<FollowUpArrival>(&e.payload)) on_follow_up(e, *f, true);
        break;
    case EventKind::MsgDepart:
        if (auto* r = std::get_if<PdelayRequest>(&e.payload)) on_pdelay(e, *r);
        else if (auto* f = std::get_if<FollowUpArrival>(&e.payload)) {
            const auto& node = m_tree.at(e.node);
            for (const auto& c : node.children) {
                push(e.time + sample_hop(e.node, c), EventKind::MsgArrive, c,
                     FollowUpArrival{f->message, {e.node, c, e.time}});
            }
        }
        break;
    case EventKind::ProbeBroadcast:
        on_probe_broadcast(e);
        break;
    case EventKind::ProbeReceive:
        on_probe_receive(e, std::get<ProbeArrival>(e.payload));
        break;
    case EventKind::LoadChange:
    case EventKind::Preempt:
    case EventKind::ClockTickBatch:
        // Scheduler state is derived from the load profile; these events only mark time.
        break;
    }
}

void Engine::on_resync(const Event& e)
{
    const auto period = (e.time - m_start) / m_cfg.sync_interval;
    const auto origin = local(m_gm, e.time);
    const auto& gm = m_tree.at(m_gm);
    for (const auto& c : gm.children) {
        push(e.time + sample_hop(m_gm, c), EventKind::MsgArrive, c, SyncArrival{period, {m_gm, c, e.time}});
    }
    const auto fu = gptp::SyncMessage::follow_up(static_cast<std::uint64_t>(period), m_gm,
                                                 gptp::FollowUpPayload{origin, Picoseconds{0}, 1.0});
    push(e.time + m_cfg.followup_delay.sample(m_net_rng), EventKind::MsgDepart, m_gm, FollowUpArrival{fu, {}});
    const auto next = e.time + m_cfg.sync_interval;
    if (next < m_end) push(next, EventKind::ResyncStart, m_gm);
}

void Engine::on_sync_arrival(const Event& e, const SyncArrival& a)
{
    auto& node = m_tree.at(e.node);
    SyncRecord rec;
    rec.rx_time = e.time;
    rec.rx_local = local(e.node, e.time);
    node.matcher.record_sync(static_cast<std::uint64_t>(a.period), m_gm, rec.rx_local);
    if (!node.children.empty()) {
        rec.tx_time = e.time + residence_of(e.node).sample(m_net_rng);
        rec.tx_local = local(e.node, rec.tx_time);
        for (const auto& c : node.children) {
            push(rec.tx_time + sample_hop(e.node, c), EventKind::MsgArrive, c,
                 SyncArrival{a.period, {e.node, c, rec.tx_time}});
        }
    }
    node.syncs[a.period] = rec;
    while (node.syncs.size() > 8) node.syncs.erase(node.syncs.begin());
}

void Engine::on_follow_up(const Event& e, const FollowUpArrival& a, bool deferred)
{
    auto& node = m_tree.at(e.node);
    const auto period = static_cast<std::int64_t>(a.message.sequence);
    if (!deferred) {
        if (!node.matcher.match(a.message)) return;
        const auto& rec = node.syncs.at(period);
        if (!node.children.empty()) {
            const auto& fu = std::get<gptp::FollowUpPayload>(a.message.payload);
            const auto residence = gptp::residence_time(rec.rx_local, rec.tx_local, rate_ratio(e.node));
            gptp::FollowUpPayload out{fu.precise_origin,
                                      gptp::accumulate_correction(fu.correction_field,
                                                                  node.port->estimated_link_delay(), residence),
                                      rate_ratio(e.node)};
            const auto depart = std::max(e.time, rec.tx_time) + m_cfg.followup_delay.sample(m_net_rng);
            push(depart, EventKind::MsgDepart, e.node,
                 FollowUpArrival{gptp::SyncMessage::follow_up(a.message.sequence, m_gm, out), {}});
        }
        if (const auto* sched = schedule_of(e.node)) {
            const auto run_at = sched->next_running(e.node, e.time);
            if (run_at > e.time) {
                push(run_at, EventKind::Resume, e.node, a);
                return;
            }
        }
    }
    apply_correction(e.node, a.message, e.time);
}

void Engine::apply_correction(const std::string& id, const gptp::SyncMessage& msg, RefTime now)
{
    auto& node = m_tree.at(id);
    const auto period = static_cast<std::int64_t>(msg.sequence);
    auto it = node.syncs.find(period);
    if (it == node.syncs.end()) return;
    const auto& rec = it->second;
    const auto& fu = std::get<gptp::FollowUpPayload>(msg.payload);
    const auto link_delay = node.port->estimated_link_delay();

    node.estimator.add(fu.precise_origin + fu.correction_field + link_delay, rec.rx_local);
    auto& dom = m_domains.at(m_topo.node(id).clock_domain());
    // Without syntonization the clock free-runs between corrections, so its drift stays
    // within r_max and the estimated ratio only rescales residence times.
    if (m_cfg.servo == ServoKind::Step && m_cfg.syntonize) {
        const double r = rate_ratio(id);
        if (r != dom.sync.rate()) dom.sync.set_rate(rec.rx_local, r);
    }

    // Ground truth: synchronized reading minus grandmaster time at the Sync reception.
    const auto actual = dom.sync.read(rec.rx_local) - local(m_gm, rec.rx_time);
    const auto [rx, origin] = dom.sync.rebase(rec.rx_local, fu.precise_origin);
    auto d = gptp::correction_term(rx, {origin, fu.correction_field, fu.rate_ratio}, link_delay, dom.sync.rate(),
                                   actual);
    if (m_cfg.fault && m_cfg.fault->node == id && period >= m_cfg.fault->period &&
        period < m_cfg.fault->period + m_cfg.fault->periods) {
        d.correction_term += m_cfg.fault->extra;
        d.reading_delay += m_cfg.fault->extra;
    }

    if (dom.pi) dom.pi->update(dom.sync, local(id, now), d.correction_term);
    else dom.sync.apply_correction(d.correction_term);

    m_result.corrections.push_back({period, id, now, d, dom.sync.rate()});
}

void Engine::on_pdelay(const Event& e, const PdelayRequest& r)
{
    auto& node = m_tree.at(e.node);
    gptp::pdelay_estimate(*m_topo.find_link(node.port->node(), node.port->neighbor()), *node.port, m_net_rng,
                          m_cfg.pdelay_turnaround);
    const auto next = e.time + m_cfg.pdelay_interval;
    if (next < m_end) push(next, EventKind::MsgDepart, e.node, r);
}

void Engine::on_probe_broadcast(const Event& e)
{
    const auto k = std::get<ProbeArrival>(e.payload).probe;
    const auto& spec = *m_topo.probe;

    // One multicast frame: every hop of the delivery tree is traversed once, and a
    // forwarding node replicates after a single store-and-forward delay.
    std::map<std::string, RefTime> arrival{{spec.source, e.time}};
    std::map<std::string, RefTime> forwarding;  // replication time at each sending node
    std::map<std::string, RefTime> departure;   // keyed by receiving node
    PendingProbe pending;
    pending.sample.index = k;
    pending.sample.period = (e.time - m_start) / m_cfg.sync_interval;
    pending.sample.time = e.time;
    pending.expected = spec.targets.size();
    for (const auto& target : spec.targets) {
        Transit last{spec.source, target, e.time};
        for (const auto& hop : m_topo.shortest_path(spec.source, target)) {
            if (!arrival.count(hop.to)) {
                auto [fw, fresh] = forwarding.try_emplace(hop.from, arrival.at(hop.from));
                if (fresh && hop.from != spec.source) fw->second += residence_of(hop.from).sample(m_net_rng);
                departure[hop.to] = fw->second;
                arrival[hop.to] = fw->second + sample_hop(hop.from, hop.to);
            }
            last = {hop.from, hop.to, departure.at(hop.to)};
        }
        push(arrival.at(target), EventKind::ProbeReceive, target, ProbeArrival{k, last});
    }
    m_pending.emplace(k, std::move(pending));
    if (k + 1 < m_probes) schedule_probe(k + 1);
}

void Engine::on_probe_receive(const Event& e, const ProbeArrival& a)
{
    auto& pending = m_pending.at(a.probe);
    const auto& n = m_topo.node(e.node);
    const auto& clock = clock_of(e.node);
    ProbeReading reading{e.node, synchronized(e.node, clock.local_time(e.time)), Picoseconds{0}};
    reading.sw = reading.hw;
    if (n.sw_timestamp) {
        const auto* sched = schedule_of(e.node);
        const double load = sched ? sched->policy().interference(e.node, e.time) : 0.0;
        RefTime sw_time = e.time + sample_under_load(*n.sw_timestamp, m_net_rng, load);
        if (sched) sw_time = sched->next_running(e.node, sw_time);
        reading.sw = synchronized(e.node, clock.local_time(sw_time));
    }
    (void)gamma_virt(reading.hw, reading.sw);
    pending.sample.readings.push_back(reading);
    if (pending.sample.readings.size() < pending.expected) return;

    auto sample = std::move(pending.sample);
    m_pending.erase(a.probe);
    auto p = measure_precision(sample.readings);
    if (!p) {
        ++m_result.skipped_samples;
        std::cerr << "warning: probe " << sample.index << " reached fewer than two nodes; skipped\n";
        return;
    }
    sample.precision = *p;
    for (const auto& r : sample.readings) {
        if (r.node == p->node_a) sample.gamma_virt_a = r.sw - r.hw;
        if (r.node == p->node_b) sample.gamma_virt_b = r.sw - r.hw;
    }
    m_result.samples.push_back(std::move(sample));
}

}  // namespace

ExperimentResult run_experiment(ExperimentConfig config, const EventObserver& observer)
{
    config.validate();
    const auto report = build_bound_report(config.topology, Scope::Grandmaster, config.provenance,
                                           config.sync_interval);
    Engine engine(config, observer);
    auto result = engine.run();

    result.name = config.name;
    result.provenance = config.provenance;
    result.seed = config.seed;
    result.precision = report.precision;
    result.reading_error = report.reading_error;
    result.drift_offset = report.drift_offset;
    result.measurement_error = report.measurement_error;

    std::vector<Picoseconds> raw;
    std::vector<Picoseconds> adjusted;
    for (const auto& s : result.samples) {
        raw.push_back(s.precision.raw);
        adjusted.push_back(s.precision.adjusted);
        if (s.precision.raw > result.precision + result.measurement_error) ++result.raw_violations;
        if (s.precision.adjusted > result.precision) ++result.adjusted_violations;
    }
    result.raw = summarize(raw);
    result.adjusted = summarize(adjusted);
    return result;
}

}  // namespace vtsync
