#include "vtsync/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "vtsync/error.hpp"
#include "vtsync/simulator.hpp"

namespace vtsync {

Picoseconds drift_offset(double r_max, Picoseconds sync_interval)
{
    if (r_max < 0.0) throw Error(ErrorKind::Configuration, "r_max must be non-negative");
    if (sync_interval.count() <= 0) throw Error(ErrorKind::Configuration, "sync interval must be positive");
    const long double gamma = 2.0L * static_cast<long double>(r_max) * static_cast<long double>(sync_interval.count());
    return Picoseconds{std::llround(static_cast<double>(gamma))};
}

Picoseconds precision_bound(Picoseconds drift_offset, Picoseconds reading_error)
{
    if (drift_offset.count() < 0 || reading_error.count() < 0) {
        throw Error(ErrorKind::Configuration, "precision bound inputs must be non-negative");
    }
    return drift_offset + reading_error;
}

MeasurementError measurement_error(const Topology& topology, const std::string& source,
                                   const std::vector<std::string>& targets)
{
    if (targets.empty()) throw Error(ErrorKind::EmptyScope, "measurement error needs at least one target");
    MeasurementError out;
    Picoseconds lo{0};
    Picoseconds hi{0};
    for (const auto& t : targets) {
        auto path = topology.shortest_path(source, t);
        const auto b = path_delay_bounds(topology, path);
        lo = out.paths.empty() ? b.d_min : std::min(lo, b.d_min);
        hi = out.paths.empty() ? b.d_max : std::max(hi, b.d_max);
        out.paths.emplace_back(std::move(path), b);
    }
    out.value = hi - lo;
    return out;
}

double estimate_drift_rate(Picoseconds offset, Picoseconds elapsed)
{
    if (elapsed.count() <= 0) throw Error(ErrorKind::Configuration, "elapsed time must be positive");
    return static_cast<double>(offset.count()) / (2.0 * static_cast<double>(elapsed.count()));
}

std::string provenance_id(const std::string& canonical_text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

BoundReport build_bound_report(const Topology& topology, Scope scope, const std::string& provenance,
                               std::optional<Picoseconds> sync_interval)
{
    topology.validate();
    BoundReport r;
    r.topology = topology.name;
    r.provenance = provenance;
    r.scope = scope;
    r.r_max = topology.r_max;
    r.sync_interval = sync_interval.value_or(topology.sync_interval);

    for (const auto& p : scope_paths(topology, scope)) {
        r.paths.push_back({p.front().from, p.back().to, to_string(p), path_delay_bounds(topology, p)});
    }
    r.reading_error = reading_error(topology, scope).value;
    r.drift_offset = drift_offset(r.r_max, r.sync_interval);
    r.precision = precision_bound(r.drift_offset, r.reading_error);

    if (topology.probe) {
        const auto m = measurement_error(topology, topology.probe->source, topology.probe->targets);
        r.measurement_error = m.value;
        for (const auto& [p, b] : m.paths) r.probe_paths.push_back({p.front().from, p.back().to, to_string(p), b});
    }

    for (const auto& l : topology.links) {
        r.links.push_back({l.a, l.b, hop_delay_bounds(topology, {l.a, l.b}), l.assumed});
        r.links.push_back({l.b, l.a, hop_delay_bounds(topology, {l.b, l.a}), l.assumed});
    }

    r.assumptions = topology.assumptions;
    for (const auto& l : topology.links) {
        if (l.assumed) {
            r.assumptions.push_back("link " + l.a + "-" + l.b + " latencies assumed" +
                                    (l.note.empty() ? std::string() : ": " + l.note));
        }
    }
    return r;
}

std::string render_report(const BoundReport& r)
{
    std::ostringstream out;
    auto bounds = [](const DelayBounds& b) {
        return "(" + format_ns(b.d_min) + ", " + format_ns(b.d_max) + ")";
    };
    out << "topology    " << r.topology << "  [" << r.provenance << "]\n";
    out << "scope       " << to_string(r.scope) << "\n";
    char rbuf[32];
    std::snprintf(rbuf, sizeof rbuf, "%.6g", r.r_max);
    out << "r_max       " << rbuf << "\n";
    out << "S           " << format_ns(r.sync_interval) << "\n\n";

    out << "links\n";
    for (const auto& l : r.links) {
        out << "  " << l.from << " -> " << l.to << "  " << bounds(l.bounds) << (l.assumed ? "  (assumed)" : "")
            << "\n";
    }
    out << "\nsync paths\n";
    for (const auto& p : r.paths) out << "  " << p.hops << "  " << bounds(p.bounds) << "\n";
    if (!r.probe_paths.empty()) {
        out << "\nprobe paths\n";
        for (const auto& p : r.probe_paths) out << "  " << p.hops << "  " << bounds(p.bounds) << "\n";
    }
    out << "\nreading error      " << format_ns(r.reading_error) << "\n";
    out << "drift offset       " << format_ns(r.drift_offset) << "\n";
    out << "precision bound    " << format_ns(r.precision) << "\n";
    out << "measurement error  " << format_ns(r.measurement_error) << "\n";
    out << "precision + gamma  " << format_ns(r.precision + r.measurement_error) << "\n";
    if (!r.assumptions.empty()) {
        out << "\nassumptions\n";
        for (const auto& a : r.assumptions) out << "  * " << a << "\n";
    }
    return out.str();
}

Verdict verify_experiment(const ExperimentResult& result, const BoundReport& report)
{
    if (result.provenance != report.provenance) {
        throw Error(ErrorKind::Provenance, "result of topology " + result.provenance +
                                               " checked against report of " + report.provenance);
    }
    Verdict v;
    std::set<std::int64_t> periods;
    const auto raw_limit = report.precision + report.measurement_error;
    for (std::size_t i = 0; i < result.samples.size(); ++i) {
        const auto& s = result.samples[i];
        const bool raw_bad = s.precision.raw > raw_limit;
        const bool adj_bad = s.precision.adjusted > report.precision;
        if (raw_bad) v.raw_violations.push_back(i);
        if (adj_bad) v.adjusted_violations.push_back(i);
        if (raw_bad || adj_bad) periods.insert(s.period);
    }
    v.flagged_periods.assign(periods.begin(), periods.end());
    v.pass = v.raw_violations.empty() && v.adjusted_violations.empty();
    return v;
}

}  // namespace vtsync
