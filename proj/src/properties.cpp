#include "vtsync/properties.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "vtsync/error.hpp"
#include "vtsync/hypervisor.hpp"
#include "vtsync/timebase.hpp"
#include "vtsync/virtual_clock.hpp"

namespace vtsync {

namespace {

template <class T>
T uniform(Rng& rng, T lo, T hi)
{
    return std::uniform_int_distribution<T>(lo, hi)(rng);
}

std::string describe(const PreemptionSet& set, Microtick start)
{
    std::ostringstream out;
    out << "start=" << start << " preemptions=[";
    for (const auto& r : set.records()) out << " (" << r.preempt << "," << r.resume << ")";
    out << " ]";
    return out.str();
}

}  // namespace

PropertyReport check_virtual_clock_properties(std::uint64_t seed, std::size_t iterations, bool assert_cvc_good)
{
    PropertyReport report{"virtual clock condition", 0, 0, {}};
    Rng rng(seed);
    auto fail = [&](const std::string& what) {
        if (report.failures++ == 0) report.counterexample = what;
    };

    for (std::size_t i = 0; i < iterations; ++i) {
        ++report.cases;
        const double r_max = 1e-4;
        const Picoseconds g{uniform<std::int64_t>(rng, 1, 1000)};
        const double rate = 1.0 + std::uniform_real_distribution<double>(-0.9 * r_max, 0.9 * r_max)(rng);
        const PhysicalClock host("host", g, DriftModel::constant(rate, r_max),
                                 RefTime{Picoseconds{uniform<std::int64_t>(rng, 0, 10'000)}});
        const Microtick start = uniform<Microtick>(rng, 0, 20);
        const Microtick span = uniform<Microtick>(rng, 20, 200);
        const Microtick last = start + span;
        const auto trace = make_trace(host, 0, last);

        PreemptionSet preemptions;
        const int count = uniform(rng, 0, 4);
        Microtick cursor = start + 1;
        for (int k = 0; k < count && cursor + 2 < last; ++k) {
            const Microtick a = uniform<Microtick>(rng, cursor, std::min(cursor + span / 4, last - 2));
            const Microtick b = uniform<Microtick>(rng, a + 1, std::min(a + span / 4, last));
            preemptions.append(a, b);
            cursor = b;
        }
        const auto where = describe(preemptions, start) + " g=" + std::to_string(g.count());

        const VirtualClock dvc("host", VirtualClockKind::Discontinuous, start, preemptions);
        const VirtualClock cvc("host", VirtualClockKind::Continuous, start, preemptions);
        try {
            const auto dv = virtual_clock_condition(dvc, trace, g, r_max);
            if (!dv.good) fail("DVC rejected: " + where);

            const auto cv = virtual_clock_condition(cvc, trace, g, r_max);
            if (preemptions.empty()) {
                for (Microtick l = start; l <= last; ++l) {
                    if (cvc.virtual_microtick(l).value != dvc.virtual_microtick(l).value) {
                        fail("CVC without preemptions differs from DVC at l=" + std::to_string(l) + ": " + where);
                        break;
                    }
                }
                if (!cv.good) fail("CVC without preemptions rejected: " + where);
            } else {
                const auto& v = cv.succession.violations;
                const auto& recs = preemptions.records();
                bool exact = !cv.succession.holds && v.size() == recs.size();
                for (std::size_t k = 0; exact && k < v.size(); ++k) {
                    exact = v[k].at + 1 == recs[k].resume && v[k].step == 1 - recs[k].duration();
                }
                if (!exact) fail("CVC succession deficit is not 1 - p at every resume: " + where);
                if (assert_cvc_good && !cv.good) {
                    fail("CVC asserted good but succession fails at l=" + std::to_string(v.front().at) +
                         " (step " + std::to_string(v.front().step) + "): " + where);
                }
            }
        } catch (const Error& e) {
            fail(std::string(e.what()) + ": " + where);
        }
    }
    return report;
}

Topology random_topology(std::uint64_t seed, std::size_t max_nodes)
{
    Rng rng(seed);
    Topology t;
    t.name = "random-" + std::to_string(seed);
    const auto n = static_cast<std::size_t>(uniform<int>(rng, 2, static_cast<int>(std::max<std::size_t>(2, max_nodes))));
    auto range = [&](std::int64_t hi) {
        const auto a = uniform<std::int64_t>(rng, 0, hi);
        const auto b = uniform<std::int64_t>(rng, 0, hi);
        return LatencyRange::between(Picoseconds{std::min(a, b)}, Picoseconds{std::max(a, b)});
    };
    for (std::size_t i = 0; i < n; ++i) {
        Node node;
        node.id = "n" + std::to_string(i);
        switch (uniform(rng, 0, 3)) {
        case 0: node.kind = NodeKind::Switch; break;
        case 1:
            node.kind = NodeKind::VirtualEndpoint;
            node.host = "h" + std::to_string(i);
            break;
        default: node.kind = NodeKind::Endpoint; break;
        }
        if (uniform(rng, 0, 2) == 0) {
            HypervisorConfig hv;
            hv.timestamping = uniform(rng, 0, 1) ? Timestamping::SoftwareInVm : Timestamping::HardwarePassthrough;
            hv.vme = LatencyRange::between(Picoseconds{0}, Picoseconds{uniform<std::int64_t>(rng, 0, 3000)});
            hv.sched = LatencyRange::between(Picoseconds{0}, Picoseconds{uniform<std::int64_t>(rng, 0, 3000)});
            hv.vn = range(3000);
            node.hypervisor = hv;
        }
        t.nodes.push_back(std::move(node));
    }
    std::set<std::pair<std::size_t, std::size_t>> used;
    auto add_link = [&](std::size_t a, std::size_t b) {
        if (a == b || !used.insert(std::minmax(a, b)).second) return;
        Link l;
        l.a = t.nodes[a].id;
        l.b = t.nodes[b].id;
        l.forward = {range(2000), range(3000), range(1000)};
        if (uniform(rng, 0, 2) == 0) l.reverse = LinkLatencies{range(2000), range(3000), range(1000)};
        t.links.push_back(std::move(l));
    };
    for (std::size_t i = 1; i < n; ++i) add_link(i, static_cast<std::size_t>(uniform<std::size_t>(rng, 0, i - 1)));
    const int extra = uniform(rng, 0, 3);
    for (int k = 0; k < extra; ++k) {
        add_link(uniform<std::size_t>(rng, 0, n - 1), uniform<std::size_t>(rng, 0, n - 1));
    }
    return t;
}

namespace {

struct OracleBounds
{
    std::int64_t lo = 0;
    std::int64_t hi = 0;
};

// Independent recomputation from the raw latency fields.
OracleBounds oracle_hop(const Topology& t, const std::string& from, const std::string& to)
{
    const Link* link = nullptr;
    for (const auto& l : t.links) {
        if ((l.a == from && l.b == to) || (l.a == to && l.b == from)) link = &l;
    }
    const LinkLatencies& c = (link->b == from && link->reverse) ? *link->reverse : link->forward;
    OracleBounds b{c.txts.min.count() + c.ma_c.min.count() + c.rxts.min.count(),
                   c.txts.max.count() + c.ma_c.max.count() + c.rxts.max.count()};
    for (const auto* id : {&from, &to}) {
        for (const auto& n : t.nodes) {
            if (n.id != *id || !n.hypervisor || n.hypervisor->timestamping == Timestamping::HardwarePassthrough) {
                continue;
            }
            b.lo += n.hypervisor->vn.min.count();
            b.hi += n.hypervisor->vme.max.count() + n.hypervisor->sched.max.count() + n.hypervisor->vn.max.count();
        }
    }
    return b;
}

std::map<std::vector<std::string>, OracleBounds> oracle_paths(const Topology& t)
{
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& l : t.links) {
        adj[l.a].insert(l.b);
        adj[l.b].insert(l.a);
    }
    std::map<std::vector<std::string>, OracleBounds> out;
    std::vector<std::vector<std::string>> level;
    for (const auto& n : t.nodes) level.push_back({n.id});
    while (!level.empty()) {
        std::vector<std::vector<std::string>> next;
        for (const auto& p : level) {
            for (const auto& nb : adj[p.back()]) {
                if (std::find(p.begin(), p.end(), nb) != p.end()) continue;
                auto q = p;
                q.push_back(nb);
                OracleBounds sum;
                for (std::size_t i = 1; i < q.size(); ++i) {
                    const auto h = oracle_hop(t, q[i - 1], q[i]);
                    sum.lo += h.lo;
                    sum.hi += h.hi;
                }
                out[q] = sum;
                next.push_back(std::move(q));
            }
        }
        level = std::move(next);
    }
    return out;
}

}  // namespace

PropertyReport check_path_oracle(std::uint64_t seed, std::size_t iterations)
{
    PropertyReport report{"path bound oracle", 0, 0, {}};
    Rng seeds(seed);
    for (std::size_t i = 0; i < iterations; ++i) {
        ++report.cases;
        const auto case_seed = seeds();
        const auto t = random_topology(case_seed);
        std::string problem;
        try {
            const auto expected = oracle_paths(t);
            std::map<std::vector<std::string>, DelayBounds> actual;
            for (const auto& p : enumerate_paths(t, std::nullopt)) {
                std::vector<std::string> nodes{p.front().from};
                for (const auto& h : p) nodes.push_back(h.to);
                actual[nodes] = path_delay_bounds(t, p);
            }
            if (actual.size() != expected.size()) {
                problem = "path count " + std::to_string(actual.size()) + " vs oracle " +
                          std::to_string(expected.size());
            }
            std::int64_t lo = 0, hi = 0;
            bool first = true;
            for (const auto& [nodes, b] : expected) {
                lo = first ? b.lo : std::min(lo, b.lo);
                hi = first ? b.hi : std::max(hi, b.hi);
                first = false;
                auto it = actual.find(nodes);
                if (problem.empty() && (it == actual.end() || it->second.d_min.count() != b.lo ||
                                        it->second.d_max.count() != b.hi)) {
                    problem = "bounds differ on a path starting at " + nodes.front();
                }
            }
            const auto e = reading_error(t, Scope::AllPairs);
            if (problem.empty() && e.value.count() != hi - lo) {
                problem = "reading error " + std::to_string(e.value.count()) + " vs oracle " + std::to_string(hi - lo);
            }
        } catch (const Error& e) {
            problem = e.what();
        }
        if (!problem.empty() && report.failures++ == 0) {
            report.counterexample = "topology seed " + std::to_string(case_seed) + ": " + problem;
        }
    }
    return report;
}

}  // namespace vtsync
