#include "vtsync/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "vtsync/error.hpp"

namespace vtsync {

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what)
{
    throw Error(ErrorKind::Schema, (path.empty() ? "/" : path) + ": " + what);
}

void expect_object(const Json& j, const std::string& path, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) schema_error(path, "expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
        if (!keys.count(k)) schema_error(path + "/" + k, "unknown field");
    }
}

const Json& require(const Json& j, const char* key, const std::string& path)
{
    auto it = j.find(key);
    if (it == j.end()) schema_error(path + "/" + key, "missing required field");
    return *it;
}

std::string get_string(const Json& j, const char* key, const std::string& path)
{
    const auto& v = require(j, key, path);
    if (!v.is_string()) schema_error(path + "/" + key, "expected a string");
    return v.get<std::string>();
}

std::int64_t as_int(const Json& v, const std::string& path)
{
    if (!v.is_number_integer()) schema_error(path, "expected an integer");
    return v.get<std::int64_t>();
}

double as_double(const Json& v, const std::string& path)
{
    if (!v.is_number()) schema_error(path, "expected a number");
    return v.get<double>();
}

Picoseconds scaled(std::int64_t value, const Json& j, const std::string& path)
{
    const auto& unit = require(j, "unit", path);
    if (!unit.is_string()) schema_error(path + "/unit", "expected a string");
    try {
        return to_picoseconds(value, unit.get<std::string>());
    } catch (const Error& e) {
        schema_error(path + "/unit", e.what());
    }
}

Picoseconds duration(const Json& j, const std::string& path)
{
    expect_object(j, path, {"value", "unit"});
    return scaled(as_int(require(j, "value", path), path + "/value"), j, path);
}

LatencyRange range(const Json& j, const std::string& path)
{
    expect_object(j, path, {"min", "max", "unit", "distribution"});
    LatencyRange r;
    r.min = scaled(as_int(require(j, "min", path), path + "/min"), j, path);
    r.max = scaled(as_int(require(j, "max", path), path + "/max"), j, path);
    if (auto it = j.find("distribution"); it != j.end()) {
        const auto d = it->is_string() ? it->get<std::string>() : std::string();
        if (d == "uniform") r.distribution = LatencyDistribution::Uniform;
        else if (d == "constant") r.distribution = LatencyDistribution::Constant;
        else if (d == "two-point") r.distribution = LatencyDistribution::TwoPoint;
        else schema_error(path + "/distribution", "expected uniform, constant or two-point");
    }
    try {
        r.validate(path);
    } catch (const Error& e) {
        schema_error(path, e.what());
    }
    return r;
}

HypervisorConfig hypervisor(const Json& j, const std::string& path)
{
    expect_object(j, path, {"vme", "sched", "vn", "timestamping"});
    HypervisorConfig h;
    const auto ts = get_string(j, "timestamping", path);
    if (ts == "hardware-passthrough") h.timestamping = Timestamping::HardwarePassthrough;
    else if (ts == "software") h.timestamping = Timestamping::SoftwareInVm;
    else schema_error(path + "/timestamping", "expected hardware-passthrough or software");
    const bool required = h.timestamping == Timestamping::SoftwareInVm;
    auto part = [&](const char* key, LatencyRange& out) {
        if (j.contains(key)) out = range(j.at(key), path + "/" + key);
        else if (required) schema_error(path + "/" + key, "missing required field");
    };
    part("vme", h.vme);
    part("sched", h.sched);
    part("vn", h.vn);
    try {
        (void)h.normalized();
    } catch (const Error& e) {
        schema_error(path, e.what());
    }
    return h;
}

// Medium access and cable latency may be given merged as "ma_c" or split as "ma" and "c".
LinkLatencies latencies(const Json& j, const std::string& path)
{
    LinkLatencies l{range(require(j, "txts", path), path + "/txts"), range(require(j, "rxts", path), path + "/rxts"),
                    {}};
    const bool split = j.contains("ma") || j.contains("c");
    if (split && j.contains("ma_c")) schema_error(path + "/ma_c", "give either ma_c or ma and c, not both");
    if (!split) {
        l.ma_c = range(require(j, "ma_c", path), path + "/ma_c");
        return l;
    }
    const auto ma = range(require(j, "ma", path), path + "/ma");
    const auto c = range(require(j, "c", path), path + "/c");
    l.ma_c = LatencyRange::between(ma.min + c.min, ma.max + c.max);
    return l;
}

Json duration_json(Picoseconds d) { return Json{{"value", d.count()}, {"unit", "ps"}}; }

}  // namespace

LoadedTopology parse_topology(const Json& doc)
{
    expect_object(doc, "", {"name", "r_max", "sync_interval", "assumptions", "nodes", "links", "sync_tree", "probe"});
    Topology t;
    t.name = get_string(doc, "name", "");
    t.r_max = as_double(require(doc, "r_max", ""), "/r_max");
    if (t.r_max < 0.0) schema_error("/r_max", "must be non-negative");
    t.sync_interval = duration(require(doc, "sync_interval", ""), "/sync_interval");
    if (auto it = doc.find("assumptions"); it != doc.end()) {
        if (!it->is_array()) schema_error("/assumptions", "expected an array of strings");
        for (std::size_t i = 0; i < it->size(); ++i) {
            if (!(*it)[i].is_string()) schema_error("/assumptions/" + std::to_string(i), "expected a string");
            t.assumptions.push_back((*it)[i].get<std::string>());
        }
    }

    const auto& nodes = require(doc, "nodes", "");
    if (!nodes.is_array()) schema_error("/nodes", "expected an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto path = "/nodes/" + std::to_string(i);
        const auto& n = nodes[i];
        expect_object(n, path, {"id", "kind", "host", "hypervisor", "sw_timestamp", "residence"});
        Node node;
        node.id = get_string(n, "id", path);
        try {
            node.kind = node_kind_from_string(get_string(n, "kind", path));
        } catch (const Error& e) {
            schema_error(path + "/kind", e.what());
        }
        if (n.contains("host")) node.host = get_string(n, "host", path);
        if (n.contains("hypervisor")) node.hypervisor = hypervisor(n.at("hypervisor"), path + "/hypervisor");
        if (n.contains("sw_timestamp")) node.sw_timestamp = range(n.at("sw_timestamp"), path + "/sw_timestamp");
        if (n.contains("residence")) node.residence = range(n.at("residence"), path + "/residence");
        t.nodes.push_back(std::move(node));
    }

    const auto& links = require(doc, "links", "");
    if (!links.is_array()) schema_error("/links", "expected an array");
    for (std::size_t i = 0; i < links.size(); ++i) {
        const auto path = "/links/" + std::to_string(i);
        const auto& l = links[i];
        expect_object(l, path, {"a", "b", "txts", "rxts", "ma_c", "ma", "c", "reverse", "assumed", "note"});
        Link link;
        link.a = get_string(l, "a", path);
        link.b = get_string(l, "b", path);
        link.forward = latencies(l, path);
        if (l.contains("reverse")) {
            expect_object(l.at("reverse"), path + "/reverse", {"txts", "rxts", "ma_c", "ma", "c"});
            link.reverse = latencies(l.at("reverse"), path + "/reverse");
        }
        if (l.contains("assumed")) {
            if (!l.at("assumed").is_boolean()) schema_error(path + "/assumed", "expected a boolean");
            link.assumed = l.at("assumed").get<bool>();
        }
        if (l.contains("note")) link.note = get_string(l, "note", path);
        t.links.push_back(std::move(link));
    }

    if (auto it = doc.find("sync_tree"); it != doc.end()) {
        expect_object(*it, "/sync_tree", {"root", "edges"});
        SyncTree tree;
        tree.root = get_string(*it, "root", "/sync_tree");
        const auto& edges = require(*it, "edges", "/sync_tree");
        if (!edges.is_array()) schema_error("/sync_tree/edges", "expected an array");
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const auto& e = edges[i];
            if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
                schema_error("/sync_tree/edges/" + std::to_string(i), "expected [parent, child]");
            }
            tree.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        }
        t.sync_tree = std::move(tree);
    }
    if (auto it = doc.find("probe"); it != doc.end()) {
        expect_object(*it, "/probe", {"source", "targets"});
        ProbeSpec probe;
        probe.source = get_string(*it, "source", "/probe");
        const auto& targets = require(*it, "targets", "/probe");
        if (!targets.is_array()) schema_error("/probe/targets", "expected an array");
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (!targets[i].is_string()) schema_error("/probe/targets/" + std::to_string(i), "expected a string");
            probe.targets.push_back(targets[i].get<std::string>());
        }
        t.probe = std::move(probe);
    }

    t.validate();
    return {std::move(t), provenance_id(doc.dump())};
}

Json read_json_file(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + file.string() + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::Schema, file.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& file, const std::string& text)
{
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + file.string() + "'");
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write to '" + file.string() + "' failed");
}

LoadedTopology load_topology(const std::filesystem::path& file)
{
    return parse_topology(read_json_file(file));
}

ExperimentConfig parse_experiment(const Json& doc, const std::filesystem::path& base_dir)
{
    expect_object(doc, "", {"name", "scenario", "topology", "sync_interval", "probe_period", "duration", "warmup",
                            "seed", "clock", "servo", "rate_ratio", "rate_window", "pdelay", "followup_delay",
                            "default_residence", "hosts", "sw_timestamp", "load_changes", "fault"});
    ExperimentConfig c;
    c.name = get_string(doc, "name", "");
    c.scenario = get_string(doc, "scenario", "");
    static const std::set<std::string> scenarios{"native-hwts", "consolidating-hwts", "partitioned-hwts", "custom"};
    if (!scenarios.count(c.scenario)) {
        schema_error("/scenario", "expected native-hwts, consolidating-hwts, partitioned-hwts or custom");
    }

    const auto& topo = require(doc, "topology", "");
    LoadedTopology loaded;
    if (topo.is_string()) loaded = load_topology(base_dir / topo.get<std::string>());
    else if (topo.is_object()) loaded = parse_topology(topo);
    else schema_error("/topology", "expected a file name or an inline topology");
    c.topology = std::move(loaded.topology);
    c.provenance = loaded.provenance;

    if (doc.contains("sync_interval")) c.sync_interval = duration(doc.at("sync_interval"), "/sync_interval");
    c.probe_period = duration(require(doc, "probe_period", ""), "/probe_period");
    c.duration = duration(require(doc, "duration", ""), "/duration");
    if (doc.contains("warmup")) c.warmup = duration(doc.at("warmup"), "/warmup");
    const auto seed = as_int(require(doc, "seed", ""), "/seed");
    if (seed < 0) schema_error("/seed", "must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);

    if (auto it = doc.find("clock"); it != doc.end()) {
        expect_object(*it, "/clock", {"granularity", "epoch_spread", "drift"});
        if (it->contains("granularity")) c.granularity = duration(it->at("granularity"), "/clock/granularity");
        if (it->contains("epoch_spread")) c.epoch_spread = duration(it->at("epoch_spread"), "/clock/epoch_spread");
        if (it->contains("drift")) {
            const auto d = get_string(*it, "drift", "/clock");
            if (d == "uniform") c.drift = DriftKind::Uniform;
            else if (d == "identical") c.drift = DriftKind::Identical;
            else schema_error("/clock/drift", "expected uniform or identical");
        }
    }
    if (auto it = doc.find("servo"); it != doc.end()) {
        expect_object(*it, "/servo", {"kind", "kp", "ki", "syntonize"});
        try {
            c.servo = servo_kind_from_string(get_string(*it, "kind", "/servo"));
        } catch (const Error& e) {
            schema_error("/servo/kind", e.what());
        }
        if (it->contains("kp")) c.servo_kp = as_double(it->at("kp"), "/servo/kp");
        if (it->contains("ki")) c.servo_ki = as_double(it->at("ki"), "/servo/ki");
        if (it->contains("syntonize")) {
            if (!it->at("syntonize").is_boolean()) schema_error("/servo/syntonize", "expected a boolean");
            c.syntonize = it->at("syntonize").get<bool>();
        }
    }
    if (doc.contains("rate_ratio")) {
        try {
            c.rate_mode = rate_mode_from_string(get_string(doc, "rate_ratio", ""));
        } catch (const Error& e) {
            schema_error("/rate_ratio", e.what());
        }
    }
    if (doc.contains("rate_window")) {
        const auto w = as_int(doc.at("rate_window"), "/rate_window");
        if (w < 2) schema_error("/rate_window", "must be at least 2");
        c.rate_window = static_cast<std::size_t>(w);
    }
    if (auto it = doc.find("pdelay"); it != doc.end()) {
        expect_object(*it, "/pdelay", {"interval", "window", "turnaround"});
        if (it->contains("interval")) c.pdelay_interval = duration(it->at("interval"), "/pdelay/interval");
        if (it->contains("window")) {
            const auto w = as_int(it->at("window"), "/pdelay/window");
            if (w < 1) schema_error("/pdelay/window", "must be at least 1");
            c.pdelay_window = static_cast<std::size_t>(w);
        }
        if (it->contains("turnaround")) c.pdelay_turnaround = range(it->at("turnaround"), "/pdelay/turnaround");
    }
    if (doc.contains("followup_delay")) c.followup_delay = range(doc.at("followup_delay"), "/followup_delay");
    if (doc.contains("default_residence")) {
        c.default_residence = range(doc.at("default_residence"), "/default_residence");
    }

    if (auto it = doc.find("hosts"); it != doc.end()) {
        if (!it->is_object()) schema_error("/hosts", "expected an object keyed by host");
        for (const auto& [host, h] : it->items()) {
            const auto path = "/hosts/" + host;
            expect_object(h, path, {"policy", "quantum", "phase_jitter", "vcpus"});
            HostSchedule s;
            const auto policy = get_string(h, "policy", path);
            if (policy == "pinned") s.policy.kind = SchedulerPolicy::Kind::Pinned;
            else if (policy == "round-robin") s.policy.kind = SchedulerPolicy::Kind::QuantumRoundRobin;
            else schema_error(path + "/policy", "expected pinned or round-robin");
            if (h.contains("quantum")) s.policy.quantum = duration(h.at("quantum"), path + "/quantum");
            if (h.contains("phase_jitter")) {
                s.policy.phase_jitter = duration(h.at("phase_jitter"), path + "/phase_jitter");
            }
            const auto& vcpus = require(h, "vcpus", path);
            if (!vcpus.is_array()) schema_error(path + "/vcpus", "expected an array");
            for (std::size_t i = 0; i < vcpus.size(); ++i) {
                const auto vp = path + "/vcpus/" + std::to_string(i);
                expect_object(vcpus[i], vp, {"vm", "pcpu"});
                s.policy.vcpu_map.emplace_back(get_string(vcpus[i], "vm", vp),
                                               static_cast<int>(as_int(require(vcpus[i], "pcpu", vp), vp + "/pcpu")));
            }
            c.hosts.emplace(host, std::move(s));
        }
    }
    if (auto it = doc.find("sw_timestamp"); it != doc.end()) {
        if (!it->is_object()) schema_error("/sw_timestamp", "expected an object keyed by node");
        for (const auto& [node, r] : it->items()) c.sw_timestamp.emplace(node, range(r, "/sw_timestamp/" + node));
    }
    if (auto it = doc.find("load_changes"); it != doc.end()) {
        if (!it->is_array()) schema_error("/load_changes", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto path = "/load_changes/" + std::to_string(i);
            const auto& l = (*it)[i];
            expect_object(l, path, {"host", "vm", "at_probe", "busy"});
            LoadChange change;
            change.host = get_string(l, "host", path);
            change.vm = get_string(l, "vm", path);
            change.at_probe = as_int(require(l, "at_probe", path), path + "/at_probe");
            change.busy_fraction = as_double(require(l, "busy", path), path + "/busy");
            c.load_changes.push_back(std::move(change));
        }
    }
    if (auto it = doc.find("fault"); it != doc.end()) {
        expect_object(*it, "/fault", {"period", "periods", "node", "extra"});
        FaultInjection f;
        f.period = as_int(require(*it, "period", "/fault"), "/fault/period");
        if (it->contains("periods")) f.periods = as_int(it->at("periods"), "/fault/periods");
        f.node = get_string(*it, "node", "/fault");
        f.extra = duration(require(*it, "extra", "/fault"), "/fault/extra");
        c.fault = std::move(f);
    }
    return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& file)
{
    return parse_experiment(read_json_file(file), file.parent_path());
}

Json to_json(const BoundReport& r)
{
    auto path_json = [](const std::vector<PathBound>& paths) {
        Json arr = Json::array();
        for (const auto& p : paths) {
            arr.push_back({{"source", p.source},
                           {"target", p.target},
                           {"hops", p.hops},
                           {"d_min", duration_json(p.bounds.d_min)},
                           {"d_max", duration_json(p.bounds.d_max)}});
        }
        return arr;
    };
    Json links = Json::array();
    for (const auto& l : r.links) {
        links.push_back({{"from", l.from},
                         {"to", l.to},
                         {"d_min", duration_json(l.bounds.d_min)},
                         {"d_max", duration_json(l.bounds.d_max)},
                         {"assumed", l.assumed}});
    }
    return Json{{"topology", r.topology},
                {"provenance", r.provenance},
                {"scope", to_string(r.scope)},
                {"r_max", r.r_max},
                {"sync_interval", duration_json(r.sync_interval)},
                {"drift_offset", duration_json(r.drift_offset)},
                {"reading_error", duration_json(r.reading_error)},
                {"precision", duration_json(r.precision)},
                {"measurement_error", duration_json(r.measurement_error)},
                {"precision_plus_gamma", duration_json(r.precision + r.measurement_error)},
                {"paths", path_json(r.paths)},
                {"probe_paths", path_json(r.probe_paths)},
                {"links", links},
                {"assumptions", r.assumptions}};
}

BoundReport bound_report_from_json(const Json& doc)
{
    expect_object(doc, "", {"topology", "provenance", "scope", "r_max", "sync_interval", "drift_offset",
                            "reading_error", "precision", "measurement_error", "precision_plus_gamma", "paths",
                            "probe_paths", "links", "assumptions"});
    BoundReport r;
    r.topology = get_string(doc, "topology", "");
    r.provenance = get_string(doc, "provenance", "");
    try {
        r.scope = scope_from_string(get_string(doc, "scope", ""));
    } catch (const Error& e) {
        schema_error("/scope", e.what());
    }
    r.r_max = as_double(require(doc, "r_max", ""), "/r_max");
    r.sync_interval = duration(require(doc, "sync_interval", ""), "/sync_interval");
    r.drift_offset = duration(require(doc, "drift_offset", ""), "/drift_offset");
    r.reading_error = duration(require(doc, "reading_error", ""), "/reading_error");
    r.precision = duration(require(doc, "precision", ""), "/precision");
    r.measurement_error = duration(require(doc, "measurement_error", ""), "/measurement_error");
    auto paths = [&](const char* key) {
        std::vector<PathBound> out;
        const auto& arr = require(doc, key, "");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto path = std::string("/") + key + "/" + std::to_string(i);
            const auto& p = arr[i];
            out.push_back({get_string(p, "source", path), get_string(p, "target", path), get_string(p, "hops", path),
                           {duration(require(p, "d_min", path), path + "/d_min"),
                            duration(require(p, "d_max", path), path + "/d_max")}});
        }
        return out;
    };
    r.paths = paths("paths");
    r.probe_paths = paths("probe_paths");
    const auto& links = require(doc, "links", "");
    for (std::size_t i = 0; i < links.size(); ++i) {
        const auto path = "/links/" + std::to_string(i);
        const auto& l = links[i];
        r.links.push_back({get_string(l, "from", path), get_string(l, "to", path),
                           {duration(require(l, "d_min", path), path + "/d_min"),
                            duration(require(l, "d_max", path), path + "/d_max")},
                           require(l, "assumed", path).get<bool>()});
    }
    for (const auto& a : require(doc, "assumptions", "")) r.assumptions.push_back(a.get<std::string>());
    return r;
}

const char* const kCsvHeader =
    "probe_index,ref_time_ps,node_a,node_b,raw_offset_ps,gamma_virt_a_ps,gamma_virt_b_ps,adjusted_offset_ps,"
    "bound_pi_ps,bound_pi_plus_gamma_ps";

std::vector<CsvRow> to_rows(const ExperimentResult& result)
{
    std::vector<CsvRow> rows;
    rows.reserve(result.samples.size());
    for (const auto& s : result.samples) {
        rows.push_back({s.index, s.time.time_since_epoch().count(), s.precision.node_a, s.precision.node_b,
                        s.precision.raw.count(), s.gamma_virt_a.count(), s.gamma_virt_b.count(),
                        s.precision.adjusted.count(), result.precision.count(),
                        (result.precision + result.measurement_error).count()});
    }
    return rows;
}

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows)
{
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.probe_index << ',' << r.ref_time_ps << ',' << r.node_a << ',' << r.node_b << ',' << r.raw_offset_ps
            << ',' << r.gamma_virt_a_ps << ',' << r.gamma_virt_b_ps << ',' << r.adjusted_offset_ps << ','
            << r.bound_pi_ps << ',' << r.bound_pi_plus_gamma_ps << '\n';
    }
}

std::vector<CsvRow> read_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw Error(ErrorKind::Schema, "CSV header mismatch");
    std::vector<CsvRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 10) throw Error(ErrorKind::Schema, "CSV line " + std::to_string(lineno) + ": expected 10 fields");
        auto num = [&](std::size_t i) {
            try {
                std::size_t used = 0;
                const auto v = std::stoll(f[i], &used);
                if (used != f[i].size()) throw std::invalid_argument("trailing");
                return static_cast<std::int64_t>(v);
            } catch (const std::exception&) {
                throw Error(ErrorKind::Schema, "CSV line " + std::to_string(lineno) + ": field " + std::to_string(i + 1) +
                                                   " is not an integer");
            }
        };
        rows.push_back({num(0), num(1), f[2], f[3], num(4), num(5), num(6), num(7), num(8), num(9)});
    }
    return rows;
}

void write_corrections_csv(std::ostream& out, const ExperimentResult& result)
{
    out << "period,node,applied_ps,correction_ps,actual_offset_ps,reading_delay_ps,rate_ratio\n";
    char rate[32];
    for (const auto& c : result.corrections) {
        std::snprintf(rate, sizeof rate, "%.15f", c.rate_ratio);
        out << c.period << ',' << c.node << ',' << c.applied.time_since_epoch().count() << ','
            << c.decomposition.correction_term.count() << ',' << c.decomposition.actual_offset.count() << ','
            << c.decomposition.reading_delay.count() << ',' << rate << '\n';
    }
}

RunSummary summarize_rows(const std::vector<CsvRow>& rows, std::optional<std::int64_t> load_change_probe)
{
    RunSummary s;
    s.load_change_probe = load_change_probe;
    std::vector<Picoseconds> raw, adjusted, before, after;
    for (const auto& r : rows) {
        raw.emplace_back(r.raw_offset_ps);
        adjusted.emplace_back(r.adjusted_offset_ps);
        if (load_change_probe) (r.probe_index < *load_change_probe ? before : after).emplace_back(r.raw_offset_ps);
        if (r.raw_offset_ps > r.bound_pi_plus_gamma_ps) ++s.raw_violations;
        if (r.adjusted_offset_ps > r.bound_pi_ps) ++s.adjusted_violations;
        s.precision = Picoseconds{r.bound_pi_ps};
        s.precision_plus_gamma = Picoseconds{r.bound_pi_plus_gamma_ps};
    }
    s.raw = summarize(raw);
    s.adjusted = summarize(adjusted);
    s.raw_before = summarize(before);
    s.raw_after = summarize(after);
    s.pass = s.raw_violations == 0 && s.adjusted_violations == 0;
    return s;
}

namespace {

Json stats_json(const SummaryStats& s)
{
    return Json{{"count", s.count}, {"mean_ps", s.mean}, {"stddev_ps", s.stddev}, {"max_ps", s.max.count()}};
}

SummaryStats stats_from_json(const Json& j)
{
    SummaryStats s;
    s.count = j.at("count").get<std::size_t>();
    s.mean = j.at("mean_ps").get<double>();
    s.stddev = j.at("stddev_ps").get<double>();
    s.max = Picoseconds{j.at("max_ps").get<std::int64_t>()};
    return s;
}

}  // namespace

Json to_json(const RunSummary& s)
{
    Json j{{"raw", stats_json(s.raw)},
           {"adjusted", stats_json(s.adjusted)},
           {"raw_violations", s.raw_violations},
           {"adjusted_violations", s.adjusted_violations},
           {"precision", duration_json(s.precision)},
           {"precision_plus_gamma", duration_json(s.precision_plus_gamma)},
           {"verdict", s.pass ? "pass" : "fail"}};
    if (s.load_change_probe) {
        j["load_change_probe"] = *s.load_change_probe;
        j["raw_before_load_change"] = stats_json(s.raw_before);
        j["raw_after_load_change"] = stats_json(s.raw_after);
    }
    return j;
}

RunSummary run_summary_from_json(const Json& j)
{
    RunSummary s;
    s.raw = stats_from_json(j.at("raw"));
    s.adjusted = stats_from_json(j.at("adjusted"));
    s.raw_violations = j.at("raw_violations").get<std::size_t>();
    s.adjusted_violations = j.at("adjusted_violations").get<std::size_t>();
    s.precision = duration(j.at("precision"), "/precision");
    s.precision_plus_gamma = duration(j.at("precision_plus_gamma"), "/precision_plus_gamma");
    s.pass = j.at("verdict").get<std::string>() == "pass";
    if (j.contains("load_change_probe")) {
        s.load_change_probe = j.at("load_change_probe").get<std::int64_t>();
        s.raw_before = stats_from_json(j.at("raw_before_load_change"));
        s.raw_after = stats_from_json(j.at("raw_after_load_change"));
    }
    return s;
}

std::string render_summary(const RunSummary& s)
{
    std::ostringstream out;
    auto line = [&](const char* label, const SummaryStats& st) {
        out << label << "  n=" << st.count << "  mean=" << format_ns(Picoseconds{std::llround(st.mean)})
            << "  stddev=" << format_ns(Picoseconds{std::llround(st.stddev)}) << "  max=" << format_ns(st.max) << "\n";
    };
    line("raw      ", s.raw);
    line("adjusted ", s.adjusted);
    if (s.load_change_probe) {
        out << "load change at probe " << *s.load_change_probe << "\n";
        line("  before ", s.raw_before);
        line("  after  ", s.raw_after);
    }
    out << "bound Pi          " << format_ns(s.precision) << "  (adjusted violations: " << s.adjusted_violations
        << ")\n";
    out << "bound Pi + gamma  " << format_ns(s.precision_plus_gamma) << "  (raw violations: " << s.raw_violations
        << ")\n";
    out << "verdict: " << (s.pass ? "pass" : "fail") << "\n";
    return out.str();
}

}  // namespace vtsync
