#include "vtsync/topology.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "vtsync/error.hpp"

namespace vtsync {

const char* to_string(NodeKind kind)
{
    switch (kind) {
    case NodeKind::Endpoint:        return "endpoint";
    case NodeKind::Switch:          return "switch";
    case NodeKind::Grandmaster:     return "grandmaster";
    case NodeKind::VirtualEndpoint: return "virtual-endpoint";
    case NodeKind::Measurement:     return "measurement";
    }
    return "unknown";
}

NodeKind node_kind_from_string(const std::string& s)
{
    if (s == "endpoint") return NodeKind::Endpoint;
    if (s == "switch") return NodeKind::Switch;
    if (s == "grandmaster") return NodeKind::Grandmaster;
    if (s == "virtual-endpoint") return NodeKind::VirtualEndpoint;
    if (s == "measurement") return NodeKind::Measurement;
    throw Error(ErrorKind::Schema, "unknown node kind '" + s + "'");
}

const char* to_string(Scope scope)
{
    return scope == Scope::AllPairs ? "all-pairs" : "grandmaster";
}

Scope scope_from_string(const std::string& s)
{
    if (s == "all-pairs") return Scope::AllPairs;
    if (s == "grandmaster") return Scope::Grandmaster;
    throw Error(ErrorKind::Configuration, "unknown scope '" + s + "' (expected all-pairs or grandmaster)");
}

std::string to_string(const Path& path)
{
    if (path.empty()) return "{}";
    std::string out = "{";
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) out += ",";
        out += "(" + path[i].from + "," + path[i].to + ")";
    }
    return out + "}";
}

namespace {

void validate_latencies(const LinkLatencies& l, const std::string& what)
{
    l.txts.validate(what + " txts");
    l.rxts.validate(what + " rxts");
    l.ma_c.validate(what + " ma_c");
}

}  // namespace

void Topology::validate() const
{
    std::set<std::string> ids;
    int grandmasters = 0;
    for (const auto& n : nodes) {
        if (n.id.empty()) throw Error(ErrorKind::Configuration, "node with empty id");
        if (!ids.insert(n.id).second) throw Error(ErrorKind::Configuration, "duplicate node id '" + n.id + "'");
        if (n.kind == NodeKind::Grandmaster) ++grandmasters;
        if (n.kind == NodeKind::VirtualEndpoint && (!n.host || n.host->empty())) {
            throw Error(ErrorKind::Configuration, "virtual endpoint '" + n.id + "' must name a host");
        }
        if (n.hypervisor) (void)n.hypervisor->normalized();
        if (n.sw_timestamp) n.sw_timestamp->validate("node " + n.id + " sw_timestamp");
        if (n.residence) n.residence->validate("node " + n.id + " residence");
    }
    if (grandmasters > 1) throw Error(ErrorKind::Configuration, "topology has more than one grandmaster");

    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& l : links) {
        if (!ids.count(l.a) || !ids.count(l.b)) {
            throw Error(ErrorKind::Configuration, "link " + l.a + "-" + l.b + " references an unknown node");
        }
        if (l.a == l.b) throw Error(ErrorKind::Configuration, "self-loop link at '" + l.a + "'");
        if (!seen.insert(std::minmax(l.a, l.b)).second) {
            throw Error(ErrorKind::Configuration, "duplicate link " + l.a + "-" + l.b);
        }
        validate_latencies(l.forward, "link " + l.a + "-" + l.b);
        if (l.reverse) validate_latencies(*l.reverse, "link " + l.b + "-" + l.a);
    }

    if (sync_tree) {
        if (!ids.count(sync_tree->root)) {
            throw Error(ErrorKind::Configuration, "sync tree root '" + sync_tree->root + "' is not a node");
        }
        std::map<std::string, std::string> parent;
        for (const auto& [p, c] : sync_tree->edges) {
            if (!find_link(p, c)) {
                throw Error(ErrorKind::Configuration, "sync tree edge " + p + "-" + c + " is not a link");
            }
            if (c == sync_tree->root) throw Error(ErrorKind::Configuration, "sync tree edge points at the root");
            if (!parent.emplace(c, p).second) {
                throw Error(ErrorKind::Configuration, "node '" + c + "' has two parents in the sync tree");
            }
        }
        for (const auto& [c, p] : parent) {
            std::string cur = c;
            for (std::size_t steps = 0; cur != sync_tree->root; ++steps) {
                auto it = parent.find(cur);
                if (it == parent.end() || steps > parent.size()) {
                    throw Error(ErrorKind::Configuration, "sync tree does not connect '" + c + "' to the root");
                }
                cur = it->second;
            }
        }
    }
    if (probe) {
        if (!ids.count(probe->source)) throw Error(ErrorKind::Configuration, "probe source is not a node");
        for (const auto& t : probe->targets) {
            if (!ids.count(t)) throw Error(ErrorKind::Configuration, "probe target '" + t + "' is not a node");
        }
    }
}

const Node& Topology::node(const std::string& id) const
{
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; });
    if (it == nodes.end()) throw Error(ErrorKind::Configuration, "unknown node '" + id + "'");
    return *it;
}

bool Topology::has_node(const std::string& id) const
{
    return std::any_of(nodes.begin(), nodes.end(), [&](const Node& n) { return n.id == id; });
}

const Link* Topology::find_link(const std::string& x, const std::string& y) const
{
    for (const auto& l : links) {
        if ((l.a == x && l.b == y) || (l.a == y && l.b == x)) return &l;
    }
    return nullptr;
}

std::vector<std::string> Topology::neighbors(const std::string& id) const
{
    std::vector<std::string> out;
    for (const auto& l : links) {
        if (l.a == id) out.push_back(l.b);
        else if (l.b == id) out.push_back(l.a);
    }
    return out;
}

const Node& Topology::grandmaster() const
{
    for (const auto& n : nodes) {
        if (n.kind == NodeKind::Grandmaster) return n;
    }
    throw Error(ErrorKind::Configuration, "topology '" + name + "' has no grandmaster");
}

Path Topology::shortest_path(const std::string& from, const std::string& to) const
{
    (void)node(from);
    (void)node(to);
    std::map<std::string, std::string> parent{{from, from}};
    std::deque<std::string> queue{from};
    while (!queue.empty() && !parent.count(to)) {
        const auto cur = queue.front();
        queue.pop_front();
        for (const auto& nb : neighbors(cur)) {
            if (parent.emplace(nb, cur).second) queue.push_back(nb);
        }
    }
    if (!parent.count(to)) throw Error(ErrorKind::Path, "no path from '" + from + "' to '" + to + "'");
    Path path;
    for (std::string cur = to; cur != from; cur = parent[cur]) path.push_back({parent[cur], cur});
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<std::pair<std::string, std::string>> Topology::tree_edges(const std::string& root) const
{
    (void)node(root);
    if (sync_tree && sync_tree->root == root) return sync_tree->edges;

    // No configured tree: the component of the root must itself be a tree.
    std::vector<std::pair<std::string, std::string>> edges;
    std::set<std::string> visited{root};
    std::deque<std::string> queue{root};
    std::size_t component_links = 0;
    while (!queue.empty()) {
        const auto cur = queue.front();
        queue.pop_front();
        for (const auto& nb : neighbors(cur)) {
            ++component_links;
            if (visited.insert(nb).second) {
                edges.emplace_back(cur, nb);
                queue.push_back(nb);
            }
        }
    }
    if (component_links / 2 != edges.size()) {
        throw Error(ErrorKind::Ambiguity,
                    "topology around '" + root + "' has cycles; configure a sync_tree to pick the sync paths");
    }
    return edges;
}

DelayBounds link_delay_bounds(const LinkLatencies& link, const HypervisorConfig* sender_hv,
                              const HypervisorConfig* receiver_hv)
{
    DelayBounds d{link.txts.min + link.ma_c.min + link.rxts.min, link.txts.max + link.ma_c.max + link.rxts.max};
    for (const auto* hv : {sender_hv, receiver_hv}) {
        if (!hv) continue;
        const auto b = hv_latency_bounds(hv->normalized());
        d += DelayBounds{b.min, b.max};
    }
    return d;
}

DelayBounds hop_delay_bounds(const Topology& topology, const Hop& hop)
{
    const auto* link = topology.find_link(hop.from, hop.to);
    if (!link) throw Error(ErrorKind::Path, "no link between '" + hop.from + "' and '" + hop.to + "'");
    const auto& snd = topology.node(hop.from);
    const auto& rcv = topology.node(hop.to);
    return link_delay_bounds(link->direction(hop.from), snd.hypervisor ? &*snd.hypervisor : nullptr,
                             rcv.hypervisor ? &*rcv.hypervisor : nullptr);
}

DelayBounds path_delay_bounds(const Topology& topology, const Path& path)
{
    DelayBounds total;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i > 0 && path[i].from != path[i - 1].to) {
            throw Error(ErrorKind::Path, "path " + to_string(path) + " does not chain");
        }
        total += hop_delay_bounds(topology, path[i]);
    }
    return total;
}

namespace {

void simple_paths_from(const Topology& topology, const std::string& cur, std::set<std::string>& on_path,
                       Path& prefix, std::vector<Path>& out)
{
    for (const auto& nb : topology.neighbors(cur)) {
        if (on_path.count(nb)) continue;
        prefix.push_back({cur, nb});
        out.push_back(prefix);
        on_path.insert(nb);
        simple_paths_from(topology, nb, on_path, prefix, out);
        on_path.erase(nb);
        prefix.pop_back();
    }
}

}  // namespace

std::vector<Path> enumerate_paths(const Topology& topology, const std::optional<std::string>& root)
{
    std::vector<Path> out;
    if (root) {
        std::map<std::string, std::string> parent;
        std::vector<std::string> order;
        for (const auto& [p, c] : topology.tree_edges(*root)) {
            parent[c] = p;
            order.push_back(c);
        }
        for (const auto& c : order) {
            Path path;
            for (std::string cur = c; cur != *root; cur = parent.at(cur)) path.push_back({parent.at(cur), cur});
            std::reverse(path.begin(), path.end());
            out.push_back(std::move(path));
        }
        return out;
    }
    for (const auto& n : topology.nodes) {
        std::set<std::string> on_path{n.id};
        Path prefix;
        simple_paths_from(topology, n.id, on_path, prefix, out);
    }
    return out;
}

std::vector<Path> scope_paths(const Topology& topology, Scope scope)
{
    if (scope == Scope::AllPairs) return enumerate_paths(topology, std::nullopt);
    const auto& gm = topology.grandmaster();
    std::vector<Path> out;
    for (auto& p : enumerate_paths(topology, gm.id)) {
        const auto kind = topology.node(p.back().to).kind;
        if (kind == NodeKind::Endpoint || kind == NodeKind::VirtualEndpoint) out.push_back(std::move(p));
    }
    return out;
}

ReadingError reading_error(const Topology& topology, Scope scope)
{
    const auto paths = scope_paths(topology, scope);
    if (paths.empty()) {
        throw Error(ErrorKind::EmptyScope, std::string("no paths in ") + to_string(scope) + " scope");
    }
    ReadingError r;
    bool first = true;
    for (const auto& p : paths) {
        const auto b = path_delay_bounds(topology, p);
        r.d_min = first ? b.d_min : std::min(r.d_min, b.d_min);
        r.d_max = first ? b.d_max : std::max(r.d_max, b.d_max);
        first = false;
    }
    r.value = r.d_max - r.d_min;
    return r;
}

}  // namespace vtsync
