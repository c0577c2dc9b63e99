#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vtsync/hypervisor.hpp"

namespace vtsync {

enum class NodeKind { Endpoint, Switch, Grandmaster, VirtualEndpoint, Measurement };

const char* to_string(NodeKind kind);
NodeKind node_kind_from_string(const std::string& s);

struct Node
{
    std::string id;
    NodeKind kind = NodeKind::Endpoint;
    std::optional<std::string> host;               // physical host of a virtual node
    std::optional<HypervisorConfig> hypervisor;    // latencies on this node's message path
    std::optional<LatencyRange> sw_timestamp;      // guest OS + hypervisor delay of software rx timestamps
    std::optional<LatencyRange> residence;         // bridge dwell time of a Sync

    /// Identifier of the physical clock this node reads.
    const std::string& clock_domain() const { return host ? *host : id; }
    bool is_virtual() const { return kind == NodeKind::VirtualEndpoint; }

    friend bool operator==(const Node&, const Node&) = default;
};

/// Latency components of one transmission direction. Medium access and medium
/// propagation are stored merged, as they are measured jointly.
struct LinkLatencies
{
    LatencyRange txts;
    LatencyRange rxts;
    LatencyRange ma_c;

    friend bool operator==(const LinkLatencies&, const LinkLatencies&) = default;
};

struct Link
{
    std::string a;
    std::string b;
    LinkLatencies forward;                 // a -> b
    std::optional<LinkLatencies> reverse;  // b -> a; symmetric when absent
    bool assumed = false;                  // latencies are a modeling assumption
    std::string note;

    const LinkLatencies& direction(const std::string& from) const
    {
        return (from == b && reverse) ? *reverse : forward;
    }

    friend bool operator==(const Link&, const Link&) = default;
};

struct Hop
{
    std::string from;
    std::string to;

    friend bool operator==(const Hop&, const Hop&) = default;
    friend auto operator<=>(const Hop&, const Hop&) = default;
};

using Path = std::vector<Hop>;

std::string to_string(const Path& path);

struct DelayBounds
{
    Picoseconds d_min{0};
    Picoseconds d_max{0};

    Picoseconds jitter() const { return d_max - d_min; }

    DelayBounds& operator+=(const DelayBounds& o)
    {
        d_min += o.d_min;
        d_max += o.d_max;
        return *this;
    }

    friend bool operator==(const DelayBounds&, const DelayBounds&) = default;
};

struct SyncTree
{
    std::string root;
    std::vector<std::pair<std::string, std::string>> edges;  // parent, child

    friend bool operator==(const SyncTree&, const SyncTree&) = default;
};

struct ProbeSpec
{
    std::string source;
    std::vector<std::string> targets;

    friend bool operator==(const ProbeSpec&, const ProbeSpec&) = default;
};

class Topology
{
public:
    std::string name;
    std::vector<Node> nodes;
    std::vector<Link> links;
    std::optional<SyncTree> sync_tree;
    std::optional<ProbeSpec> probe;
    double r_max = 0.0;
    Picoseconds sync_interval{0};
    std::vector<std::string> assumptions;

    /// Structural checks: unique ids, known link endpoints, valid ranges, at most one
    /// grandmaster, hosts for virtual endpoints, and a well-formed sync tree.
    void validate() const;

    const Node& node(const std::string& id) const;
    bool has_node(const std::string& id) const;
    const Link* find_link(const std::string& x, const std::string& y) const;
    std::vector<std::string> neighbors(const std::string& id) const;

    /// The unique grandmaster; ErrorKind::Configuration when there is none.
    const Node& grandmaster() const;

    /// Fewest-hop path, ties broken by neighbor order; ErrorKind::Path if disconnected.
    Path shortest_path(const std::string& from, const std::string& to) const;

    /// Parent of each node in the spanning tree rooted at `root`.
    std::vector<std::pair<std::string, std::string>> tree_edges(const std::string& root) const;
};

/// d = L(hv, sender) + L(txts) + L(ma+c) + L(rxts) + L(hv, receiver); absent
/// hypervisors contribute zero.
DelayBounds link_delay_bounds(const LinkLatencies& link, const HypervisorConfig* sender_hv,
                              const HypervisorConfig* receiver_hv);

/// Bounds of one hop in the topology, including both endpoints' hypervisor latencies.
DelayBounds hop_delay_bounds(const Topology& topology, const Hop& hop);

/// Component-wise sum of hop bounds. ErrorKind::Path if a hop is not a link or the
/// hops do not chain.
DelayBounds path_delay_bounds(const Topology& topology, const Path& path);

/// With a root: the sync-tree path from root to every other tree node. Without: every
/// simple path between every ordered pair of distinct nodes.
std::vector<Path> enumerate_paths(const Topology& topology, const std::optional<std::string>& root);

enum class Scope { AllPairs, Grandmaster };

const char* to_string(Scope scope);
Scope scope_from_string(const std::string& s);

struct ReadingError
{
    Picoseconds value{0};  // d_max - d_min
    Picoseconds d_min{0};
    Picoseconds d_max{0};
};

/// Paths a reading error is taken over: every simple path, or the sync-tree paths from
/// the grandmaster to the synchronized endpoints (endpoint and virtual-endpoint nodes).
std::vector<Path> scope_paths(const Topology& topology, Scope scope);

ReadingError reading_error(const Topology& topology, Scope scope);

}  // namespace vtsync
