#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vtsync/topology.hpp"

namespace vtsync {

/// 2 * r_max * S, rounded to 1 ps.
Picoseconds drift_offset(double r_max, Picoseconds sync_interval);

/// Gamma + reading error: the tight value of the precision bound.
Picoseconds precision_bound(Picoseconds drift_offset, Picoseconds reading_error);

struct MeasurementError
{
    Picoseconds value{0};  // max d_max - min d_min over the probe paths
    std::vector<std::pair<Path, DelayBounds>> paths;
};

/// Jitter of the fewest-hop paths from `source` to each target.
/// ErrorKind::EmptyScope for an empty target set.
MeasurementError measurement_error(const Topology& topology, const std::string& source,
                                   const std::vector<std::string>& targets);

/// offset / (2 * elapsed): per-clock drift when two clocks drifting in opposite
/// directions accumulate `offset` over `elapsed`.
double estimate_drift_rate(Picoseconds offset, Picoseconds elapsed);

/// FNV-1a of a document's canonical text; ties results to the topology they came from.
std::string provenance_id(const std::string& canonical_text);

struct PathBound
{
    std::string source;
    std::string target;
    std::string hops;  // rendered path
    DelayBounds bounds;

    friend bool operator==(const PathBound&, const PathBound&) = default;
};

struct LinkBound
{
    std::string from;
    std::string to;
    DelayBounds bounds;
    bool assumed = false;

    friend bool operator==(const LinkBound&, const LinkBound&) = default;
};

struct BoundReport
{
    std::string topology;
    std::string provenance;
    Scope scope = Scope::Grandmaster;
    double r_max = 0.0;
    Picoseconds sync_interval{0};
    Picoseconds drift_offset{0};
    Picoseconds reading_error{0};
    Picoseconds precision{0};
    Picoseconds measurement_error{0};  // 0 without a probe specification
    std::vector<PathBound> paths;
    std::vector<PathBound> probe_paths;
    std::vector<LinkBound> links;
    std::vector<std::string> assumptions;

    friend bool operator==(const BoundReport&, const BoundReport&) = default;
};

/// Every bound of a topology. `sync_interval` overrides the topology's period.
BoundReport build_bound_report(const Topology& topology, Scope scope, const std::string& provenance,
                               std::optional<Picoseconds> sync_interval = std::nullopt);

/// Multi-line human-readable table.
std::string render_report(const BoundReport& report);

struct ExperimentResult;

struct Verdict
{
    bool pass = true;
    std::vector<std::size_t> raw_violations;       // sample indices above precision + gamma
    std::vector<std::size_t> adjusted_violations;  // sample indices above precision
    std::vector<std::int64_t> flagged_periods;     // sync periods of the violating samples
};

/// Inclusive checks raw <= precision + gamma and adjusted <= precision for every sample.
/// ErrorKind::Provenance if the result and report come from different topologies.
Verdict verify_experiment(const ExperimentResult& result, const BoundReport& report);

}  // namespace vtsync
