#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vtsync/analysis.hpp"
#include "vtsync/simulator.hpp"

namespace vtsync {

using Json = nlohmann::json;

struct LoadedTopology
{
    Topology topology;
    std::string provenance;  // provenance_id of the canonical document
};

/// Schema violations raise ErrorKind::Schema with a JSON-pointer-like path to the field.
LoadedTopology parse_topology(const Json& doc);
LoadedTopology load_topology(const std::filesystem::path& file);

/// The referenced topology is resolved relative to the config file.
ExperimentConfig parse_experiment(const Json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment(const std::filesystem::path& file);

Json to_json(const BoundReport& report);
BoundReport bound_report_from_json(const Json& doc);

Json read_json_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, const std::string& text);

/// One line of the per-probe CSV.
struct CsvRow
{
    std::int64_t probe_index = 0;
    std::int64_t ref_time_ps = 0;
    std::string node_a;
    std::string node_b;
    std::int64_t raw_offset_ps = 0;
    std::int64_t gamma_virt_a_ps = 0;
    std::int64_t gamma_virt_b_ps = 0;
    std::int64_t adjusted_offset_ps = 0;
    std::int64_t bound_pi_ps = 0;
    std::int64_t bound_pi_plus_gamma_ps = 0;

    friend bool operator==(const CsvRow&, const CsvRow&) = default;
};

extern const char* const kCsvHeader;

std::vector<CsvRow> to_rows(const ExperimentResult& result);
void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);
/// ErrorKind::Schema on a malformed header or row.
std::vector<CsvRow> read_csv(std::istream& in);

void write_corrections_csv(std::ostream& out, const ExperimentResult& result);

struct RunSummary
{
    SummaryStats raw;
    SummaryStats adjusted;
    std::size_t raw_violations = 0;
    std::size_t adjusted_violations = 0;
    std::optional<std::int64_t> load_change_probe;
    SummaryStats raw_before;  // probes before the load change
    SummaryStats raw_after;
    Picoseconds precision{0};
    Picoseconds precision_plus_gamma{0};
    bool pass = true;
};

RunSummary summarize_rows(const std::vector<CsvRow>& rows, std::optional<std::int64_t> load_change_probe);
Json to_json(const RunSummary& summary);
RunSummary run_summary_from_json(const Json& doc);
std::string render_summary(const RunSummary& summary);

}  // namespace vtsync
