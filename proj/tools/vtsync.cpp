#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vtsync/config.hpp"
#include "vtsync/error.hpp"
#include "vtsync/properties.hpp"

namespace fs = std::filesystem;
using namespace vtsync;

namespace {

int cmd_analyze(const std::string& file, const std::string& scope_name, const std::string& output, bool json)
{
    const auto scope = scope_from_string(scope_name);
    const auto loaded = load_topology(file);
    const auto report = build_bound_report(loaded.topology, scope, loaded.provenance);
    if (json) std::cout << to_json(report).dump(2) << "\n";
    else std::cout << render_report(report);
    if (!output.empty()) write_text_file(output, to_json(report).dump(2) + "\n");
    return 0;
}

struct RunOutput
{
    std::uint64_t seed = 0;
    RunSummary summary;
    Verdict verdict;
};

RunOutput simulate_one(ExperimentConfig config, const fs::path& dir)
{
    fs::create_directories(dir);
    const auto result = run_experiment(config);
    const auto report =
        build_bound_report(config.topology, Scope::Grandmaster, config.provenance, config.sync_interval);
    const auto verdict = verify_experiment(result, report);
    const auto rows = to_rows(result);

    std::ostringstream csv;
    write_csv(csv, rows);
    write_text_file(dir / "samples.csv", csv.str());
    std::ostringstream corr;
    write_corrections_csv(corr, result);
    write_text_file(dir / "corrections.csv", corr.str());
    write_text_file(dir / "bounds.json", to_json(report).dump(2) + "\n");

    Json meta{{"name", result.name},
              {"scenario", config.scenario},
              {"seed", result.seed},
              {"provenance", result.provenance},
              {"probes", rows.size()},
              {"unmatched_follow_ups", result.unmatched_follow_ups},
              {"skipped_samples", result.skipped_samples},
              {"max_reading_delay_spread_ps", max_reading_delay_spread(result).count()}};
    if (result.load_change_probe) meta["load_change_probe"] = *result.load_change_probe;
    write_text_file(dir / "run.json", meta.dump(2) + "\n");

    const auto summary = summarize_rows(rows, result.load_change_probe);
    auto sj = to_json(summary);
    sj["verify"] = {{"pass", verdict.pass},
                    {"raw_violations", verdict.raw_violations},
                    {"adjusted_violations", verdict.adjusted_violations},
                    {"flagged_periods", verdict.flagged_periods}};
    write_text_file(dir / "summary.json", sj.dump(2) + "\n");
    write_text_file(dir / "summary.txt", render_summary(summary));
    return {config.seed, summary, verdict};
}

int cmd_simulate(const std::string& file, const std::string& out, std::optional<std::uint64_t> seed,
                 std::size_t seeds)
{
    auto config = load_experiment(file);
    if (seed) config.seed = *seed;
    config.validate();

    std::vector<RunOutput> runs;
    if (seeds <= 1) {
        runs.push_back(simulate_one(config, out));
    } else {
        // Independent seeds share nothing; each writes its own directory.
        std::vector<std::future<RunOutput>> jobs;
        for (std::size_t i = 0; i < seeds; ++i) {
            auto c = config;
            c.seed = config.seed + i;
            jobs.push_back(std::async(std::launch::async, simulate_one, c,
                                      fs::path(out) / ("seed-" + std::to_string(c.seed))));
        }
        for (auto& j : jobs) runs.push_back(j.get());
    }

    bool pass = true;
    for (const auto& r : runs) {
        std::cout << "seed " << r.seed << "\n" << render_summary(r.summary);
        if (!r.verdict.pass && !r.verdict.flagged_periods.empty()) {
            std::cout << "flagged sync periods:";
            for (auto p : r.verdict.flagged_periods) std::cout << " " << p;
            std::cout << "\n";
        }
        pass = pass && r.verdict.pass;
    }
    return pass ? 0 : 2;
}

int cmd_properties(std::uint64_t seed, std::size_t iters, bool negative_control)
{
    const std::vector<PropertyReport> reports{check_virtual_clock_properties(seed, iters, negative_control),
                                              check_path_oracle(seed, iters)};
    bool pass = true;
    for (const auto& r : reports) {
        std::cout << (r.pass() ? "PASS " : "FAIL ") << r.name << "  (" << r.cases << " cases, " << r.failures
                  << " failures)\n";
        if (!r.pass()) std::cout << "  counterexample: " << r.counterexample << "\n";
        pass = pass && r.pass();
    }
    return pass ? 0 : 1;
}

int cmd_report(const std::string& dir)
{
    std::ifstream in(fs::path(dir) / "samples.csv");
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + (fs::path(dir) / "samples.csv").string() + "'");
    const auto rows = read_csv(in);
    std::optional<std::int64_t> change;
    if (fs::exists(fs::path(dir) / "run.json")) {
        const auto meta = read_json_file(fs::path(dir) / "run.json");
        if (meta.contains("load_change_probe")) change = meta.at("load_change_probe").get<std::int64_t>();
    }
    const auto summary = summarize_rows(rows, change);
    write_text_file(fs::path(dir) / "summary.txt", render_summary(summary));
    std::cout << render_summary(summary);
    return summary.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Clock synchronization bound analysis and simulation"};
    app.require_subcommand(1);

    std::string topology_file, scope = "grandmaster", analyze_out;
    bool analyze_json = false;
    auto* analyze = app.add_subcommand("analyze", "Compute delay, reading-error and precision bounds of a topology");
    analyze->add_option("topology", topology_file, "Topology document")->required()->check(CLI::ExistingFile);
    analyze->add_option("--scope", scope, "Paths the reading error is taken over")
        ->check(CLI::IsMember({"all-pairs", "grandmaster"}));
    analyze->add_option("-o,--output", analyze_out, "Write the machine-readable report here");
    analyze->add_flag("--json", analyze_json, "Print the machine-readable report instead of the table");

    std::string config_file, out_dir;
    std::optional<std::uint64_t> seed;
    std::size_t seeds = 1;
    auto* simulate = app.add_subcommand("simulate", "Run a synchronization experiment and emit per-probe samples");
    simulate->add_option("config", config_file, "Experiment document")->required()->check(CLI::ExistingFile);
    simulate->add_option("-o,--output", out_dir, "Output directory")->required();
    simulate->add_option("--seed", seed, "Override the configured seed");
    simulate->add_option("--seeds", seeds, "Run this many consecutive seeds in parallel")->check(CLI::PositiveNumber);

    std::size_t iters = 10'000;
    std::uint64_t prop_seed = 1;
    bool negative = false;
    auto* properties = app.add_subcommand("properties", "Run the randomized property suites");
    properties->add_option("--iters", iters, "Cases per property");
    properties->add_option("--seed", prop_seed, "Generator seed");
    properties->add_flag("--negative-control", negative, "Also assert that continuous virtual clocks are good");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Regenerate the summary of a simulation output directory");
    report->add_option("dir", report_dir, "Simulation output directory")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) return cmd_analyze(topology_file, scope, analyze_out, analyze_json);
        if (*simulate) return cmd_simulate(config_file, out_dir, seed, seeds);
        if (*properties) return cmd_properties(prop_seed, iters, negative);
        if (*report) return cmd_report(report_dir);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
