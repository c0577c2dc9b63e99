#include <gtest/gtest.h>

#include <sstream>

#include "vtsync/config.hpp"
#include "vtsync/error.hpp"

using namespace vtsync;

namespace {

const std::string kFixtures = VTSYNC_FIXTURE_DIR;

Json native_doc() { return read_json_file(kFixtures + "/native_topology.json"); }

// Parses `doc` and returns the schema error message, or "" if it parsed.
std::string schema_message(const Json& doc)
{
    try {
        (void)parse_topology(doc);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Schema) << e.what();
        return e.what();
    }
    return {};
}

Json range_json(std::int64_t lo, std::int64_t hi) { return Json{{"min", lo}, {"max", hi}, {"unit", "ns"}}; }

}  // namespace

TEST(TopologySchema, FixturesParse)
{
    const auto native = load_topology(kFixtures + "/native_topology.json");
    EXPECT_EQ(native.topology.nodes.size(), 5u);
    EXPECT_EQ(native.topology.sync_interval, ms(125));
    EXPECT_DOUBLE_EQ(native.topology.r_max, 1.184e-8);
    EXPECT_EQ(native.provenance.size(), 16u);

    const auto virt = load_topology(kFixtures + "/virtualized_topology.json");
    EXPECT_NE(native.provenance, virt.provenance);
    EXPECT_FALSE(virt.topology.assumptions.empty());
}

TEST(TopologySchema, MissingUnitNamesThePath)
{
    auto doc = native_doc();
    doc["links"][2]["ma_c"].erase("unit");
    EXPECT_NE(schema_message(doc).find("/links/2/ma_c/unit: missing required field"), std::string::npos);
}

TEST(TopologySchema, UnknownFieldIsRejected)
{
    auto doc = native_doc();
    doc["nodes"][0]["colour"] = "blue";
    EXPECT_NE(schema_message(doc).find("/nodes/0/colour: unknown field"), std::string::npos);
}

TEST(TopologySchema, BadUnitAndInvertedRange)
{
    auto doc = native_doc();
    doc["links"][0]["txts"]["unit"] = "fortnights";
    EXPECT_NE(schema_message(doc).find("/links/0/txts/unit"), std::string::npos);

    doc = native_doc();
    doc["links"][0]["txts"] = range_json(10, 5);
    EXPECT_NE(schema_message(doc).find("/links/0/txts"), std::string::npos);
}

TEST(TopologySchema, NonIntegerValue)
{
    auto doc = native_doc();
    doc["links"][1]["rxts"]["min"] = 1.5;
    EXPECT_NE(schema_message(doc).find("/links/1/rxts/min: expected an integer"), std::string::npos);
}

TEST(TopologySchema, SplitMediumAccessAndCable)
{
    auto doc = native_doc();
    auto& link = doc["links"][0];
    const auto merged = parse_topology(doc).topology.links[0].forward.ma_c;
    link.erase("ma_c");
    link["ma"] = range_json(200, 220);
    link["c"] = range_json(61, 66);
    EXPECT_EQ(parse_topology(doc).topology.links[0].forward.ma_c, merged);

    link["ma_c"] = range_json(261, 286);
    EXPECT_NE(schema_message(doc), "");
}

TEST(TopologySchema, MissingGrandmasterIsAnalysedAsError)
{
    auto doc = native_doc();
    for (auto& n : doc["nodes"]) {
        if (n["kind"] == "grandmaster") n["kind"] = "endpoint";
    }
    doc.erase("sync_tree");
    const auto t = parse_topology(doc).topology;
    EXPECT_THROW((void)build_bound_report(t, Scope::Grandmaster, "x"), Error);
}

TEST(BoundReportJson, RoundTrip)
{
    for (const auto* name : {"native_topology.json", "virtualized_topology.json"}) {
        const auto loaded = load_topology(kFixtures + "/" + name);
        for (auto scope : {Scope::Grandmaster, Scope::AllPairs}) {
            const auto report = build_bound_report(loaded.topology, scope, loaded.provenance);
            const auto text = to_json(report).dump(2);
            EXPECT_EQ(bound_report_from_json(Json::parse(text)), report) << name;
        }
    }
}

TEST(BoundReportJson, DurationsCarryUnits)
{
    const auto loaded = load_topology(kFixtures + "/native_topology.json");
    const auto j = to_json(build_bound_report(loaded.topology, Scope::Grandmaster, loaded.provenance));
    EXPECT_EQ(j.at("precision"), (Json{{"value", 307'960}, {"unit", "ps"}}));
}

TEST(ExperimentSchema, FixturesParse)
{
    const auto c = load_experiment(kFixtures + "/consolidating-hwts.json");
    EXPECT_EQ(c.scenario, "consolidating-hwts");
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.probe_count(), 3600);
    EXPECT_EQ(c.hosts.size(), 2u);
    EXPECT_EQ(c.load_changes.size(), 4u);
    EXPECT_EQ(c.sw_timestamp.at("m1").max, ns(150));
    EXPECT_FALSE(c.syntonize);
}

TEST(ExperimentSchema, DurationShorterThanProbePeriod)
{
    auto doc = read_json_file(kFixtures + "/native-hwts.json");
    doc["duration"] = Json{{"value", 500}, {"unit", "ms"}};
    EXPECT_THROW((void)parse_experiment(doc, kFixtures).validate(), Error);
}

TEST(ExperimentSchema, UnknownServoOption)
{
    auto doc = read_json_file(kFixtures + "/native-hwts.json");
    doc["servo"]["gain"] = 2;
    try {
        (void)parse_experiment(doc, kFixtures);
        FAIL() << "expected a schema error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("/servo/gain"), std::string::npos);
    }
}

TEST(ExperimentSchema, InlineTopology)
{
    auto doc = read_json_file(kFixtures + "/native-hwts.json");
    doc["topology"] = native_doc();
    const auto inline_cfg = parse_experiment(doc, "/nonexistent");
    const auto file_cfg = load_experiment(kFixtures + "/native-hwts.json");
    EXPECT_EQ(inline_cfg.provenance, file_cfg.provenance);
}

TEST(Csv, RoundTripAndShape)
{
    auto c = load_experiment(kFixtures + "/consolidating-hwts.json");
    c.duration = sec(30);
    const auto rows = to_rows(run_experiment(c));
    ASSERT_EQ(rows.size(), 30u);
    std::stringstream buf;
    write_csv(buf, rows);
    std::string header;
    std::getline(buf, header);
    EXPECT_EQ(header, kCsvHeader);
    buf.seekg(0);
    EXPECT_EQ(read_csv(buf), rows);
    for (const auto& r : rows) {
        EXPECT_GE(r.raw_offset_ps, 0);
        EXPECT_GE(r.adjusted_offset_ps, 0);
        EXPECT_GE(r.gamma_virt_a_ps, 0);
        EXPECT_GE(r.gamma_virt_b_ps, 0);
        EXPECT_EQ(r.bound_pi_ps, 329'960);
        EXPECT_EQ(r.bound_pi_plus_gamma_ps, 650'960);
    }
}

TEST(Csv, MalformedInput)
{
    std::istringstream bad_header("probe,time\n");
    EXPECT_THROW((void)read_csv(bad_header), Error);
    std::istringstream bad_row(std::string(kCsvHeader) + "\n1,2,a,b,notanumber,0,0,0,0,0\n");
    EXPECT_THROW((void)read_csv(bad_row), Error);
}

TEST(RunSummaryJson, RoundTrip)
{
    auto c = load_experiment(kFixtures + "/consolidating-hwts.json");
    c.duration = sec(40);
    c.load_changes.back().at_probe = 20;
    c.load_changes[1].at_probe = 20;
    const auto result = run_experiment(c);
    const auto s = summarize_rows(to_rows(result), result.load_change_probe);
    EXPECT_EQ(s.raw_before.count + s.raw_after.count, 40u);
    const auto back = run_summary_from_json(Json::parse(to_json(s).dump()));
    EXPECT_EQ(render_summary(back), render_summary(s));
    EXPECT_TRUE(s.pass);
}
