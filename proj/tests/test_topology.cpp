#include <gtest/gtest.h>

#include <algorithm>

#include "vtsync/config.hpp"
#include "vtsync/error.hpp"
#include "vtsync/topology.hpp"

using namespace vtsync;

namespace {

const std::string kFixtures = VTSYNC_FIXTURE_DIR;

Topology native() { return load_topology(kFixtures + "/native_topology.json").topology; }
Topology virtualized() { return load_topology(kFixtures + "/virtualized_topology.json").topology; }

LinkLatencies native_link(std::int64_t ma_lo, std::int64_t ma_hi)
{
    return {LatencyRange::between(ns(984), ns(1024)), LatencyRange::between(ns(2148), ns(2228)),
            LatencyRange::between(ns(ma_lo), ns(ma_hi))};
}

Node node(std::string id, NodeKind kind = NodeKind::Endpoint)
{
    Node n;
    n.id = std::move(id);
    n.kind = kind;
    return n;
}

Link link(std::string a, std::string b, LinkLatencies l)
{
    Link out;
    out.a = std::move(a);
    out.b = std::move(b);
    out.forward = l;
    return out;
}

LinkLatencies constant(std::int64_t tx, std::int64_t ma, std::int64_t rx)
{
    return {LatencyRange::between(ns(tx), ns(tx)), LatencyRange::between(ns(rx), ns(rx)),
            LatencyRange::between(ns(ma), ns(ma))};
}

// gm - a - b - gm triangle: the grandmaster scope has two candidate routes to b.
Topology triangle()
{
    Topology t;
    t.nodes = {node("gm", NodeKind::Grandmaster), node("a"), node("b")};
    t.links = {link("gm", "a", constant(1, 1, 1)), link("a", "b", constant(1, 1, 1)),
               link("b", "gm", constant(1, 1, 1))};
    return t;
}

}  // namespace

TEST(LinkBounds, GrandmasterToSwitch)
{
    const auto b = link_delay_bounds(native_link(261, 286), nullptr, nullptr);
    EXPECT_EQ(b.d_min, ns(984 + 261 + 2148));
    EXPECT_EQ(b.d_max, ns(1024 + 286 + 2228));
    EXPECT_EQ(b, (DelayBounds{ns(3393), ns(3538)}));
}

TEST(LinkBounds, SwitchToSecondHost)
{
    EXPECT_EQ(link_delay_bounds(native_link(147, 179), nullptr, nullptr), (DelayBounds{ns(3279), ns(3431)}));
}

TEST(LinkBounds, ZeroLink)
{
    EXPECT_EQ(link_delay_bounds(LinkLatencies{}, nullptr, nullptr), DelayBounds{});
}

TEST(LinkBounds, HypervisorsOnBothEnds)
{
    HypervisorConfig hv{LatencyRange::between(ps(0), us(1)), LatencyRange::between(ps(0), us(2)),
                        LatencyRange::between(ns(10), us(3)), Timestamping::SoftwareInVm};
    const auto b = link_delay_bounds(constant(1, 1, 1), &hv, &hv);
    EXPECT_EQ(b.d_min, ns(3) + 2 * ns(10));
    EXPECT_EQ(b.d_max, ns(3) + 2 * us(6));
    hv.timestamping = Timestamping::HardwarePassthrough;
    EXPECT_EQ(link_delay_bounds(constant(1, 1, 1), &hv, &hv), (DelayBounds{ns(3), ns(3)}));
}

TEST(LinkBounds, ReverseDirectionOverride)
{
    Topology t;
    t.nodes = {node("x"), node("y")};
    auto l = link("x", "y", constant(1, 1, 1));
    l.reverse = constant(2, 2, 2);
    t.links = {l};
    EXPECT_EQ(hop_delay_bounds(t, {"x", "y"}), (DelayBounds{ns(3), ns(3)}));
    EXPECT_EQ(hop_delay_bounds(t, {"y", "x"}), (DelayBounds{ns(6), ns(6)}));
}

TEST(PathBounds, GrandmasterToBothHosts)
{
    const auto t = native();
    EXPECT_EQ(path_delay_bounds(t, {{"gm", "sw1"}, {"sw1", "mfn2"}}), (DelayBounds{ns(6672), ns(6969)}));
    EXPECT_EQ(path_delay_bounds(t, {{"gm", "sw1"}, {"sw1", "mfn1"}}), (DelayBounds{ns(6667), ns(6972)}));
}

TEST(PathBounds, EmptyPath)
{
    EXPECT_EQ(path_delay_bounds(native(), {}), DelayBounds{});
}

TEST(PathBounds, MissingLinkIsAPathError)
{
    try {
        (void)path_delay_bounds(native(), {{"gm", "mfn1"}});
        FAIL() << "expected a path error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Path);
    }
    EXPECT_THROW((void)path_delay_bounds(native(), {{"gm", "sw1"}, {"mfn1", "sw1"}}), Error);
}

TEST(ShortestPath, DisconnectedPairIsAPathError)
{
    Topology t;
    t.nodes = {node("x"), node("y")};
    try {
        (void)t.shortest_path("x", "y");
        FAIL() << "expected a path error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Path);
    }
}

TEST(EnumeratePaths, NativeTreeFromGrandmaster)
{
    const auto paths = enumerate_paths(native(), std::string("gm"));
    std::vector<std::string> rendered;
    for (const auto& p : paths) rendered.push_back(to_string(p));
    for (const auto* expected : {"{(gm,sw1)}", "{(gm,sw1),(sw1,mfn1)}", "{(gm,sw1),(sw1,mfn2)}"}) {
        EXPECT_NE(std::find(rendered.begin(), rendered.end(), expected), rendered.end()) << expected;
    }
}

TEST(EnumeratePaths, TwoNodes)
{
    Topology t;
    t.nodes = {node("x"), node("y")};
    t.links = {link("x", "y", constant(1, 1, 1))};
    EXPECT_EQ(enumerate_paths(t, std::string("x")).size(), 1u);
}

TEST(EnumeratePaths, VirtualizedLeafPaths)
{
    const auto paths = scope_paths(virtualized(), Scope::Grandmaster);
    ASSERT_EQ(paths.size(), 2u);
    EXPECT_EQ(to_string(paths[0]), "{(gm,sw1),(sw1,cs1)}");
    EXPECT_EQ(to_string(paths[1]), "{(gm,sw2),(sw2,cs2)}");
}

TEST(EnumeratePaths, CycleWithoutSyncTreeIsAmbiguous)
{
    try {
        (void)enumerate_paths(triangle(), std::string("gm"));
        FAIL() << "expected an ambiguity error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Ambiguity);
    }
}

TEST(EnumeratePaths, CycleWithSyncTreeIsResolved)
{
    auto t = triangle();
    t.sync_tree = SyncTree{"gm", {{"gm", "a"}, {"a", "b"}}};
    const auto paths = enumerate_paths(t, std::string("gm"));
    ASSERT_EQ(paths.size(), 2u);
    EXPECT_EQ(paths[1].size(), 2u);
}

TEST(EnumeratePaths, AllPairsOnTriangle)
{
    // Six ordered pairs, each reachable directly or around the third node.
    EXPECT_EQ(enumerate_paths(triangle(), std::nullopt).size(), 12u);
}

TEST(ReadingError, NativeGrandmasterScope)
{
    const auto e = reading_error(native(), Scope::Grandmaster);
    EXPECT_EQ(e.d_min, ns(6667));
    EXPECT_EQ(e.d_max, ns(6972));
    EXPECT_EQ(e.value, ns(6972 - 6667));
}

TEST(ReadingError, SingleConstantLink)
{
    Topology t;
    t.nodes = {node("gm", NodeKind::Grandmaster), node("e")};
    t.links = {link("gm", "e", constant(5, 5, 5))};
    EXPECT_EQ(reading_error(t, Scope::Grandmaster).value, ps(0));
    t.links[0].forward.ma_c = LatencyRange::between(ns(5), ns(12));
    EXPECT_EQ(reading_error(t, Scope::Grandmaster).value, ns(7));
}

TEST(ReadingError, Virtualized)
{
    EXPECT_EQ(reading_error(virtualized(), Scope::Grandmaster).value, ns(327));
}

TEST(ReadingError, EmptyScope)
{
    Topology t;
    t.nodes = {node("gm", NodeKind::Grandmaster), node("s", NodeKind::Switch)};
    t.links = {link("gm", "s", constant(1, 1, 1))};
    try {
        (void)reading_error(t, Scope::Grandmaster);
        FAIL() << "expected an empty-scope error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyScope);
    }
}

TEST(ReadingError, MissingGrandmaster)
{
    Topology t;
    t.nodes = {node("x"), node("y")};
    t.links = {link("x", "y", constant(1, 1, 1))};
    try {
        (void)reading_error(t, Scope::Grandmaster);
        FAIL() << "expected a configuration error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Configuration);
    }
}

TEST(Validate, RejectsStructuralErrors)
{
    Topology dup;
    dup.nodes = {node("x"), node("x")};
    EXPECT_THROW(dup.validate(), Error);

    Topology dangling;
    dangling.nodes = {node("x")};
    dangling.links = {link("x", "y", constant(1, 1, 1))};
    EXPECT_THROW(dangling.validate(), Error);

    Topology hostless;
    hostless.nodes = {node("v", NodeKind::VirtualEndpoint)};
    EXPECT_THROW(hostless.validate(), Error);

    EXPECT_NO_THROW(native().validate());
    EXPECT_NO_THROW(virtualized().validate());
}
