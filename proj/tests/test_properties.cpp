#include <gtest/gtest.h>

#include "vtsync/properties.hpp"

using namespace vtsync;

TEST(Properties, VirtualClockSuitePasses)
{
    const auto r = check_virtual_clock_properties(1, 2'000);
    EXPECT_EQ(r.cases, 2'000u);
    EXPECT_TRUE(r.pass()) << r.counterexample;
}

TEST(Properties, NegativeControlFindsPreemption)
{
    const auto r = check_virtual_clock_properties(1, 500, true);
    EXPECT_FALSE(r.pass());
    EXPECT_NE(r.counterexample.find("preemptions=[ ("), std::string::npos) << r.counterexample;
}

TEST(Properties, PathOracleAgrees)
{
    const auto r = check_path_oracle(3, 1'000);
    EXPECT_TRUE(r.pass()) << r.counterexample;
}

TEST(Properties, RandomTopologiesAreConnectedAndValid)
{
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto t = random_topology(seed);
        ASSERT_NO_THROW(t.validate()) << seed;
        ASSERT_LE(t.nodes.size(), 8u);
        for (const auto& n : t.nodes) ASSERT_NO_THROW((void)t.shortest_path(t.nodes.front().id, n.id)) << seed;
    }
}
