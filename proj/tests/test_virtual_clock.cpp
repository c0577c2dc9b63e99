#include <gtest/gtest.h>

#include "vtsync/error.hpp"
#include "vtsync/virtual_clock.hpp"

using namespace vtsync;

namespace {

constexpr Picoseconds kG{1'000'000};

PreemptionSet preemptions(std::initializer_list<std::pair<Microtick, Microtick>> windows)
{
    PreemptionSet set;
    for (auto [a, b] : windows) set.append(a, b);
    return set;
}

ClockTrace host_trace(Microtick last, double rate = 1.0 + 5e-9)
{
    return make_trace(PhysicalClock("host", kG, DriftModel::constant(rate, 1.184e-8)), 0, last);
}

}  // namespace

TEST(ClockOffset, DiscontinuousKeepsStartOffset)
{
    const VirtualClock dvc("host", VirtualClockKind::Discontinuous, 30, preemptions({{40, 60}}));
    EXPECT_EQ(dvc.clock_offset(100), 30);
}

TEST(ClockOffset, ContinuousAddsCompletedPreemption)
{
    const VirtualClock cvc("host", VirtualClockKind::Continuous, 0, preemptions({{10, 15}}));
    EXPECT_EQ(cvc.clock_offset(20), 5);
    EXPECT_EQ(cvc.clock_offset(14), 0);  // not yet resumed
    EXPECT_EQ(cvc.clock_offset(15), 5);
}

TEST(ClockOffset, ContinuousSumsEveryCompletedPreemption)
{
    const std::vector<std::pair<Microtick, Microtick>> windows{{10, 15}, {40, 52}};
    const VirtualClock cvc("host", VirtualClockKind::Continuous, 7, preemptions({{10, 15}, {40, 52}}));
    EXPECT_EQ(cvc.clock_offset(100), 24);
    // Brute force: count host ticks spent preempted before each l.
    for (Microtick l = 7; l <= 100; ++l) {
        Microtick expected = 7;
        for (auto [a, b] : windows) {
            if (b <= l) expected += b - a;
        }
        EXPECT_EQ(cvc.clock_offset(l), expected) << "l=" << l;
    }
}

TEST(ClockOffset, BeforeStartIsAnError)
{
    const VirtualClock dvc("host", VirtualClockKind::Discontinuous, 30);
    try {
        (void)dvc.clock_offset(29);
        FAIL() << "expected a before-start error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BeforeStart);
    }
}

TEST(VirtualMicrotick, DiscontinuousSubtractsStart)
{
    const VirtualClock dvc("host", VirtualClockKind::Discontinuous, 30);
    EXPECT_EQ(dvc.virtual_microtick(100).value, 70);
}

TEST(VirtualMicrotick, ContinuousSkipsPreemption)
{
    const VirtualClock cvc("host", VirtualClockKind::Continuous, 0, preemptions({{10, 15}}));
    EXPECT_EQ(cvc.virtual_microtick(20).value, 15);
}

TEST(VirtualMicrotick, ContinuousFreezesDuringPreemption)
{
    const VirtualClock cvc("host", VirtualClockKind::Continuous, 0, preemptions({{10, 15}}));
    for (Microtick l : {11, 12, 14}) {
        const auto r = cvc.virtual_microtick(l);
        EXPECT_TRUE(r.frozen) << l;
        EXPECT_EQ(r.value, 10) << l;
    }
    EXPECT_FALSE(cvc.virtual_microtick(10).frozen);
}

TEST(Succession, DiscontinuousAlwaysHolds)
{
    const VirtualClock dvc("host", VirtualClockKind::Discontinuous, 3, preemptions({{10, 15}, {40, 52}}));
    EXPECT_TRUE(check_succession(dvc, 3, 100).holds);
}

TEST(Succession, ContinuousWithoutPreemptionHolds)
{
    const VirtualClock cvc("host", VirtualClockKind::Continuous, 0, preemptions({{50, 60}}));
    EXPECT_TRUE(check_succession(cvc, 0, 40).holds);
}

TEST(Succession, ContinuousDeficitAcrossResume)
{
    const VirtualClock cvc("host", VirtualClockKind::Continuous, 0, preemptions({{10, 15}}));
    const auto v = check_succession(cvc, 0, 30);
    ASSERT_FALSE(v.holds);
    ASSERT_EQ(v.violations.size(), 1u);
    // Evaluate nu on both sides of the resume boundary directly.
    const Microtick before = 14 - cvc.clock_offset(14);
    const Microtick after = 15 - cvc.clock_offset(15);
    EXPECT_EQ(after - before, -4);
    EXPECT_EQ(v.violations[0].at, 14);
    EXPECT_EQ(v.violations[0].step, -4);
}

TEST(Simultaneity, DiscontinuousTraceHolds)
{
    const auto host = host_trace(80);
    const VirtualClock dvc("host", VirtualClockKind::Discontinuous, 5, preemptions({{20, 30}}));
    EXPECT_TRUE(check_simultaneity(dvc, host));
}

TEST(Simultaneity, ContinuousOutsidePreemptionsHolds)
{
    const auto host = host_trace(80);
    const VirtualClock cvc("host", VirtualClockKind::Continuous, 5, preemptions({{20, 30}, {50, 51}}));
    EXPECT_TRUE(check_simultaneity(cvc, host));
}

TEST(Simultaneity, SkewedTraceIsDetected)
{
    const auto host = host_trace(80);
    const VirtualClock dvc("host", VirtualClockKind::Discontinuous, 5);
    auto skewed = make_virtual_trace(dvc, host);
    ASSERT_GT(skewed.samples.size(), 10u);
    for (auto& s : skewed.samples) s.time += kG;  // each virtual tick lands one host tick late
    EXPECT_FALSE(check_simultaneity(dvc, host, skewed));
}

TEST(VirtualClockCondition, DiscontinuousIsGood)
{
    const VirtualClock dvc("host", VirtualClockKind::Discontinuous, 5, preemptions({{20, 30}}));
    const auto v = virtual_clock_condition(dvc, host_trace(80), kG, 1.184e-8);
    EXPECT_TRUE(v.good);
    EXPECT_TRUE(v.succession.holds);
    EXPECT_TRUE(v.simultaneity);
}

TEST(VirtualClockCondition, PreemptedContinuousIsNotGood)
{
    const VirtualClock cvc("host", VirtualClockKind::Continuous, 5, preemptions({{20, 30}}));
    const auto v = virtual_clock_condition(cvc, host_trace(80), kG, 1.184e-8);
    EXPECT_FALSE(v.good);
    EXPECT_FALSE(v.succession.holds);
}

TEST(VirtualClockCondition, PinnedContinuousIsGood)
{
    const VirtualClock cvc("host", VirtualClockKind::Continuous, 5);
    EXPECT_TRUE(virtual_clock_condition(cvc, host_trace(80), kG, 1.184e-8).good);
}

TEST(VirtualClockCondition, BadHostIsUnsupported)
{
    const VirtualClock dvc("host", VirtualClockKind::Discontinuous, 0);
    try {
        (void)virtual_clock_condition(dvc, host_trace(80, 1.0 + 1e-3), kG, 1.184e-8);
        FAIL() << "expected an unsupported-precondition error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnsupportedPrecondition);
    }
}

TEST(PreemptionSet, RejectsOverlap)
{
    PreemptionSet set;
    set.append(10, 20);
    EXPECT_THROW(set.append(15, 25), Error);
    EXPECT_THROW(set.append(30, 30), Error);
}
