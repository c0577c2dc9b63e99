#include <gtest/gtest.h>

#include "vtsync/error.hpp"
#include "vtsync/timebase.hpp"

using namespace vtsync;

namespace {

constexpr Picoseconds kMicro{1'000'000};

PhysicalClock clock_at(double rate, double r_max = 1.184e-8)
{
    return PhysicalClock("c", kMicro, DriftModel::constant(rate, r_max));
}

// Builds a trace from explicit (tick, ps) pairs.
ClockTrace trace_of(std::initializer_list<std::pair<Microtick, std::int64_t>> samples)
{
    ClockTrace t{"c", {}};
    for (auto [l, ps] : samples) t.samples.push_back({l, ref_time(ps)});
    return t;
}

}  // namespace

TEST(TickTime, ZeroDriftIsLinear)
{
    EXPECT_EQ(clock_at(1.0).tick_time(5), ref_time(5'000'000));
}

TEST(TickTime, MaximumDriftOverOneSecond)
{
    const auto clock = clock_at(1.0 + 1.184e-8);
    EXPECT_EQ(clock.tick_time(1'000'000), ref_time(1'000'000'000'000 + 11'840));

    // Independent check: add the exact per-tick duration one tick at a time.
    const __int128 per_tick = static_cast<__int128>(kMicro.count()) * clock.drift().rates.front().rate.fixed();
    __int128 acc = 0;
    for (int l = 0; l < 1'000'000; ++l) acc += per_tick;
    EXPECT_EQ(clock.tick_time(1'000'000).time_since_epoch().count(),
              static_cast<std::int64_t>(div_round_half_up(acc, DriftRate::kScale)));
}

TEST(TickTime, EpochShiftsEveryTick)
{
    const PhysicalClock clock("c", kMicro, DriftModel::constant(1.0, 0.0), ref_time(250));
    EXPECT_EQ(clock.tick_time(0), ref_time(250));
    EXPECT_EQ(clock.tick_time(3), ref_time(3'000'250));
}

TEST(TickTime, RejectsEmptyDriftModel)
{
    DriftModel empty;
    empty.rates.clear();
    try {
        PhysicalClock("c", kMicro, empty);
        FAIL() << "expected a configuration error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Configuration);
    }
}

TEST(Timestamp, FloorsBetweenTicks)
{
    EXPECT_EQ(clock_at(1.0).timestamp(ref_time(5'500'000)), 5);
}

TEST(Timestamp, TickBoundaryIsInclusive)
{
    EXPECT_EQ(clock_at(1.0).timestamp(ref_time(5'000'000)), 5);
    EXPECT_EQ(clock_at(1.0).timestamp(ref_time(4'999'999)), 4);
}

TEST(Timestamp, InvertsFastClock)
{
    const auto clock = clock_at(1.0 + 1e-6, 1e-6);
    const auto t = ref_time(1'000'000'000'000);
    const auto l = clock.timestamp(t);
    EXPECT_EQ(l, 999'999);
    EXPECT_LE(clock.tick_time(l), t);
    EXPECT_GT(clock.tick_time(l + 1), t);
}

TEST(Timestamp, BeforeEpochIsAnError)
{
    const PhysicalClock clock("c", kMicro, DriftModel::constant(1.0, 0.0), ref_time(10));
    try {
        (void)clock.timestamp(ref_time(9));
        FAIL() << "expected a pre-epoch error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::PreEpoch);
    }
}

TEST(Timestamp, LocalTimeIsGranularityTimesTick)
{
    EXPECT_EQ(clock_at(1.0).local_time(ref_time(7'200'000)), Picoseconds{7'000'000});
}

TEST(DriftRate, NominalInterval)
{
    EXPECT_DOUBLE_EQ(drift_rate(trace_of({{0, 0}, {1, 1'000'000}}), 0, kMicro), 1.0);
}

TEST(DriftRate, LongInterval)
{
    EXPECT_DOUBLE_EQ(drift_rate(trace_of({{0, 0}, {1, 1'000'012}}), 0, kMicro), 1.000012);
}

TEST(DriftRate, MissingSampleIsATraceError)
{
    try {
        (void)drift_rate(trace_of({{0, 0}, {1, 1'000'000}}), 1, kMicro);
        FAIL() << "expected a trace error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Trace);
    }
}

TEST(DriftRate, GeneratedTraceStaysWithinBound)
{
    // Per-tick intervals are integer picoseconds, so each one is within the bound up to
    // one picosecond of rounding.
    const double r_max = 1.184e-8;
    const auto trace = make_trace(clock_at(1.0 + r_max), 0, 5'000);
    const double slack = 1.0 / static_cast<double>(kMicro.count());
    for (Microtick l = 0; l < 5'000; ++l) {
        const double r = drift_rate(trace, l, kMicro);
        EXPECT_GE(r, 1.0 - r_max - slack);
        EXPECT_LE(r, 1.0 + r_max + slack);
    }
    // Over the whole trace the rounding vanishes and the rate is recovered.
    const auto span = trace.samples.back().time - trace.samples.front().time;
    EXPECT_NEAR(static_cast<double>(span.count()) / (5'000.0 * 1e6), 1.0 + r_max, 1.0 / (5'000.0 * 1e6));
}

TEST(GoodClock, NominalTraceIsGoodForAnyBound)
{
    const auto trace = make_trace(clock_at(1.0, 0.0), 0, 100);
    EXPECT_TRUE(is_good_clock(trace, kMicro, 0.0));
    EXPECT_TRUE(is_good_clock(trace, kMicro, 1e-3));
}

TEST(GoodClock, OneFastIntervalFails)
{
    const double r_max = 1e-3;
    auto trace = trace_of({{0, 0}, {1, 1'000'000}, {2, 2'000'000 + 2'000}, {3, 3'002'000}});
    EXPECT_FALSE(is_good_clock(trace, kMicro, r_max));
}

TEST(GoodClock, RateOutsideBoundIsRejected)
{
    // 2e-8 of a 1 us tick is 0.02 ps, below the reference resolution, so the violation is
    // observed over intervals of 10^6 ticks.
    const auto clock = clock_at(1.0 - 2e-8);
    ClockTrace sparse{"c", {}};
    for (Microtick l = 0; l <= 3'000'000; l += 1'000'000) sparse.samples.push_back({l, clock.tick_time(l)});
    EXPECT_FALSE(is_good_clock(sparse, kMicro, 1.184e-8));

    const auto within = clock_at(1.0 - 1e-8);
    ClockTrace ok{"c", {}};
    for (Microtick l = 0; l <= 3'000'000; l += 1'000'000) ok.samples.push_back({l, within.tick_time(l)});
    EXPECT_TRUE(is_good_clock(ok, kMicro, 1.184e-8));
}

TEST(GoodClock, GeneratorWithinBoundIsAccepted)
{
    for (double rate : {1.0 + 1.184e-8, 1.0 - 1.184e-8, 1.0 + 3e-9}) {
        EXPECT_TRUE(is_good_clock(make_trace(clock_at(rate), 0, 2'000), kMicro, 1.184e-8)) << rate;
    }
}

TEST(GoodClock, NonIncreasingSamplesAreATraceError)
{
    try {
        (void)is_good_clock(trace_of({{0, 0}, {0, 1'000'000}}), kMicro, 0.0);
        FAIL() << "expected a trace error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Trace);
    }
}

TEST(DriftModel, RespectsBound)
{
    EXPECT_TRUE(DriftModel::constant(1.0 + 1e-8, 1.184e-8).respects_bound());
    EXPECT_FALSE(DriftModel::constant(1.0 - 2e-8, 1.184e-8).respects_bound());
}
