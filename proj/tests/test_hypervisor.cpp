#include <gtest/gtest.h>

#include "vtsync/error.hpp"
#include "vtsync/hypervisor.hpp"
#include "vtsync/timebase.hpp"
#include "vtsync/virtual_clock.hpp"

using namespace vtsync;

namespace {

SchedulerPolicy round_robin(std::vector<std::pair<std::string, int>> map, Picoseconds quantum = ms(1))
{
    SchedulerPolicy p;
    p.kind = SchedulerPolicy::Kind::QuantumRoundRobin;
    p.quantum = quantum;
    p.vcpu_map = std::move(map);
    return p;
}

HypervisorConfig software(LatencyRange vme, LatencyRange sched, LatencyRange vn)
{
    return {vme, sched, vn, Timestamping::SoftwareInVm};
}

TimeWindow window(std::int64_t from_ms, std::int64_t to_ms)
{
    return {RefTime{ms(from_ms)}, RefTime{ms(to_ms)}};
}

}  // namespace

TEST(Preemptions, PinnedIsEmpty)
{
    SchedulerPolicy p;
    p.vcpu_map = {{"a", 0}, {"b", 1}};
    EXPECT_TRUE(generate_preemptions(p, "a", sec(10), 1).empty());
}

TEST(Preemptions, PinnedSharingIsAConfigurationError)
{
    SchedulerPolicy p;
    p.vcpu_map = {{"a", 0}, {"b", 0}};
    try {
        (void)generate_preemptions(p, "a", ms(4), 1);
        FAIL() << "expected a configuration error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Configuration);
    }
}

TEST(Preemptions, TwoVcpusAlternate)
{
    const auto w = generate_preemptions(round_robin({{"a", 0}, {"b", 0}}), "a", ms(4), 1);
    EXPECT_EQ(w, (std::vector<TimeWindow>{window(1, 2), window(3, 4)}));
}

TEST(Preemptions, SecondVcpuRunsWhileFirstIsPreempted)
{
    const auto w = generate_preemptions(round_robin({{"a", 0}, {"b", 0}}), "b", ms(4), 1);
    EXPECT_EQ(w, (std::vector<TimeWindow>{window(0, 1), window(2, 3)}));
}

TEST(Preemptions, UncontendedIsEmpty)
{
    EXPECT_TRUE(generate_preemptions(round_robin({{"a", 0}}), "a", sec(1), 1).empty());
    EXPECT_TRUE(generate_preemptions(round_robin({{"a", 0}, {"b", 1}}), "a", sec(1), 1).empty());
}

TEST(Preemptions, DeterministicForSeed)
{
    auto p = round_robin({{"a", 0}, {"b", 0}, {"c", 0}});
    p.phase_jitter = us(700);
    EXPECT_EQ(generate_preemptions(p, "a", ms(50), 9), generate_preemptions(p, "a", ms(50), 9));
}

TEST(Preemptions, IdleCoRunnerShortensWindows)
{
    auto p = round_robin({{"a", 0}, {"b", 0}});
    p.load_profile["b"] = {{RefTime{}, 0.25}};
    const auto w = generate_preemptions(p, "a", ms(3), 1);
    ASSERT_FALSE(w.empty());
    EXPECT_EQ(w.front().resume - w.front().preempt, us(250));
}

TEST(Preemptions, LoadChangeRestartsRotation)
{
    auto p = round_robin({{"a", 0}, {"b", 0}});
    p.load_profile["b"] = {{RefTime{}, 0.5}, {RefTime{ms(3)}, 1.0}};
    const auto w = generate_preemptions(p, "a", ms(6), 1);
    // 0.5 ms windows per 1.5 ms round before the change, 1 ms per 2 ms round after it.
    const std::vector<TimeWindow> expected{{RefTime{ms(1)}, RefTime{us(1500)}},
                                           {RefTime{us(2500)}, RefTime{ms(3)}},
                                           window(4, 5)};
    EXPECT_EQ(w, expected);
}

TEST(VcpuSchedule, NextRunningSkipsPreemption)
{
    const VcpuSchedule s(round_robin({{"a", 0}, {"b", 0}}), 1);
    EXPECT_EQ(s.next_running("a", RefTime{us(500)}), RefTime{us(500)});
    EXPECT_EQ(s.next_running("a", RefTime{us(1500)}), RefTime{ms(2)});
    ASSERT_TRUE(s.preemption_at("a", RefTime{us(1500)}).has_value());
    EXPECT_EQ(*s.preemption_at("a", RefTime{us(1500)}), window(1, 2));
    EXPECT_FALSE(s.preemption_at("a", RefTime{us(2500)}).has_value());
}

TEST(VcpuSchedule, InterferenceCountsProfiledVmsOnly)
{
    auto p = round_robin({{"cs", 0}, {"bg", 0}, {"m", 1}});
    p.load_profile["bg"] = {{RefTime{}, 0.1}, {RefTime{sec(10)}, 1.0}};
    EXPECT_DOUBLE_EQ(p.interference("m", RefTime{sec(1)}), 0.1);
    EXPECT_DOUBLE_EQ(p.interference("m", RefTime{sec(11)}), 1.0);
    EXPECT_DOUBLE_EQ(p.interference("bg", RefTime{sec(11)}), 0.0);
}

TEST(Preemptions, MapToHostMicroticks)
{
    const PhysicalClock host("h", us(1), DriftModel::constant(1.0, 0.0));
    const auto set = to_host_preemptions({window(1, 2), window(3, 4)}, host);
    ASSERT_EQ(set.records().size(), 2u);
    EXPECT_EQ(set.records()[0].preempt, 1000);
    EXPECT_EQ(set.records()[0].resume, 2000);
    EXPECT_EQ(set.records()[1].duration(), 1000);
}

TEST(HvBounds, SoftwareSumsMaxima)
{
    const auto cfg = software(LatencyRange::between(ps(0), ms(1)), LatencyRange::between(ps(0), ms(1)),
                              LatencyRange::between(us(10), ms(2)));
    const auto b = hv_latency_bounds(cfg);
    EXPECT_EQ(b.min, us(10));
    EXPECT_EQ(b.max, ms(4));
}

TEST(HvBounds, PassthroughIsZero)
{
    auto cfg = software(LatencyRange::between(ps(0), ms(1)), LatencyRange::between(ps(0), ms(1)),
                        LatencyRange::between(us(10), ms(2)));
    cfg.timestamping = Timestamping::HardwarePassthrough;
    const auto b = hv_latency_bounds(cfg);
    EXPECT_EQ(b.min, ps(0));
    EXPECT_EQ(b.max, ps(0));
    const auto n = cfg.normalized();
    EXPECT_EQ(n.vn, LatencyRange::zero());
}

TEST(HvBounds, SingleSchedulingTerm)
{
    const auto b = hv_latency_bounds(software({}, LatencyRange::between(ps(0), us(5)), {}));
    EXPECT_EQ(b.min, ps(0));
    EXPECT_EQ(b.max, us(5));
}

TEST(HvBounds, NonZeroExitMinimumIsRejected)
{
    const auto cfg = software(LatencyRange::between(ps(1), ms(1)), {}, {});
    EXPECT_THROW((void)cfg.normalized(), Error);
}

TEST(HvSample, PassthroughIsZero)
{
    Rng rng(3);
    HypervisorConfig cfg;
    cfg.timestamping = Timestamping::HardwarePassthrough;
    cfg.vn = LatencyRange::between(us(1), us(2));
    EXPECT_EQ(sample_hv_latency(cfg, rng), ps(0));
}

TEST(HvSample, StaysWithinBounds)
{
    const auto cfg = software(LatencyRange::between(ps(0), ms(1)), LatencyRange::between(ps(0), ms(1)),
                              LatencyRange::between(us(10), ms(2)));
    const auto b = hv_latency_bounds(cfg);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        for (int i = 0; i < 500; ++i) {
            const auto v = sample_hv_latency(cfg, rng);
            ASSERT_GE(v, b.min);
            ASSERT_LE(v, b.max);
        }
    }
}

TEST(HvSample, ConstantDistribution)
{
    Rng rng(1);
    const LatencyRange seven{us(7), us(7), LatencyDistribution::Constant};
    EXPECT_EQ(sample_hv_latency(software({}, {}, seven), rng), us(7));
}

TEST(LatencyRange, LoadShiftsUpperEnd)
{
    const auto r = LatencyRange::between(ps(0), ns(100));
    Rng rng(5);
    Picoseconds light_max{0}, heavy_max{0};
    for (int i = 0; i < 2000; ++i) {
        light_max = std::max(light_max, sample_under_load(r, rng, 0.0));
        heavy_max = std::max(heavy_max, sample_under_load(r, rng, 1.0));
    }
    EXPECT_LE(light_max, ns(25));
    EXPECT_GT(heavy_max, ns(90));
    EXPECT_LE(heavy_max, ns(100));
}

TEST(LatencyRange, Validation)
{
    EXPECT_THROW(LatencyRange::between(ns(5), ns(4)).validate("x"), Error);
    EXPECT_THROW((LatencyRange{ns(1), ns(2), LatencyDistribution::Constant}.validate("x")), Error);
    EXPECT_NO_THROW(LatencyRange::between(ns(4), ns(4)).validate("x"));
}
