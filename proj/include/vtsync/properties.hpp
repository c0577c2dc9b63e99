#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vtsync/topology.hpp"

namespace vtsync {

struct PropertyReport
{
    std::string name;
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::string counterexample;  // first failing case

    bool pass() const { return failures == 0; }
};

/// Randomized preemption traces: a DVC satisfies the virtual clock condition, a CVC
/// with preemptions violates succession with a step of exactly 1 - p at every resume,
/// and a CVC without preemptions equals the DVC pointwise. `assert_cvc_good` adds the
/// false claim that every CVC is good, as a negative control.
PropertyReport check_virtual_clock_properties(std::uint64_t seed, std::size_t iterations,
                                              bool assert_cvc_good = false);

/// Random connected topologies with up to 8 nodes, compared against brute-force
/// enumeration of simple paths and component-wise latency sums.
PropertyReport check_path_oracle(std::uint64_t seed, std::size_t iterations);

/// A random connected topology; exposed for tests.
Topology random_topology(std::uint64_t seed, std::size_t max_nodes = 8);

}  // namespace vtsync
