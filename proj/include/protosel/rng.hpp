#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace protosel {

// Counter-derived seeding: one root seed, children derived by hashing a path
// of integers. Streams are independent of thread scheduling, so replication
// sweeps give identical results at any worker count.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path);

// Wraps mt19937_64 with fully specified uniform/normal generation so that
// sample streams are bit-reproducible across platforms (std::normal_distribution
// is implementation-defined and must not be used here).
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

    // uniform on (0,1)
    double uniform();
    // standard normal via Box-Muller, second value cached
    double normal();

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace protosel
