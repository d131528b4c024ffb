#include "protosel/rng.hpp"

#include <cmath>

namespace protosel {

namespace {

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix(root);
    for (std::uint64_t p : path) h = mix(h ^ mix(p));
    return h;
}

double RandomStream::uniform() {
    // 53-bit mantissa in (0,1); zero is remapped to keep logs finite
    double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
}

double RandomStream::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
}

}  // namespace protosel
