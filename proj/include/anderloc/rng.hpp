#pragma once

#include <cstdint>

namespace anderloc {

// Counter-based random stream: every draw is a pure function of
// (seed, stream, counter), so samples are reproducible regardless of the
// order in which they are generated or which thread generates them.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
        std::uint64_t h = mix(seed_ ^ 0x6c62272e07bb0142ULL);
        h = mix(h ^ stream);
        h = mix(h ^ counter);
        return h;
    }

    // uniform in [0,1), 53-bit resolution
    double uniform01(std::uint64_t stream, std::uint64_t counter) const {
        return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

} // namespace anderloc
