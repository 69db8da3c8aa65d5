#pragma once

#include <cstdint>

namespace arnet {

// xoshiro256++ seeded through splitmix64. Platform-independent draws so that
// seeded runs produce byte-identical outputs everywhere. Independent streams
// for parallel replications come from distinct seeds (base seed + index).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : s_) word = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform double in [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double prob) { return uniform() < prob; }

    // uniform integer in [0, bound)
    std::uint64_t below(std::uint64_t bound) { return next_u64() % bound; }

  private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::uint64_t s_[4];
};

}  // namespace arnet
