#pragma once

#include <cmath>
#include <cstdint>

namespace hgt {

// Bit-stable RNG kit. The standard distributions are implementation-defined,
// so replays would not be portable; these primitives are fixed forever.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t splitmix64_hash(std::uint64_t x) {
    return splitmix64_next(x);
}

// Seed for replica r derived from the base seed; decorrelated streams.
inline std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t replica) {
    return seed ^ splitmix64_hash(replica + 1);
}

class Xoshiro256pp {
  public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }

    std::uint64_t next() {
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

    // uniform double in [0,1) with 53 random bits
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // exponential waiting time by inverse CDF; rate > 0
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

}  // namespace hgt
