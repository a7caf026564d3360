#pragma once

#include <cstdint>

namespace hubqc {

// Deterministic splittable generator. All protocol randomness (pads, trap
// placement, measurement sampling, attacks) flows from one master seed so a
// session replays bit-exactly. Draws avoid std::uniform_* distributions,
// whose output is implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    int bit() { return static_cast<int>(next_u64() >> 63); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // rejection sampling keeps the draw unbiased
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) {
                return r % n;
            }
        }
    }

    // Independent stream derived from this generator's seed and a tag.
    // Splitting does not disturb the parent's sequence.
    Rng split(std::uint64_t tag) const { return Rng(mix(state_ ^ mix(tag ^ 0xd1b54a32d192ed03ull))); }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

} // namespace hubqc
