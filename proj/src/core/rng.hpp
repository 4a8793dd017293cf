#pragma once

#include <cstdint>
#include <random>

namespace pyramid {

// splitmix64 step; used to derive independent seeds from a master seed.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
    uint64_t s = master ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

// Deterministic RNG stream. mt19937_64 is fully specified by the standard,
// and uniform01 uses raw bits, so sequences are identical across platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in (0,1): 53-bit mantissa, zero excluded so log() stays finite.
    double uniform01() {
        uint64_t bits = gen_() >> 11;
        double u = static_cast<double>(bits) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    uint64_t below(uint64_t n) { return gen_() % n; }

    Rng fork(uint64_t stream) {
        uint64_t s = gen_();
        return Rng(derive_seed(s, stream));
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace pyramid
