#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace pyramid {

// 64-bit avalanche finalizer (murmur3 fmix64 constants).
inline uint64_t mix64(uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

// Seeded hash of a byte string. Bytes are absorbed as little-endian 64-bit
// chunks so the value does not depend on host endianness.
inline uint64_t hash_key(uint64_t seed, std::string_view key) {
    const uint64_t m = 0xc6a4a7935bd1e995ULL;
    uint64_t h = seed ^ (static_cast<uint64_t>(key.size()) * m);
    const unsigned char* p = reinterpret_cast<const unsigned char*>(key.data());
    size_t n = key.size();
    while (n >= 8) {
        uint64_t k = static_cast<uint64_t>(p[0]) | static_cast<uint64_t>(p[1]) << 8 |
                     static_cast<uint64_t>(p[2]) << 16 | static_cast<uint64_t>(p[3]) << 24 |
                     static_cast<uint64_t>(p[4]) << 32 | static_cast<uint64_t>(p[5]) << 40 |
                     static_cast<uint64_t>(p[6]) << 48 | static_cast<uint64_t>(p[7]) << 56;
        k *= m;
        k ^= k >> 47;
        k *= m;
        h ^= k;
        h *= m;
        p += 8;
        n -= 8;
    }
    uint64_t tail = 0;
    for (size_t i = 0; i < n; ++i) tail |= static_cast<uint64_t>(p[i]) << (8 * i);
    h ^= tail;
    h *= m;
    return mix64(h);
}

}  // namespace pyramid
