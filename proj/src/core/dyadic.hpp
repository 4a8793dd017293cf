#pragma once

#include "core/errors.hpp"

#include <cstdint>
#include <vector>

namespace pyramid {

// One aligned block of 2^level windows: [first, first + 2^level - 1].
struct DyadicInterval {
    uint64_t first;
    uint64_t last;
    uint32_t level;

    bool operator==(const DyadicInterval&) const = default;
};

// Minimal set of aligned dyadic intervals exactly tiling [first, last].
// |cover| <= 2*log2(W) + 2 for a range of W windows.
inline std::vector<DyadicInterval> dyadic_cover(uint64_t first, uint64_t last) {
    if (first > last) throw ValueError("invalid window range");
    std::vector<DyadicInterval> cover;
    uint64_t i = first;
    while (i <= last) {
        uint32_t level = 0;
        // Largest aligned block starting at i that stays within the range.
        while (true) {
            uint64_t size = 1ULL << (level + 1);
            if (i % size != 0) break;
            if (i + size - 1 > last) break;
            ++level;
        }
        uint64_t size = 1ULL << level;
        cover.push_back({i, i + size - 1, level});
        i += size;
    }
    return cover;
}

}  // namespace pyramid
