#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace pyramid {

// Self-contained SHA-256 (FIPS 180-4); snapshots carry a 32-byte digest.
class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    void update(const void* data, size_t len);
    std::array<uint8_t, 32> finish();

    static std::array<uint8_t, 32> digest(std::string_view data);

private:
    void process_block(const uint8_t* block);

    uint32_t state_[8];
    uint64_t total_len_ = 0;
    uint8_t buffer_[64];
    size_t buffer_len_ = 0;
};

std::string to_hex(const std::array<uint8_t, 32>& digest);

}  // namespace pyramid
