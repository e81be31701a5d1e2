#pragma once
// Minimal SHA-256 (FIPS 180-4), enough for content-addressed cache keys.
// No external crypto dependency; output is the usual 64-char lowercase hex.

#include <cstdint>
#include <string>
#include <string_view>

namespace hyrag {

class Sha256 {
public:
    Sha256();
    void update(const void* data, size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    // Finalizes and returns lowercase hex; the object must not be reused.
    std::string hex_digest();

private:
    void process_block(const uint8_t* block);

    uint32_t state_[8];
    uint64_t bitlen_ = 0;
    uint8_t buffer_[64];
    size_t buffer_len_ = 0;
};

std::string sha256_hex(std::string_view data);

} // namespace hyrag
