//
// SPDX-License-Identifier: Apache-2.0
//
// Constant-time AES-256 block encryption. No S-box or T-tables: SubBytes is
// computed per call as the GF(2^8) inversion x^254 via a fixed multiply chain
// plus the affine map, eight byte lanes at a time inside a uint64_t (SWAR).
// Control flow and memory access pattern are independent of key and data,
// which is the property the engine model needs from its keystream generator.
//
// Encryption only: CTR mode never runs the inverse cipher.
//
#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace tessera {

class Aes256 {
public:
    static constexpr std::size_t kKeyBytes = 32;
    static constexpr std::size_t kBlockBytes = 16;
    static constexpr int kRounds = 14;

    explicit Aes256(std::span<const std::uint8_t, kKeyBytes> key);
    ~Aes256();

    Aes256(const Aes256&) = default;
    Aes256& operator=(const Aes256&) = default;

    void encrypt_block(const std::uint8_t in[kBlockBytes],
                       std::uint8_t out[kBlockBytes]) const;

    std::array<std::uint8_t, kBlockBytes> encrypt_block(
        const std::array<std::uint8_t, kBlockBytes>& in) const;

private:
    // 15 round keys, 16 bytes each.
    std::array<std::uint8_t, kBlockBytes*(kRounds + 1)> round_keys_;
};

namespace aes_detail {
// Exposed for tests: branch-free S-box evaluation on eight packed byte lanes.
std::uint64_t sub_bytes8(std::uint64_t x) noexcept;
std::uint8_t sbox(std::uint8_t b) noexcept;
}  // namespace aes_detail

}  // namespace tessera
