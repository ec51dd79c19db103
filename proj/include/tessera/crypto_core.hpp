//
// SPDX-License-Identifier: Apache-2.0
//
// Line-granular AES-256-CTR with address-derived counters.
//
// A 64-byte line at bus address A (64-aligned) is keyed by four counter
// blocks: the 12-byte nonce base followed by the big-endian 32-bit block
// index 4*(A/64)+j for j in 0..3. Counter uniqueness within one session is
// therefore a pure function of the address map: distinct lines can never
// share a counter, and the 32-bit index field caps one session at 64 GiB
// of addressable weights. Decryption is encryption (XOR with keystream).
//
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "tessera/aes256.hpp"
#include "tessera/common.hpp"

namespace tessera {

// First address whose line index no longer fits the 32-bit counter field.
inline constexpr std::uint64_t kCounterAddrLimit = 1ULL << 36;

// 256-bit session key (the model-set key k_msk). Zeroizable: after clear()
// the bytes read as zero and any attempt to key a cipher with it throws
// KeyClearedError. Lifetime is documented as externally serialized with use;
// clearing while a LineCipher still holds the schedule is the caller's bug.
class SessionKey {
public:
    static constexpr std::size_t kBytes = 32;

    SessionKey() : bytes_{}, cleared_(false) {}
    static SessionKey from_bytes(std::span<const std::uint8_t, kBytes> b);
    static SessionKey random();

    const std::array<std::uint8_t, kBytes>& bytes() const noexcept { return bytes_; }
    bool cleared() const noexcept { return cleared_; }
    void clear() noexcept;

    bool operator==(const SessionKey&) const = default;

private:
    std::array<std::uint8_t, kBytes> bytes_;
    bool cleared_;
};

// 96-bit public nonce base, fixed per packed image.
struct NonceBase {
    static constexpr std::size_t kBytes = 12;
    std::array<std::uint8_t, kBytes> bytes{};

    static NonceBase random();
    bool operator==(const NonceBase&) const = default;
};

struct CounterBlock {
    std::array<std::uint8_t, kAesBlockBytes> bytes{};
    bool operator==(const CounterBlock&) const = default;
};

using Line = std::array<std::uint8_t, kLineBytes>;

struct CacheLine {
    std::uint64_t addr = 0;  // 64-aligned bus address
    Line data{};
};

// The four counter blocks covering the line at `addr`.
// Throws MisalignedError unless addr is 64-aligned, CounterOverflowError at
// or beyond kCounterAddrLimit.
std::array<CounterBlock, kBlocksPerLine> derive_counters(const NonceBase& iv,
                                                         std::uint64_t addr);

// Bulk interface: key schedule expanded once, then per-line keystreams on
// demand. This is what the streaming pipeline uses.
class LineCipher {
public:
    LineCipher(const SessionKey& key, const NonceBase& iv);

    Line keystream(std::uint64_t addr) const;
    Line encrypt(const CacheLine& plaintext) const;
    Line decrypt(const CacheLine& ciphertext) const;

    // Deliberately broken mode for the counter-misuse demo: every line gets
    // the keystream of block indices 0..3 regardless of address.
    Line insecure_fixed_keystream() const;

    const NonceBase& iv() const noexcept { return iv_; }

private:
    Aes256 aes_;
    NonceBase iv_;
};

// One-shot conveniences (schedule recomputed per call).
Line line_keystream(const SessionKey& key, const NonceBase& iv, std::uint64_t addr);
Line encrypt_line(const SessionKey& key, const NonceBase& iv, const CacheLine& pt);
Line decrypt_line(const SessionKey& key, const NonceBase& iv, const CacheLine& ct);

}  // namespace tessera
