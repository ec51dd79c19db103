//
// SPDX-License-Identifier: Apache-2.0
//
// Packed weight image: the interchange format the packer emits and the
// loader/attack tooling consumes. One file = header + sealed key blob +
// line-aligned ciphertext. All multi-byte header integers little-endian.
//
// Layout:
//   0   magic "TSRA" (4 bytes)
//   4   version u16 (= 1)
//   6   flags u16 (bit 0 = fixed-counter demo, others reserved zero)
//   8   base_addr u64 (physical load address the counters were derived from)
//   16  plaintext_len u64 (logical length before zero padding)
//   24  h_app (32 bytes, SHA-256 of app certificate)
//   56  blob_len u16
//   58  key blob (blob_len bytes)
//   ..  zero pad to the next 64-byte boundary
//   ..  ciphertext, ceil(plaintext_len/64) lines of 64 bytes
//
#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "tessera/common.hpp"
#include "tessera/key_hierarchy.hpp"

namespace tessera {

inline constexpr char kImageMagic[4] = {'T', 'S', 'R', 'A'};
inline constexpr std::uint16_t kImageVersion = 1;
inline constexpr std::uint16_t kFlagFixedCounterDemo = 0x0001;
inline constexpr std::size_t kImageFixedHeaderBytes = 58;

struct WeightImageHeader {
    std::uint16_t version = 0;
    std::uint16_t flags = 0;
    std::uint64_t base_addr = 0;
    std::uint64_t plaintext_len = 0;
    std::array<std::uint8_t, 32> h_app{};
    KeyBlob blob;
    std::size_t ciphertext_offset = 0;

    bool fixed_counter_demo() const { return (flags & kFlagFixedCounterDemo) != 0; }
    std::uint64_t ciphertext_lines() const {
        return (plaintext_len + kLineBytes - 1) / kLineBytes;
    }
    std::uint64_t ciphertext_bytes() const {
        return ciphertext_lines() * kLineBytes;
    }
};

// Encrypts plaintext under a fresh k_msk/IV_base, seals the key to the
// device, and assembles the image. k_msk never leaves this function; the
// only copy survives inside the OAEP blob. base_addr must be line-aligned
// (counters are derived from absolute physical addresses).
// fixed_counter_demo reuses the address-0 keystream for every line; it
// exists so the attack harness can build the broken artifact.
Bytes pack_image(const Bytes& plaintext, const DeviceIdentity& device,
                 const AppIdentity& app, std::uint64_t base_addr,
                 bool fixed_counter_demo = false);

// Header decode with full validation. Throws BadMagicError, BadVersionError,
// TruncatedFileError, BadFormatError.
WeightImageHeader inspect_image(std::span<const std::uint8_t> image);
WeightImageHeader inspect_image(const Bytes& image);

std::span<const std::uint8_t> image_ciphertext(std::span<const std::uint8_t> image,
                                               const WeightImageHeader& header);

// Header report without key material (blob shown only by length).
std::string inspect_report(const WeightImageHeader& header);
std::string inspect_json(const WeightImageHeader& header);

}  // namespace tessera
