//
// SPDX-License-Identifier: Apache-2.0
//
#include "tessera/common.hpp"

#include <openssl/rand.h>

#include <cstring>

namespace tessera {

const char* errc_name(Errc c) noexcept {
    switch (c) {
        case Errc::kMisaligned: return "Misaligned";
        case Errc::kCounterOverflow: return "CounterOverflow";
        case Errc::kKeyCleared: return "KeyCleared";
        case Errc::kUnsupportedKeySize: return "UnsupportedKeySize";
        case Errc::kRsaEncryptFailure: return "RsaEncryptFailure";
        case Errc::kOaepDecodeFailure: return "OaepDecodeFailure";
        case Errc::kAppBindingMismatch: return "AppBindingMismatch";
        case Errc::kNormalWorldDenied: return "NormalWorldDenied";
        case Errc::kAlreadyLocked: return "AlreadyLocked";
        case Errc::kBadPolicy: return "BadPolicy";
        case Errc::kIceNotProvisioned: return "IceNotProvisioned";
        case Errc::kNotRunning: return "NotRunning";
        case Errc::kBadState: return "BadState";
        case Errc::kSramOverflow: return "SramOverflow";
        case Errc::kBadMagic: return "BadMagic";
        case Errc::kBadVersion: return "BadVersion";
        case Errc::kTruncatedFile: return "TruncatedFile";
        case Errc::kBadFormat: return "BadFormat";
        case Errc::kNoZeroLine: return "NoZeroLine";
        case Errc::kInvalidArgument: return "InvalidArgument";
        case Errc::kIoError: return "IoError";
        case Errc::kCryptoInternal: return "CryptoInternal";
    }
    return "Unknown";
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

namespace {
int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0)
        throw BadFormatError("hex string has odd length");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = hex_nibble(hex[2 * i]);
        int lo = hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw BadFormatError("invalid hex digit");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

void secure_zero(void* p, std::size_t n) noexcept {
    volatile std::uint8_t* vp = static_cast<volatile std::uint8_t*>(p);
    for (std::size_t i = 0; i < n; ++i) vp[i] = 0;
}

Bytes random_bytes(std::size_t n) {
    Bytes out(n);
    if (n > 0 && RAND_bytes(out.data(), static_cast<int>(n)) != 1)
        throw CryptoInternalError("RAND_bytes failed");
    return out;
}

bool contains_window(std::span<const std::uint8_t> haystack,
                     std::span<const std::uint8_t> needle) noexcept {
    if (needle.empty() || haystack.size() < needle.size()) return false;
    const void* found = memmem(haystack.data(), haystack.size(),
                               needle.data(), needle.size());
    return found != nullptr;
}

std::uint16_t get_le16(const std::uint8_t* p) noexcept {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t get_le32(const std::uint8_t* p) noexcept {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint64_t get_le64(const std::uint8_t* p) noexcept {
    return static_cast<std::uint64_t>(get_le32(p)) |
           (static_cast<std::uint64_t>(get_le32(p + 4)) << 32);
}
void put_le16(std::uint8_t* p, std::uint16_t v) noexcept {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
}
void put_le32(std::uint8_t* p, std::uint32_t v) noexcept {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
    p[2] = static_cast<std::uint8_t>(v >> 16);
    p[3] = static_cast<std::uint8_t>(v >> 24);
}
void put_le64(std::uint8_t* p, std::uint64_t v) noexcept {
    put_le32(p, static_cast<std::uint32_t>(v));
    put_le32(p + 4, static_cast<std::uint32_t>(v >> 32));
}
std::uint32_t get_be32(const std::uint8_t* p) noexcept {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}
void put_be32(std::uint8_t* p, std::uint32_t v) noexcept {
    p[0] = static_cast<std::uint8_t>(v >> 24);
    p[1] = static_cast<std::uint8_t>(v >> 16);
    p[2] = static_cast<std::uint8_t>(v >> 8);
    p[3] = static_cast<std::uint8_t>(v);
}

}  // namespace tessera
