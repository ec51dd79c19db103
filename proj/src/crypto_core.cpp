//
// SPDX-License-Identifier: Apache-2.0
//
#include "tessera/crypto_core.hpp"

#include <cstring>

namespace tessera {

SessionKey SessionKey::from_bytes(std::span<const std::uint8_t, kBytes> b) {
    SessionKey k;
    std::memcpy(k.bytes_.data(), b.data(), kBytes);
    return k;
}

SessionKey SessionKey::random() {
    Bytes r = random_bytes(kBytes);
    SessionKey k;
    std::memcpy(k.bytes_.data(), r.data(), kBytes);
    secure_zero(r.data(), r.size());
    return k;
}

void SessionKey::clear() noexcept {
    secure_zero(bytes_.data(), bytes_.size());
    cleared_ = true;
}

NonceBase NonceBase::random() {
    Bytes r = random_bytes(kBytes);
    NonceBase n;
    std::memcpy(n.bytes.data(), r.data(), kBytes);
    return n;
}

std::array<CounterBlock, kBlocksPerLine> derive_counters(const NonceBase& iv,
                                                         std::uint64_t addr) {
    if (addr % kLineBytes != 0)
        throw MisalignedError("line address " + std::to_string(addr) +
                              " is not 64-byte aligned");
    if (addr >= kCounterAddrLimit)
        throw CounterOverflowError("address " + std::to_string(addr) +
                                   " exceeds the 32-bit block index space");
    const std::uint64_t line = addr / kLineBytes;
    std::array<CounterBlock, kBlocksPerLine> out{};
    for (std::size_t j = 0; j < kBlocksPerLine; ++j) {
        std::memcpy(out[j].bytes.data(), iv.bytes.data(), NonceBase::kBytes);
        put_be32(out[j].bytes.data() + NonceBase::kBytes,
                 static_cast<std::uint32_t>(kBlocksPerLine * line + j));
    }
    return out;
}

namespace {
std::span<const std::uint8_t, SessionKey::kBytes> usable_key(const SessionKey& key) {
    if (key.cleared())
        throw KeyClearedError("session key was zeroized");
    return std::span<const std::uint8_t, SessionKey::kBytes>(key.bytes());
}
}  // namespace

LineCipher::LineCipher(const SessionKey& key, const NonceBase& iv)
    : aes_(usable_key(key)), iv_(iv) {}

Line LineCipher::keystream(std::uint64_t addr) const {
    const auto counters = derive_counters(iv_, addr);
    Line ks;
    for (std::size_t j = 0; j < kBlocksPerLine; ++j)
        aes_.encrypt_block(counters[j].bytes.data(),
                           ks.data() + j * kAesBlockBytes);
    return ks;
}

Line LineCipher::encrypt(const CacheLine& plaintext) const {
    Line ks = keystream(plaintext.addr);
    Line out;
    for (std::size_t i = 0; i < kLineBytes; ++i)
        out[i] = static_cast<std::uint8_t>(plaintext.data[i] ^ ks[i]);
    return out;
}

Line LineCipher::decrypt(const CacheLine& ciphertext) const {
    // CTR: decrypt == encrypt.
    return encrypt(ciphertext);
}

Line LineCipher::insecure_fixed_keystream() const {
    return keystream(0);
}

Line line_keystream(const SessionKey& key, const NonceBase& iv, std::uint64_t addr) {
    return LineCipher(key, iv).keystream(addr);
}

Line encrypt_line(const SessionKey& key, const NonceBase& iv, const CacheLine& pt) {
    return LineCipher(key, iv).encrypt(pt);
}

Line decrypt_line(const SessionKey& key, const NonceBase& iv, const CacheLine& ct) {
    return LineCipher(key, iv).decrypt(ct);
}

}  // namespace tessera
