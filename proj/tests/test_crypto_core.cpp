// SPDX-License-Identifier: Apache-2.0
//
// Counter derivation and line cipher tests. The keystream oracle is
// OpenSSL's AES-256-CTR: same key, counter block = nonce || BE32(4*line).

#include <doctest.h>

#include <openssl/evp.h>

#include <cstring>
#include <random>
#include <set>

#include "tessera/crypto_core.hpp"

using namespace tessera;

namespace {

Line openssl_ctr_keystream(const std::array<std::uint8_t, 32>& key,
                           const NonceBase& iv, std::uint64_t addr) {
    std::uint8_t block[16];
    std::memcpy(block, iv.bytes.data(), 12);
    put_be32(block + 12, static_cast<std::uint32_t>(4 * (addr / kLineBytes)));

    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    REQUIRE(ctx != nullptr);
    REQUIRE(EVP_EncryptInit_ex(ctx, EVP_aes_256_ctr(), nullptr, key.data(),
                               block) == 1);
    Line zeros{};
    Line out{};
    int out_len = 0;
    REQUIRE(EVP_EncryptUpdate(ctx, out.data(), &out_len, zeros.data(),
                              static_cast<int>(zeros.size())) == 1);
    REQUIRE(out_len == static_cast<int>(out.size()));
    EVP_CIPHER_CTX_free(ctx);
    return out;
}

NonceBase test_iv() {
    NonceBase iv;
    for (std::size_t i = 0; i < iv.bytes.size(); ++i) {
        iv.bytes[i] = static_cast<std::uint8_t>(0xB0 + i);
    }
    return iv;
}

SessionKey test_key() {
    std::array<std::uint8_t, 32> kb{};
    for (std::size_t i = 0; i < kb.size(); ++i) {
        kb[i] = static_cast<std::uint8_t>(i * 7 + 1);
    }
    return SessionKey::from_bytes(kb);
}

}  // namespace

TEST_CASE("counter blocks are nonce || big-endian block index") {
    const NonceBase iv = test_iv();

    const auto at0 = derive_counters(iv, 0);
    const auto at64 = derive_counters(iv, 64);
    for (std::size_t j = 0; j < kBlocksPerLine; ++j) {
        CHECK(std::memcmp(at0[j].bytes.data(), iv.bytes.data(), 12) == 0);
        CHECK(get_be32(at0[j].bytes.data() + 12) == j);
        CHECK(get_be32(at64[j].bytes.data() + 12) == 4 + j);
    }

    const std::uint64_t addr = 0x280;  // line 10 -> indices 40..43
    const auto far = derive_counters(iv, addr);
    for (std::size_t j = 0; j < kBlocksPerLine; ++j) {
        CHECK(get_be32(far[j].bytes.data() + 12) == 40 + j);
    }
}

TEST_CASE("counter derivation rejects misaligned and out-of-range addresses") {
    const NonceBase iv = test_iv();
    for (std::uint64_t off : {1ULL, 7ULL, 32ULL, 63ULL}) {
        CHECK_THROWS_AS(derive_counters(iv, off), MisalignedError);
        CHECK_THROWS_AS(derive_counters(iv, 0x1000 + off), MisalignedError);
    }

    CHECK_THROWS_AS(derive_counters(iv, kCounterAddrLimit), CounterOverflowError);
    CHECK_THROWS_AS(derive_counters(iv, kCounterAddrLimit + 64),
                    CounterOverflowError);

    const auto last = derive_counters(iv, kCounterAddrLimit - kLineBytes);
    CHECK(get_be32(last[3].bytes.data() + 12) == 0xFFFFFFFFu);
}

TEST_CASE("counters are unique across an exhaustive 2^16-line sweep") {
    const NonceBase iv = test_iv();
    std::vector<std::uint32_t> indices;
    indices.reserve((1u << 16) * kBlocksPerLine);
    for (std::uint64_t line = 0; line < (1u << 16); ++line) {
        const auto blocks = derive_counters(iv, line * kLineBytes);
        for (const auto& b : blocks) {
            CHECK(std::memcmp(b.bytes.data(), iv.bytes.data(), 12) == 0);
            indices.push_back(get_be32(b.bytes.data() + 12));
        }
    }
    std::sort(indices.begin(), indices.end());
    CHECK(std::adjacent_find(indices.begin(), indices.end()) == indices.end());
}

TEST_CASE("keystream matches the OpenSSL AES-256-CTR oracle") {
    const SessionKey key = test_key();
    const NonceBase iv = test_iv();
    const LineCipher cipher(key, iv);

    std::mt19937_64 eng(2026);
    for (int i = 0; i < 64; ++i) {
        const std::uint64_t addr =
            (eng() % (kCounterAddrLimit / kLineBytes)) * kLineBytes;
        CHECK(cipher.keystream(addr) ==
              openssl_ctr_keystream(key.bytes(), iv, addr));
    }
    CHECK(cipher.keystream(0) == openssl_ctr_keystream(key.bytes(), iv, 0));
}

TEST_CASE("encrypt is XOR with the keystream; decrypt round-trips") {
    const SessionKey key = test_key();
    const NonceBase iv = test_iv();
    const LineCipher cipher(key, iv);

    std::mt19937_64 eng(7);
    for (int trial = 0; trial < 256; ++trial) {
        CacheLine pt;
        pt.addr = (eng() % (1u << 20)) * kLineBytes;
        for (auto& b : pt.data) b = static_cast<std::uint8_t>(eng());

        const Line ct = cipher.encrypt(pt);
        const Line ks = cipher.keystream(pt.addr);
        for (std::size_t i = 0; i < kLineBytes; ++i) {
            CHECK(ct[i] == (pt.data[i] ^ ks[i]));
        }
        CHECK(cipher.decrypt(CacheLine{pt.addr, ct}) == pt.data);
    }
}

TEST_CASE("relocated ciphertext never decrypts to the original plaintext") {
    const SessionKey key = test_key();
    const NonceBase iv = test_iv();
    const LineCipher cipher(key, iv);

    CacheLine pt;
    pt.addr = 0x1000;
    for (std::size_t i = 0; i < kLineBytes; ++i) {
        pt.data[i] = static_cast<std::uint8_t>(i ^ 0x5C);
    }
    const Line ct = cipher.encrypt(pt);

    std::mt19937_64 eng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        std::uint64_t alias = (eng() % (1u << 24)) * kLineBytes;
        if (alias == pt.addr) alias += kLineBytes;
        CHECK(cipher.decrypt(CacheLine{alias, ct}) != pt.data);
    }
    // identity remap is the control: same address, correct plaintext
    CHECK(cipher.decrypt(CacheLine{pt.addr, ct}) == pt.data);
}

TEST_CASE("distinct lines get distinct keystreams") {
    const LineCipher cipher(test_key(), test_iv());
    std::set<Line> seen;
    for (std::uint64_t line = 0; line < 512; ++line) {
        CHECK(seen.insert(cipher.keystream(line * kLineBytes)).second);
    }
}

TEST_CASE("fixed demo keystream is the address-0 keystream") {
    const LineCipher cipher(test_key(), test_iv());
    CHECK(cipher.insecure_fixed_keystream() == cipher.keystream(0));
}

TEST_CASE("session key zeroization") {
    SessionKey key = SessionKey::random();
    const NonceBase iv = test_iv();
    {
        const LineCipher ok(key, iv);  // usable before clear
        (void)ok;
    }
    key.clear();
    CHECK(key.cleared());
    for (auto b : key.bytes()) CHECK(b == 0);
    CHECK_THROWS_AS(LineCipher(key, iv), KeyClearedError);
    CHECK_THROWS_AS(line_keystream(key, iv, 0), KeyClearedError);
}

TEST_CASE("two random session keys differ and give different streams") {
    const SessionKey a = SessionKey::random();
    const SessionKey b = SessionKey::random();
    CHECK(a.bytes() != b.bytes());
    const NonceBase iv = test_iv();
    CHECK(LineCipher(a, iv).keystream(0) != LineCipher(b, iv).keystream(0));
}

TEST_CASE("one-shot helpers agree with the bulk cipher") {
    const SessionKey key = test_key();
    const NonceBase iv = test_iv();
    const LineCipher cipher(key, iv);

    CacheLine pt;
    pt.addr = 0x40;
    pt.data.fill(0x11);
    CHECK(line_keystream(key, iv, 0x40) == cipher.keystream(0x40));
    CHECK(encrypt_line(key, iv, pt) == cipher.encrypt(pt));
    const Line ct = cipher.encrypt(pt);
    CHECK(decrypt_line(key, iv, CacheLine{0x40, ct}) == pt.data);
}
