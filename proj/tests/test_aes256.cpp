//
// SPDX-License-Identifier: Apache-2.0
//
// Block cipher correctness. Known answers were produced with an independent
// oracle (openssl enc -aes-256-ecb) and frozen here; on top of that the
// suite cross-checks random inputs against libcrypto at run time and checks
// the branch-free S-box against a directly computed GF(2^8) reference.
//
#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "doctest.h"
#include "tessera/aes256.hpp"
#include "tessera/common.hpp"

using namespace tessera;

namespace {

std::array<std::uint8_t, 32> key_from_hex(const char* h) {
    Bytes b = from_hex(h);
    REQUIRE(b.size() == 32);
    std::array<std::uint8_t, 32> k{};
    std::copy(b.begin(), b.end(), k.begin());
    return k;
}

std::array<std::uint8_t, 16> block_from_hex(const char* h) {
    Bytes b = from_hex(h);
    REQUIRE(b.size() == 16);
    std::array<std::uint8_t, 16> x{};
    std::copy(b.begin(), b.end(), x.begin());
    return x;
}

// Reference ECB single-block encryption through libcrypto.
std::array<std::uint8_t, 16> openssl_ecb(const std::array<std::uint8_t, 32>& key,
                                         const std::array<std::uint8_t, 16>& pt) {
    std::array<std::uint8_t, 16> ct{};
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    REQUIRE(ctx != nullptr);
    REQUIRE(EVP_EncryptInit_ex(ctx, EVP_aes_256_ecb(), nullptr, key.data(), nullptr) == 1);
    EVP_CIPHER_CTX_set_padding(ctx, 0);
    int outl = 0;
    REQUIRE(EVP_EncryptUpdate(ctx, ct.data(), &outl, pt.data(), 16) == 1);
    REQUIRE(outl == 16);
    EVP_CIPHER_CTX_free(ctx);
    return ct;
}

// Log/antilog-free multiplicative inverse by brute force, for the S-box check.
std::uint8_t gf_mul_ref(std::uint8_t a, std::uint8_t b) {
    std::uint8_t p = 0;
    for (int i = 0; i < 8; ++i) {
        if (b & 1) p ^= a;
        std::uint8_t hi = a & 0x80;
        a = static_cast<std::uint8_t>(a << 1);
        if (hi) a ^= 0x1B;
        b >>= 1;
    }
    return p;
}

std::uint8_t sbox_ref(std::uint8_t x) {
    std::uint8_t inv = 0;
    if (x != 0) {
        for (int c = 1; c < 256; ++c) {
            if (gf_mul_ref(x, static_cast<std::uint8_t>(c)) == 1) {
                inv = static_cast<std::uint8_t>(c);
                break;
            }
        }
    }
    auto rotl = [](std::uint8_t v, int n) {
        return static_cast<std::uint8_t>((v << n) | (v >> (8 - n)));
    };
    return static_cast<std::uint8_t>(inv ^ rotl(inv, 1) ^ rotl(inv, 2) ^
                                     rotl(inv, 3) ^ rotl(inv, 4) ^ 0x63);
}

}  // namespace

TEST_CASE("sbox matches field-arithmetic reference for all 256 inputs") {
    for (int x = 0; x < 256; ++x)
        CHECK(aes_detail::sbox(static_cast<std::uint8_t>(x)) ==
              sbox_ref(static_cast<std::uint8_t>(x)));
    // Spot anchors.
    CHECK(aes_detail::sbox(0x00) == 0x63);
    CHECK(aes_detail::sbox(0x53) == 0xED);
}

TEST_CASE("packed S-box lanes are independent") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 256; ++trial) {
        std::uint64_t x = rng();
        std::uint64_t y = aes_detail::sub_bytes8(x);
        for (int lane = 0; lane < 8; ++lane) {
            auto b = static_cast<std::uint8_t>(x >> (8 * lane));
            CHECK(static_cast<std::uint8_t>(y >> (8 * lane)) == aes_detail::sbox(b));
        }
    }
}

TEST_CASE("frozen known-answer vectors") {
    struct Kat {
        const char* key;
        const char* pt;
        const char* ct;
    };
    // Captured from `openssl enc -aes-256-ecb -nopad` ahead of implementation.
    const Kat kats[] = {
        {"000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f",
         "00112233445566778899aabbccddeeff", "8ea2b7ca516745bfeafc49904b496089"},
        {"0000000000000000000000000000000000000000000000000000000000000000",
         "00000000000000000000000000000000", "dc95c078a2408989ad48a21492842087"},
        {"0000000000000000000000000000000000000000000000000000000000000000",
         "00000000000000000000000000000001", "530f8afbc74536b9a963b4f1c4cb738b"},
        {"0000000000000000000000000000000000000000000000000000000000000000",
         "00000000000000000000000000000002", "cea7403d4d606b6e074ec5d3baf39d18"},
        {"0000000000000000000000000000000000000000000000000000000000000003",
         "00000000000000000000000000000000", "bf701e7f51c292f1cc242a991578eb2a"},
        {"603deb1015ca71be2b73aef0857d77811f352c073b6108d72d9810a30914dff4",
         "6bc1bee22e409f96e93d7e117393172a", "f3eed1bdb5d2a03c064b5a7e3db181f8"},
        {"fedcba9876543210fedcba9876543210fedcba9876543210fedcba9876543210",
         "a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5", "2f9b4c1490aaefed3b4312e803cd4b5d"},
    };
    for (const auto& kat : kats) {
        Aes256 aes(key_from_hex(kat.key));
        CHECK(to_hex(aes.encrypt_block(block_from_hex(kat.pt))) == kat.ct);
    }
}

TEST_CASE("random cross-check against libcrypto") {
    std::mt19937_64 rng(0x5eed);
    for (int trial = 0; trial < 128; ++trial) {
        std::array<std::uint8_t, 32> key{};
        std::array<std::uint8_t, 16> pt{};
        for (auto& b : key) b = static_cast<std::uint8_t>(rng());
        for (auto& b : pt) b = static_cast<std::uint8_t>(rng());
        Aes256 aes(key);
        CHECK(aes.encrypt_block(pt) == openssl_ecb(key, pt));
    }
}

TEST_CASE("copies encrypt independently") {
    std::array<std::uint8_t, 32> key{};
    key[31] = 1;
    Aes256 a(key);
    Aes256 b = a;
    std::array<std::uint8_t, 16> pt{};
    CHECK(a.encrypt_block(pt) == b.encrypt_block(pt));
}
