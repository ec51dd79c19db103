//
// SPDX-License-Identifier: Apache-2.0
//
#include "tessera/aes256.hpp"

#include <cstring>

#include "tessera/common.hpp"

namespace tessera {
namespace {

constexpr std::uint64_t kLsb = 0x0101010101010101ULL;
constexpr std::uint64_t kMsb = 0x8080808080808080ULL;

// Per-lane carryless GF(2^8) multiply, reduction polynomial x^8+x^4+x^3+x+1.
// Branch-free: the conditional adds are realized as arithmetic masks.
// For a lane holding bit b at position 0, (b<<8)-b is 0xFF*b within that
// lane; the top lane wraps through 2^64 and still yields 0xFF*b there.
inline std::uint64_t gf_mul8(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t p = 0;
    for (int i = 0; i < 8; ++i) {
        std::uint64_t lsb = b & kLsb;
        p ^= a & ((lsb << 8) - lsb);
        std::uint64_t hi = (a & kMsb) >> 7;             // 0/1 per lane
        a = ((a << 1) & ~kLsb) ^ ((hi << 4) | (hi << 3) | (hi << 1) | hi);
        b = (b >> 1) & ~kMsb;
    }
    return p;
}

// x^254 = x^-1 over GF(2^8) (maps 0 to 0), via an 11-multiply chain.
inline std::uint64_t gf_inv8(std::uint64_t x) noexcept {
    std::uint64_t x2 = gf_mul8(x, x);
    std::uint64_t x3 = gf_mul8(x2, x);
    std::uint64_t x6 = gf_mul8(x3, x3);
    std::uint64_t x12 = gf_mul8(x6, x6);
    std::uint64_t x15 = gf_mul8(x12, x3);
    std::uint64_t x30 = gf_mul8(x15, x15);
    std::uint64_t x60 = gf_mul8(x30, x30);
    std::uint64_t x120 = gf_mul8(x60, x60);
    std::uint64_t x126 = gf_mul8(x120, x6);
    std::uint64_t x252 = gf_mul8(x126, x126);
    return gf_mul8(x252, x2);
}

template <int N>
inline std::uint64_t rotl8(std::uint64_t x) noexcept {
    constexpr std::uint64_t hi_mask = kLsb * ((0xFFu << N) & 0xFFu);
    constexpr std::uint64_t lo_mask = kLsb * (0xFFu >> (8 - N));
    return ((x << N) & hi_mask) | ((x >> (8 - N)) & lo_mask);
}

inline std::uint64_t affine8(std::uint64_t x) noexcept {
    return x ^ rotl8<1>(x) ^ rotl8<2>(x) ^ rotl8<3>(x) ^ rotl8<4>(x) ^
           (kLsb * 0x63u);
}

inline std::uint64_t load64(const std::uint8_t* p) noexcept {
    std::uint64_t v;
    std::memcpy(&v, p, 8);
    return v;
}

inline void store64(std::uint8_t* p, std::uint64_t v) noexcept {
    std::memcpy(p, &v, 8);
}

// Branch-free xtime on a single byte held in an unsigned int.
inline std::uint8_t xtime(std::uint8_t a) noexcept {
    return static_cast<std::uint8_t>((a << 1) ^ (0x1B & static_cast<std::uint8_t>(-(a >> 7))));
}

inline void sub_bytes_state(std::uint8_t s[16]) noexcept {
    store64(s, aes_detail::sub_bytes8(load64(s)));
    store64(s + 8, aes_detail::sub_bytes8(load64(s + 8)));
}

// State is the flat 16-byte block; FIPS column c occupies bytes 4c..4c+3.
inline void shift_rows(std::uint8_t s[16]) noexcept {
    std::uint8_t t[16];
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r)
            t[r + 4 * c] = s[r + 4 * ((c + r) & 3)];
    std::memcpy(s, t, 16);
}

inline void mix_columns(std::uint8_t s[16]) noexcept {
    for (int c = 0; c < 4; ++c) {
        std::uint8_t* col = s + 4 * c;
        std::uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
        std::uint8_t all = static_cast<std::uint8_t>(a0 ^ a1 ^ a2 ^ a3);
        col[0] = static_cast<std::uint8_t>(a0 ^ all ^ xtime(static_cast<std::uint8_t>(a0 ^ a1)));
        col[1] = static_cast<std::uint8_t>(a1 ^ all ^ xtime(static_cast<std::uint8_t>(a1 ^ a2)));
        col[2] = static_cast<std::uint8_t>(a2 ^ all ^ xtime(static_cast<std::uint8_t>(a2 ^ a3)));
        col[3] = static_cast<std::uint8_t>(a3 ^ all ^ xtime(static_cast<std::uint8_t>(a3 ^ a0)));
    }
}

inline void add_round_key(std::uint8_t s[16], const std::uint8_t* rk) noexcept {
    store64(s, load64(s) ^ load64(rk));
    store64(s + 8, load64(s + 8) ^ load64(rk + 8));
}

constexpr std::uint8_t kRcon[8] = {0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40};

}  // namespace

namespace aes_detail {

std::uint64_t sub_bytes8(std::uint64_t x) noexcept {
    return affine8(gf_inv8(x));
}

std::uint8_t sbox(std::uint8_t b) noexcept {
    return static_cast<std::uint8_t>(sub_bytes8(b) & 0xFF);
}

}  // namespace aes_detail

Aes256::Aes256(std::span<const std::uint8_t, kKeyBytes> key) {
    std::memcpy(round_keys_.data(), key.data(), kKeyBytes);
    for (std::size_t i = kKeyBytes; i < round_keys_.size(); i += 4) {
        std::uint8_t t[4] = {round_keys_[i - 4], round_keys_[i - 3],
                             round_keys_[i - 2], round_keys_[i - 1]};
        if (i % 32 == 0) {
            std::uint8_t t0 = t[0];
            t[0] = static_cast<std::uint8_t>(aes_detail::sbox(t[1]) ^ kRcon[i / 32]);
            t[1] = aes_detail::sbox(t[2]);
            t[2] = aes_detail::sbox(t[3]);
            t[3] = aes_detail::sbox(t0);
        } else if (i % 32 == 16) {
            for (auto& b : t) b = aes_detail::sbox(b);
        }
        for (int j = 0; j < 4; ++j)
            round_keys_[i + j] = static_cast<std::uint8_t>(round_keys_[i - 32 + j] ^ t[j]);
    }
}

Aes256::~Aes256() {
    secure_zero(round_keys_.data(), round_keys_.size());
}

void Aes256::encrypt_block(const std::uint8_t in[kBlockBytes],
                           std::uint8_t out[kBlockBytes]) const {
    std::uint8_t s[16];
    std::memcpy(s, in, 16);
    add_round_key(s, round_keys_.data());
    for (int r = 1; r < kRounds; ++r) {
        sub_bytes_state(s);
        shift_rows(s);
        mix_columns(s);
        add_round_key(s, round_keys_.data() + 16 * r);
    }
    sub_bytes_state(s);
    shift_rows(s);
    add_round_key(s, round_keys_.data() + 16 * kRounds);
    std::memcpy(out, s, 16);
    secure_zero(s, sizeof s);
}

std::array<std::uint8_t, Aes256::kBlockBytes> Aes256::encrypt_block(
    const std::array<std::uint8_t, kBlockBytes>& in) const {
    std::array<std::uint8_t, kBlockBytes> out;
    encrypt_block(in.data(), out.data());
    return out;
}

}  // namespace tessera
