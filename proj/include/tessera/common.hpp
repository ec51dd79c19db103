//
// SPDX-License-Identifier: Apache-2.0
//
// Shared primitives: byte containers, error taxonomy, hex codecs and the
// process-wide CSPRNG handle. Every error that can escape the library derives
// from tessera::Error and carries an Errc; the CLI maps Errc values straight
// to process exit codes, so keep the numbering stable.
//
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tessera {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kLineBytes = 64;
inline constexpr std::size_t kAesBlockBytes = 16;
inline constexpr std::size_t kBlocksPerLine = kLineBytes / kAesBlockBytes;

// Stable error codes, doubling as CLI exit codes. Grouped by module in
// decades so a failing script can tell a crypto fault from a bus fault.
enum class Errc : int {
    kMisaligned = 10,
    kCounterOverflow = 11,
    kKeyCleared = 12,

    kUnsupportedKeySize = 20,
    kRsaEncryptFailure = 21,
    kOaepDecodeFailure = 22,
    kAppBindingMismatch = 23,

    kNormalWorldDenied = 30,
    kAlreadyLocked = 31,
    kBadPolicy = 32,

    kIceNotProvisioned = 40,
    kNotRunning = 41,
    kBadState = 42,
    kSramOverflow = 43,

    kBadMagic = 50,
    kBadVersion = 51,
    kTruncatedFile = 52,
    kBadFormat = 53,

    kNoZeroLine = 60,
    kInvalidArgument = 61,

    kIoError = 70,
    kCryptoInternal = 71,
};

const char* errc_name(Errc c) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }
    int exit_code() const noexcept { return static_cast<int>(code_); }

private:
    Errc code_;
};

#define TESSERA_DEFINE_ERROR(NAME, CODE)                                     \
    struct NAME : Error {                                                    \
        explicit NAME(const std::string& m) : Error(Errc::CODE, m) {}        \
    }

TESSERA_DEFINE_ERROR(MisalignedError, kMisaligned);
TESSERA_DEFINE_ERROR(CounterOverflowError, kCounterOverflow);
TESSERA_DEFINE_ERROR(KeyClearedError, kKeyCleared);
TESSERA_DEFINE_ERROR(UnsupportedKeySizeError, kUnsupportedKeySize);
TESSERA_DEFINE_ERROR(RsaEncryptError, kRsaEncryptFailure);
TESSERA_DEFINE_ERROR(OaepDecodeError, kOaepDecodeFailure);
TESSERA_DEFINE_ERROR(AppBindingMismatchError, kAppBindingMismatch);
TESSERA_DEFINE_ERROR(NormalWorldDeniedError, kNormalWorldDenied);
TESSERA_DEFINE_ERROR(AlreadyLockedError, kAlreadyLocked);
TESSERA_DEFINE_ERROR(BadPolicyError, kBadPolicy);
TESSERA_DEFINE_ERROR(IceNotProvisionedError, kIceNotProvisioned);
TESSERA_DEFINE_ERROR(NotRunningError, kNotRunning);
TESSERA_DEFINE_ERROR(BadStateError, kBadState);
TESSERA_DEFINE_ERROR(SramOverflowError, kSramOverflow);
TESSERA_DEFINE_ERROR(BadMagicError, kBadMagic);
TESSERA_DEFINE_ERROR(BadVersionError, kBadVersion);
TESSERA_DEFINE_ERROR(TruncatedFileError, kTruncatedFile);
TESSERA_DEFINE_ERROR(BadFormatError, kBadFormat);
TESSERA_DEFINE_ERROR(NoZeroLineError, kNoZeroLine);
TESSERA_DEFINE_ERROR(InvalidArgumentError, kInvalidArgument);
TESSERA_DEFINE_ERROR(IoError, kIoError);
TESSERA_DEFINE_ERROR(CryptoInternalError, kCryptoInternal);

#undef TESSERA_DEFINE_ERROR

std::string to_hex(std::span<const std::uint8_t> bytes);
Bytes from_hex(std::string_view hex);

// Best-effort zeroization that the optimizer may not elide.
void secure_zero(void* p, std::size_t n) noexcept;

// Process CSPRNG (OpenSSL RAND_bytes under the hood).
Bytes random_bytes(std::size_t n);

// True if `needle` occurs anywhere in `haystack` at byte granularity.
// Used by confinement audits scanning artifacts for raw key material.
bool contains_window(std::span<const std::uint8_t> haystack,
                     std::span<const std::uint8_t> needle) noexcept;

std::uint16_t get_le16(const std::uint8_t* p) noexcept;
std::uint32_t get_le32(const std::uint8_t* p) noexcept;
std::uint64_t get_le64(const std::uint8_t* p) noexcept;
void put_le16(std::uint8_t* p, std::uint16_t v) noexcept;
void put_le32(std::uint8_t* p, std::uint32_t v) noexcept;
void put_le64(std::uint8_t* p, std::uint64_t v) noexcept;
std::uint32_t get_be32(const std::uint8_t* p) noexcept;
void put_be32(std::uint8_t* p, std::uint32_t v) noexcept;

}  // namespace tessera
