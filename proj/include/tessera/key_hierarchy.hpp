//
// SPDX-License-Identifier: Apache-2.0
//
// Provisioning chain: the model-set key travels from packer to device sealed
// under RSAES-OAEP (SHA-256, MGF1-SHA-256, empty label) to the device public
// key, with the 64-byte payload k_msk || SHA-256(app certificate). Only the
// enclave holds the private half; unsealing verifies the caller's app hash
// in constant time before any key byte reaches the engine registers.
//
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tessera/common.hpp"
#include "tessera/crypto_core.hpp"
#include "tessera/ice_registers.hpp"

struct evp_pkey_st;  // OpenSSL EVP_PKEY, kept out of public headers

namespace tessera {

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);

// An inference application, identified by its (opaque) certificate bytes.
struct AppIdentity {
    Bytes certificate;

    AppIdentity() = default;
    explicit AppIdentity(Bytes cert) : certificate(std::move(cert)) {}
    explicit AppIdentity(std::string_view cert)
        : certificate(cert.begin(), cert.end()) {}

    std::array<std::uint8_t, 32> app_hash() const { return sha256(certificate); }
};

namespace detail {
struct EvpPkeyDeleter {
    void operator()(::evp_pkey_st* p) const noexcept;
};
using EvpPkeyPtr = std::unique_ptr<::evp_pkey_st, EvpPkeyDeleter>;
EvpPkeyPtr dup_pkey(::evp_pkey_st* p);
}  // namespace detail

// Public half of the device RSA identity. Freely copyable and exportable.
class DeviceIdentity {
public:
    unsigned bits() const noexcept { return bits_; }
    std::string to_pem() const;
    static DeviceIdentity from_pem(const std::string& pem);

    // SHA-256 over the DER SubjectPublicKeyInfo, for display and logs.
    std::array<std::uint8_t, 32> fingerprint() const;

    DeviceIdentity(const DeviceIdentity&);
    DeviceIdentity& operator=(const DeviceIdentity&);
    DeviceIdentity(DeviceIdentity&&) noexcept = default;
    DeviceIdentity& operator=(DeviceIdentity&&) noexcept = default;
    ~DeviceIdentity() = default;

    ::evp_pkey_st* handle() const noexcept { return pkey_.get(); }

private:
    friend class EnclaveState;
    DeviceIdentity(detail::EvpPkeyPtr pk, unsigned bits)
        : pkey_(std::move(pk)), bits_(bits) {}

    detail::EvpPkeyPtr pkey_;
    unsigned bits_ = 0;
};

// Sealed key blob as carried inside a packed weight image.
// Layout (little-endian): version u16, rsa_bits u16, iv 12 bytes, then the
// OAEP ciphertext of rsa_bits/8 bytes.
struct KeyBlob {
    static constexpr std::uint16_t kVersion = 1;

    std::uint16_t version = kVersion;
    std::uint16_t rsa_bits = 0;
    NonceBase iv;
    Bytes oaep_ciphertext;

    std::size_t serialized_size() const noexcept {
        return 2 + 2 + NonceBase::kBytes + oaep_ciphertext.size();
    }
    Bytes serialize() const;
    static KeyBlob deserialize(std::span<const std::uint8_t> data);
};

struct ProvisionReceipt {
    std::uint64_t sequence = 0;
    std::uint16_t rsa_bits = 0;
    std::array<std::uint8_t, 32> h_app{};
    NonceBase iv;
};

// Security-enclave model: owns the device private key and is the only writer
// of ICE key registers. Simulated fuse storage via unencrypted PEM.
class EnclaveState {
public:
    // bits must be 2048 or 4096, else UnsupportedKeySizeError.
    static EnclaveState generate(unsigned bits);

    DeviceIdentity device_public() const;
    unsigned bits() const noexcept { return bits_; }

    // Decrypts the blob, checks the app binding, and loads the engine
    // registers. Throws OaepDecodeError on any decryption failure (including
    // a malformed payload) and AppBindingMismatchError when the embedded
    // hash is not SHA-256 of the caller certificate; registers are untouched
    // on every failure path.
    ProvisionReceipt unseal_and_provision(const KeyBlob& blob,
                                          const AppIdentity& caller,
                                          IceRegisters& regs);

    const std::vector<ProvisionReceipt>& provisioning_log() const noexcept {
        return log_;
    }

    std::string to_pem() const;
    static EnclaveState from_pem(const std::string& pem);

private:
    EnclaveState(detail::EvpPkeyPtr sk, unsigned bits)
        : pkey_(std::move(sk)), bits_(bits) {}

    detail::EvpPkeyPtr pkey_;
    unsigned bits_ = 0;
    std::vector<ProvisionReceipt> log_;
};

EnclaveState generate_device_identity(unsigned bits);

// Packer-side sealing. Throws RsaEncryptError if the OAEP encryption fails.
KeyBlob seal_model_key(const DeviceIdentity& device, const SessionKey& k_msk,
                       const AppIdentity& app, const NonceBase& iv);

}  // namespace tessera
