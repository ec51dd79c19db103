//
// SPDX-License-Identifier: Apache-2.0
//
#include "tessera/key_hierarchy.hpp"

#include <openssl/bio.h>
#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/rsa.h>
#include <openssl/x509.h>

#include <cstring>

namespace tessera {

namespace detail {

void EvpPkeyDeleter::operator()(evp_pkey_st* p) const noexcept {
    EVP_PKEY_free(p);
}

EvpPkeyPtr dup_pkey(evp_pkey_st* p) {
    if (p != nullptr && EVP_PKEY_up_ref(p) != 1)
        throw CryptoInternalError("EVP_PKEY_up_ref failed");
    return EvpPkeyPtr(p);
}

}  // namespace detail

namespace {

using detail::EvpPkeyPtr;

struct CtxDeleter {
    void operator()(EVP_PKEY_CTX* c) const noexcept { EVP_PKEY_CTX_free(c); }
};
using CtxPtr = std::unique_ptr<EVP_PKEY_CTX, CtxDeleter>;

struct BioDeleter {
    void operator()(BIO* b) const noexcept { BIO_free(b); }
};
using BioPtr = std::unique_ptr<BIO, BioDeleter>;

constexpr std::size_t kPayloadBytes = SessionKey::kBytes + 32;

void set_oaep_sha256(EVP_PKEY_CTX* ctx) {
    if (EVP_PKEY_CTX_set_rsa_padding(ctx, RSA_PKCS1_OAEP_PADDING) <= 0 ||
        EVP_PKEY_CTX_set_rsa_oaep_md(ctx, EVP_sha256()) <= 0 ||
        EVP_PKEY_CTX_set_rsa_mgf1_md(ctx, EVP_sha256()) <= 0)
        throw CryptoInternalError("failed to configure OAEP parameters");
}

unsigned key_bits(EVP_PKEY* p) {
    return static_cast<unsigned>(EVP_PKEY_bits(p));
}

std::string pem_from_writer(int (*writer)(BIO*, EVP_PKEY*), EVP_PKEY* key) {
    BioPtr bio(BIO_new(BIO_s_mem()));
    if (!bio || writer(bio.get(), key) != 1)
        throw CryptoInternalError("PEM serialization failed");
    char* data = nullptr;
    long len = BIO_get_mem_data(bio.get(), &data);
    return std::string(data, static_cast<std::size_t>(len));
}

int write_pubkey(BIO* b, EVP_PKEY* k) { return PEM_write_bio_PUBKEY(b, k); }
int write_privkey(BIO* b, EVP_PKEY* k) {
    return PEM_write_bio_PrivateKey(b, k, nullptr, nullptr, 0, nullptr, nullptr);
}

}  // namespace

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
    std::array<std::uint8_t, 32> out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(),
                   nullptr) != 1 ||
        len != out.size())
        throw CryptoInternalError("SHA-256 failed");
    return out;
}

DeviceIdentity::DeviceIdentity(const DeviceIdentity& other)
    : pkey_(detail::dup_pkey(other.pkey_.get())), bits_(other.bits_) {}

DeviceIdentity& DeviceIdentity::operator=(const DeviceIdentity& other) {
    if (this != &other) {
        pkey_ = detail::dup_pkey(other.pkey_.get());
        bits_ = other.bits_;
    }
    return *this;
}

std::string DeviceIdentity::to_pem() const {
    return pem_from_writer(write_pubkey, pkey_.get());
}

DeviceIdentity DeviceIdentity::from_pem(const std::string& pem) {
    BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
    EVP_PKEY* raw = bio ? PEM_read_bio_PUBKEY(bio.get(), nullptr, nullptr, nullptr)
                        : nullptr;
    if (raw == nullptr)
        throw BadFormatError("not a PEM public key");
    EvpPkeyPtr pk(raw);
    unsigned bits = key_bits(pk.get());
    if (bits != 2048 && bits != 4096)
        throw UnsupportedKeySizeError("public key is " + std::to_string(bits) +
                                      " bits; expected 2048 or 4096");
    return DeviceIdentity(std::move(pk), bits);
}

std::array<std::uint8_t, 32> DeviceIdentity::fingerprint() const {
    unsigned char* der = nullptr;
    int len = i2d_PUBKEY(pkey_.get(), &der);
    if (len <= 0)
        throw CryptoInternalError("i2d_PUBKEY failed");
    auto digest = sha256(std::span<const std::uint8_t>(der, static_cast<std::size_t>(len)));
    OPENSSL_free(der);
    return digest;
}

Bytes KeyBlob::serialize() const {
    Bytes out(serialized_size());
    put_le16(out.data(), version);
    put_le16(out.data() + 2, rsa_bits);
    std::memcpy(out.data() + 4, iv.bytes.data(), NonceBase::kBytes);
    std::memcpy(out.data() + 4 + NonceBase::kBytes, oaep_ciphertext.data(),
                oaep_ciphertext.size());
    return out;
}

KeyBlob KeyBlob::deserialize(std::span<const std::uint8_t> data) {
    constexpr std::size_t kHeader = 4 + NonceBase::kBytes;
    if (data.size() < kHeader)
        throw TruncatedFileError("key blob shorter than its fixed header");
    KeyBlob b;
    b.version = get_le16(data.data());
    if (b.version != kVersion)
        throw BadVersionError("unsupported key blob version " +
                              std::to_string(b.version));
    b.rsa_bits = get_le16(data.data() + 2);
    if (b.rsa_bits != 2048 && b.rsa_bits != 4096)
        throw BadFormatError("key blob names an unsupported modulus size");
    std::memcpy(b.iv.bytes.data(), data.data() + 4, NonceBase::kBytes);
    const std::size_t ct_len = b.rsa_bits / 8;
    if (data.size() != kHeader + ct_len)
        throw TruncatedFileError("key blob ciphertext length mismatch");
    b.oaep_ciphertext.assign(data.begin() + kHeader, data.end());
    return b;
}

EnclaveState EnclaveState::generate(unsigned bits) {
    if (bits != 2048 && bits != 4096)
        throw UnsupportedKeySizeError("device identity must be 2048 or 4096 bits, got " +
                                      std::to_string(bits));
    CtxPtr ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_RSA, nullptr));
    if (!ctx || EVP_PKEY_keygen_init(ctx.get()) <= 0 ||
        EVP_PKEY_CTX_set_rsa_keygen_bits(ctx.get(), static_cast<int>(bits)) <= 0)
        throw CryptoInternalError("RSA keygen init failed");
    EVP_PKEY* raw = nullptr;
    if (EVP_PKEY_keygen(ctx.get(), &raw) <= 0)
        throw CryptoInternalError("RSA keygen failed");
    return EnclaveState(EvpPkeyPtr(raw), bits);
}

EnclaveState generate_device_identity(unsigned bits) {
    return EnclaveState::generate(bits);
}

DeviceIdentity EnclaveState::device_public() const {
    // Round-trip through PEM to strip the private components.
    return DeviceIdentity::from_pem(pem_from_writer(write_pubkey, pkey_.get()));
}

ProvisionReceipt EnclaveState::unseal_and_provision(const KeyBlob& blob,
                                                    const AppIdentity& caller,
                                                    IceRegisters& regs) {
    if (blob.rsa_bits != bits_)
        throw OaepDecodeError("blob was sealed for a " +
                              std::to_string(blob.rsa_bits) + "-bit identity");
    CtxPtr ctx(EVP_PKEY_CTX_new(pkey_.get(), nullptr));
    if (!ctx || EVP_PKEY_decrypt_init(ctx.get()) <= 0)
        throw CryptoInternalError("RSA decrypt init failed");
    set_oaep_sha256(ctx.get());

    std::size_t out_len = bits_ / 8;
    Bytes payload(out_len);
    int rc = EVP_PKEY_decrypt(ctx.get(), payload.data(), &out_len,
                              blob.oaep_ciphertext.data(),
                              blob.oaep_ciphertext.size());
    if (rc <= 0) {
        secure_zero(payload.data(), payload.size());
        throw OaepDecodeError("OAEP decryption failed");
    }
    if (out_len != kPayloadBytes) {
        secure_zero(payload.data(), payload.size());
        throw OaepDecodeError("sealed payload has unexpected length " +
                              std::to_string(out_len));
    }

    const auto caller_hash = caller.app_hash();
    if (CRYPTO_memcmp(payload.data() + SessionKey::kBytes, caller_hash.data(),
                      caller_hash.size()) != 0) {
        secure_zero(payload.data(), payload.size());
        throw AppBindingMismatchError(
            "caller certificate hash does not match the sealed binding");
    }

    std::memcpy(regs.key.data(), payload.data(), SessionKey::kBytes);
    regs.nonce = blob.iv.bytes;
    regs.provisioned = true;
    secure_zero(payload.data(), payload.size());

    ProvisionReceipt receipt;
    receipt.sequence = log_.size() + 1;
    receipt.rsa_bits = bits_;
    receipt.h_app = caller_hash;
    receipt.iv = blob.iv;
    log_.push_back(receipt);
    return receipt;
}

std::string EnclaveState::to_pem() const {
    return pem_from_writer(write_privkey, pkey_.get());
}

EnclaveState EnclaveState::from_pem(const std::string& pem) {
    BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
    EVP_PKEY* raw = bio ? PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr)
                        : nullptr;
    if (raw == nullptr)
        throw BadFormatError("not a PEM private key");
    EvpPkeyPtr sk(raw);
    unsigned bits = key_bits(sk.get());
    if (bits != 2048 && bits != 4096)
        throw UnsupportedKeySizeError("stored identity has unsupported size");
    return EnclaveState(std::move(sk), bits);
}

KeyBlob seal_model_key(const DeviceIdentity& device, const SessionKey& k_msk,
                       const AppIdentity& app, const NonceBase& iv) {
    if (k_msk.cleared())
        throw KeyClearedError("cannot seal a zeroized session key");
    std::array<std::uint8_t, kPayloadBytes> payload{};
    std::memcpy(payload.data(), k_msk.bytes().data(), SessionKey::kBytes);
    const auto h_app = app.app_hash();
    std::memcpy(payload.data() + SessionKey::kBytes, h_app.data(), h_app.size());

    CtxPtr ctx(EVP_PKEY_CTX_new(device.handle(), nullptr));
    if (!ctx || EVP_PKEY_encrypt_init(ctx.get()) <= 0)
        throw CryptoInternalError("RSA encrypt init failed");
    set_oaep_sha256(ctx.get());

    std::size_t ct_len = 0;
    if (EVP_PKEY_encrypt(ctx.get(), nullptr, &ct_len, payload.data(),
                         payload.size()) <= 0) {
        secure_zero(payload.data(), payload.size());
        throw RsaEncryptError("OAEP size query failed");
    }
    Bytes ct(ct_len);
    if (EVP_PKEY_encrypt(ctx.get(), ct.data(), &ct_len, payload.data(),
                         payload.size()) <= 0) {
        secure_zero(payload.data(), payload.size());
        throw RsaEncryptError("OAEP encryption failed");
    }
    ct.resize(ct_len);
    secure_zero(payload.data(), payload.size());

    KeyBlob blob;
    blob.rsa_bits = static_cast<std::uint16_t>(device.bits());
    blob.iv = iv;
    blob.oaep_ciphertext = std::move(ct);
    return blob;
}

}  // namespace tessera
