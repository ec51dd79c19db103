// SPDX-License-Identifier: Apache-2.0

#include "tessera/weight_image.hpp"

#include <cstdio>
#include <cstring>

#include "tessera/crypto_core.hpp"

#include <json.hpp>

namespace tessera {

Bytes pack_image(const Bytes& plaintext, const DeviceIdentity& device,
                 const AppIdentity& app, std::uint64_t base_addr,
                 bool fixed_counter_demo) {
    if (base_addr % kLineBytes != 0) {
        throw MisalignedError("image base address must be 64-byte aligned");
    }
    if (plaintext.empty()) {
        throw InvalidArgumentError("refusing to pack an empty weight image");
    }

    SessionKey k_msk = SessionKey::random();
    const NonceBase iv = NonceBase::random();
    const KeyBlob blob = seal_model_key(device, k_msk, app, iv);
    const Bytes blob_bytes = blob.serialize();
    if (blob_bytes.size() > 0xFFFF) {
        throw BadFormatError("key blob does not fit a u16 length");
    }

    const std::uint64_t lines =
        (plaintext.size() + kLineBytes - 1) / kLineBytes;
    const std::size_t header_len = kImageFixedHeaderBytes + blob_bytes.size();
    const std::size_t ct_offset =
        (header_len + kLineBytes - 1) / kLineBytes * kLineBytes;

    Bytes image(ct_offset + lines * kLineBytes, 0);
    std::memcpy(image.data(), kImageMagic, 4);
    put_le16(image.data() + 4, kImageVersion);
    put_le16(image.data() + 6, fixed_counter_demo ? kFlagFixedCounterDemo : 0);
    put_le64(image.data() + 8, base_addr);
    put_le64(image.data() + 16, plaintext.size());
    std::memcpy(image.data() + 24, app.app_hash().data(), 32);
    put_le16(image.data() + 56, static_cast<std::uint16_t>(blob_bytes.size()));
    std::memcpy(image.data() + kImageFixedHeaderBytes, blob_bytes.data(),
                blob_bytes.size());

    {
        LineCipher cipher(k_msk, iv);
        Line fixed_ks{};
        if (fixed_counter_demo) fixed_ks = cipher.insecure_fixed_keystream();

        for (std::uint64_t i = 0; i < lines; ++i) {
            CacheLine line;
            line.addr = base_addr + i * kLineBytes;
            line.data = {};  // tail line keeps its zero padding
            const std::size_t off = i * kLineBytes;
            const std::size_t n =
                std::min<std::size_t>(kLineBytes, plaintext.size() - off);
            std::memcpy(line.data.data(), plaintext.data() + off, n);

            Line ct;
            if (fixed_counter_demo) {
                for (std::size_t b = 0; b < kLineBytes; ++b) {
                    ct[b] = line.data[b] ^ fixed_ks[b];
                }
            } else {
                ct = cipher.encrypt(line);
            }
            std::memcpy(image.data() + ct_offset + off, ct.data(), kLineBytes);
            secure_zero(line.data.data(), line.data.size());
        }
        secure_zero(fixed_ks.data(), fixed_ks.size());
    }
    k_msk.clear();  // the sealed blob now holds the only copy
    return image;
}

WeightImageHeader inspect_image(std::span<const std::uint8_t> image) {
    if (image.size() < 4) throw TruncatedFileError("shorter than the magic");
    if (std::memcmp(image.data(), kImageMagic, 4) != 0) {
        throw BadMagicError("not a packed weight image");
    }
    if (image.size() < kImageFixedHeaderBytes) {
        throw TruncatedFileError("header cut short");
    }

    WeightImageHeader h;
    h.version = get_le16(image.data() + 4);
    if (h.version != kImageVersion) {
        throw BadVersionError("unsupported image version " +
                              std::to_string(h.version));
    }
    h.flags = get_le16(image.data() + 6);
    if ((h.flags & ~kFlagFixedCounterDemo) != 0) {
        throw BadFormatError("reserved flag bits set");
    }
    h.base_addr = get_le64(image.data() + 8);
    if (h.base_addr % kLineBytes != 0) {
        throw BadFormatError("unaligned base address");
    }
    h.plaintext_len = get_le64(image.data() + 16);
    std::memcpy(h.h_app.data(), image.data() + 24, 32);

    const std::size_t blob_len = get_le16(image.data() + 56);
    if (image.size() < kImageFixedHeaderBytes + blob_len) {
        throw TruncatedFileError("key blob cut short");
    }
    h.blob = KeyBlob::deserialize(
        image.subspan(kImageFixedHeaderBytes, blob_len));

    const std::size_t header_len = kImageFixedHeaderBytes + blob_len;
    h.ciphertext_offset = (header_len + kLineBytes - 1) / kLineBytes * kLineBytes;
    for (std::size_t i = header_len; i < h.ciphertext_offset; ++i) {
        if (i >= image.size()) throw TruncatedFileError("padding cut short");
        if (image[i] != 0) throw BadFormatError("nonzero header padding");
    }

    const std::uint64_t expect = h.ciphertext_offset + h.ciphertext_bytes();
    if (image.size() < expect) throw TruncatedFileError("ciphertext cut short");
    if (image.size() > expect) throw BadFormatError("trailing bytes after ciphertext");
    return h;
}

WeightImageHeader inspect_image(const Bytes& image) {
    return inspect_image(std::span<const std::uint8_t>(image));
}

std::span<const std::uint8_t> image_ciphertext(std::span<const std::uint8_t> image,
                                               const WeightImageHeader& header) {
    return image.subspan(header.ciphertext_offset, header.ciphertext_bytes());
}

std::string inspect_report(const WeightImageHeader& h) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "weight image v%u\n"
                  "  flags            0x%04x%s\n"
                  "  base_addr        0x%llx\n"
                  "  plaintext_len    %llu bytes (%llu lines)\n"
                  "  h_app            %s\n"
                  "  key blob         RSA-%u, %zu bytes\n"
                  "  ciphertext       offset %zu, %llu bytes\n",
                  h.version, h.flags,
                  h.fixed_counter_demo() ? " (INSECURE fixed-counter demo)" : "",
                  static_cast<unsigned long long>(h.base_addr),
                  static_cast<unsigned long long>(h.plaintext_len),
                  static_cast<unsigned long long>(h.ciphertext_lines()),
                  to_hex(h.h_app).c_str(), h.blob.rsa_bits,
                  h.blob.serialized_size(), h.ciphertext_offset,
                  static_cast<unsigned long long>(h.ciphertext_bytes()));
    return buf;
}

std::string inspect_json(const WeightImageHeader& h) {
    nlohmann::ordered_json doc{
        {"version", h.version},
        {"flags", h.flags},
        {"fixed_counter_demo", h.fixed_counter_demo()},
        {"base_addr", h.base_addr},
        {"plaintext_len", h.plaintext_len},
        {"h_app", to_hex(h.h_app)},
        {"rsa_bits", h.blob.rsa_bits},
        {"blob_len", h.blob.serialized_size()},
        {"ciphertext_offset", h.ciphertext_offset},
        {"ciphertext_bytes", h.ciphertext_bytes()},
    };
    return doc.dump(2) + "\n";
}

}  // namespace tessera
