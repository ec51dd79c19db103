//
// SPDX-License-Identifier: Apache-2.0
//
// Key and nonce registers of the inline crypto engine. In hardware these sit
// on a private on-die bus writable only by the security enclave; here that
// is modeled by the fact that only EnclaveState::unseal_and_provision and
// clear() mutate them, and nothing ever serializes them.
//
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>

#include "tessera/common.hpp"

namespace tessera {

struct IceRegisters {
    std::array<std::uint8_t, 32> key{};
    std::array<std::uint8_t, 12> nonce{};
    bool provisioned = false;

    void clear() noexcept {
        secure_zero(key.data(), key.size());
        secure_zero(nonce.data(), nonce.size());
        provisioned = false;
    }

    bool key_is_zero() const noexcept {
        return std::all_of(key.begin(), key.end(),
                           [](std::uint8_t b) { return b == 0; });
    }
};

}  // namespace tessera
