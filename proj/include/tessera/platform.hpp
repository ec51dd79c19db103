//
// SPDX-License-Identifier: Apache-2.0
//
// Named platform constants for the three evaluated SoCs plus custom profiles
// loaded from JSON. Latencies are measurement inputs, not derived values:
// the simulator treats them the way it treats any configuration constant.
//
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tessera/common.hpp"

namespace tessera {

struct PlatformProfile {
    std::string name;          // registry key, e.g. "i9"
    std::string description;   // human label, e.g. "Intel i9-12900H (iGPU L2$)"
    std::string memory_type;   // e.g. "DDR5-4800"
    double t_ks_ns = 0;        // AES keystream latency for one 64 B line
    double t_dram_ns = 0;      // DRAM dereference latency for one line
    double bw_ceiling = 0;     // bytes/s, unencrypted hardware ceiling
    std::uint64_t sram_size = 0;  // bytes of isolated NPU SRAM
    double sram_bw = 0;        // bytes/s, scrub/fill bandwidth
    double t_save_ns = 1500.0; // state save + secure-world switch

    double delta_ns() const { return t_dram_ns - t_ks_ns; }

    // Throws InvalidArgumentError unless every latency/bandwidth is > 0.
    void validate() const;
};

// ICE clock-domain constants: address arithmetic and XOR merge stages.
struct IceTimingConfig {
    double clock_ghz = 1.4;
    int t_addr_cycles = 1;
    int t_xor_cycles = 2;

    double t_addr_ns() const { return t_addr_cycles / clock_ghz; }
    double t_xor_ns() const { return t_xor_cycles / clock_ghz; }
};

const std::vector<PlatformProfile>& builtin_profiles();

// Lookup by registry key ("i9", "xavier", "orin"). Throws
// InvalidArgumentError for unknown names.
const PlatformProfile& builtin_profile(const std::string& name);

// Parse a profile from a JSON document (see README for the schema).
PlatformProfile profile_from_json(const std::string& json_text);

// Accepts a built-in name or a path to a JSON profile file.
PlatformProfile resolve_profile(const std::string& name_or_path);

std::string profile_to_json(const PlatformProfile& p);

}  // namespace tessera
