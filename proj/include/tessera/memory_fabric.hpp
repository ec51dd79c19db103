//
// SPDX-License-Identifier: Apache-2.0
//
// Functional model of the unified-memory system: one DRAM image shared by
// every initiator, an isolated NPU SRAM, and an SMMU stream-ID firewall
// whose configuration locks monotonically from the secure world. All timing
// lives elsewhere; this model answers only "who may touch which bytes".
//
// Bus semantics: requests that decode into a single region are checked per
// 64-byte line against the installed policy. A request is answered OKAY only
// if every touched line is permitted; a mapped but forbidden request gets
// SLVERR; anything that does not decode cleanly into one region (unmapped,
// or straddling a region edge) gets DECERR. Bus operations never throw.
//
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tessera/common.hpp"
#include "tessera/platform.hpp"

namespace tessera {

enum class BusStatus : std::uint8_t { kOkay, kSlverr, kDecerr };

const char* bus_status_name(BusStatus s) noexcept;

struct BusResponse {
    BusStatus status = BusStatus::kDecerr;
    Bytes data;  // payload on OKAY reads; empty otherwise

    bool ok() const noexcept { return status == BusStatus::kOkay; }
};

struct StreamId {
    std::uint32_t id;
    std::string role;
};

// The three initiators of the reference fabric.
inline constexpr std::uint32_t kCpuStream = 0;
inline constexpr std::uint32_t kNpuDmaStream = 1;
inline constexpr std::uint32_t kRogueStream = 2;

enum class Access : std::uint8_t { kRead = 1, kWrite = 2, kReadWrite = 3 };

constexpr bool access_permits(Access allowed, Access requested) noexcept {
    return (static_cast<std::uint8_t>(allowed) &
            static_cast<std::uint8_t>(requested)) ==
           static_cast<std::uint8_t>(requested);
}

struct SmmuEntry {
    std::uint32_t stream_id;
    std::uint64_t base;
    std::uint64_t size;
    Access allowed;
};

struct SmmuPolicy {
    std::vector<SmmuEntry> entries;  // allow-list; anything not covered is denied
    bool locked = false;
};

class Fabric {
public:
    struct Region {
        std::uint64_t base = 0;
        std::uint64_t size = 0;
        bool contains(std::uint64_t addr, std::uint64_t len) const noexcept {
            return addr >= base && len <= size && addr - base <= size - len;
        }
    };

    // Regions must be 64-byte aligned in base and size and must not overlap.
    // The fabric powers on with a fully permissive, unlocked policy: that is
    // the misconfigured state the isolation attacks exploit until secure
    // boot installs the locked reference policy.
    Fabric(const PlatformProfile& profile, std::uint64_t dram_base,
           std::uint64_t dram_size, std::uint64_t sram_base);

    BusResponse bus_read(std::uint32_t stream, std::uint64_t addr,
                         std::uint64_t len) const;
    BusResponse bus_write(std::uint32_t stream, std::uint64_t addr,
                          std::span<const std::uint8_t> bytes);

    // Secure-world-only configuration; locking is monotonic.
    void configure_smmu(bool caller_is_secure_world, SmmuPolicy policy);
    const SmmuPolicy& policy() const noexcept { return policy_; }

    // Privileged scrub path (not reachable via bus_write). Zero-fills SRAM,
    // drops the restricted tag, and returns the scrub duration in ns
    // (sram_size / sram_bw).
    double scrub_sram();
    double scrub_duration_ns() const;

    // MTE-style restricted-tag stub: when enabled, SRAM carrying the
    // restricted tag is readable/writable only by the NPU stream, as a
    // second gate independent of the SMMU policy.
    void set_mte_enabled(bool on) noexcept { mte_enabled_ = on; }
    bool mte_enabled() const noexcept { return mte_enabled_; }
    void tag_sram_restricted() noexcept { sram_tag_restricted_ = true; }
    bool sram_tag_restricted() const noexcept { return sram_tag_restricted_; }

    const Region& dram_region() const noexcept { return dram_r_; }
    const Region& sram_region() const noexcept { return sram_r_; }
    const PlatformProfile& profile() const noexcept { return profile_; }
    const std::vector<StreamId>& streams() const noexcept { return streams_; }

    // Physical-access views (cold-boot analog; no SMMU on a desoldered chip).
    std::span<const std::uint8_t> dram_bytes() const noexcept { return dram_; }
    std::span<const std::uint8_t> sram_bytes() const noexcept { return sram_; }

    // Host-side load path: the OS copying an image into shared DRAM.
    // Goes through bus_write on the CPU stream; throws IoError on failure.
    void load_dram(std::uint64_t addr, std::span<const std::uint8_t> bytes);

    // Forensic snapshot: dram.bin, sram.bin and a layout.json sidecar.
    void write_snapshot(const std::filesystem::path& dir) const;

    // Reference policies.
    SmmuPolicy permissive_policy() const;  // power-on / misconfigured state
    SmmuPolicy locked_reference_policy() const;  // DRAM shared, SRAM NPU-only

private:
    enum class Decode { kDram, kSram, kFail };
    Decode decode(std::uint64_t addr, std::uint64_t len) const noexcept;
    bool permitted(std::uint32_t stream, std::uint64_t addr, std::uint64_t len,
                   Access op) const noexcept;

    PlatformProfile profile_;
    Region dram_r_, sram_r_;
    Bytes dram_, sram_;
    SmmuPolicy policy_;
    std::vector<StreamId> streams_;
    bool mte_enabled_ = false;
    bool sram_tag_restricted_ = false;
};

}  // namespace tessera
