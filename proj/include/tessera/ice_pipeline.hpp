//
// SPDX-License-Identifier: Apache-2.0
//
// The timed ICE datapath: per-line latency model, the DMA streaming loop
// that decrypts tiles into SRAM, the keystream-FIFO jitter simulation, and
// Little's-law FIFO sizing.
//
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tessera/crypto_core.hpp"
#include "tessera/ice_registers.hpp"
#include "tessera/memory_fabric.hpp"
#include "tessera/platform.hpp"

namespace tessera {

enum class DecryptMode { kTessera, kDirect, kPlaintext };

// Closed-form per-line latency:
//   tessera:   T_addr + max(T_ks, 64/bw) + T_xor     (keystream in fetch shadow)
//   direct:    T_addr + 64/bw + T_ks                 (AES serialized after fetch)
//   plaintext: T_addr + 64/bw                        (no crypto terms)
double line_latency_ns(const PlatformProfile& profile, DecryptMode mode,
                       const IceTimingConfig& timing = {});

struct TileDescriptor {
    std::uint64_t base_addr = 0;  // 64-aligned physical address
    std::uint64_t length = 0;     // logical bytes, > 0
    std::string layer;            // label for reports
};

// Split a contiguous weight region into equal tiles (last one ragged).
std::vector<TileDescriptor> split_into_tiles(std::uint64_t base_addr,
                                             std::uint64_t total_len,
                                             std::uint64_t tile_bytes,
                                             const std::string& layer = "tile");

struct StreamError {
    std::size_t tile_index;
    std::uint64_t addr;
    BusStatus status;
    std::string stage;  // "fetch" or "sram-write"
};

struct StreamReport {
    std::uint64_t lines_processed = 0;
    std::uint64_t bytes_fetched = 0;  // always 64 * lines_processed
    std::uint64_t sram_bytes_written = 0;
    std::vector<StreamError> errors;
};

// Streams every tile through the engine: for each 64-byte line, fetch
// ciphertext from DRAM on the NPU stream, XOR with the address-derived
// keystream, and write plaintext to SRAM (sequential fill from the SRAM
// base, tiles back to back). Throws IceNotProvisionedError before touching
// SRAM when the registers are dead; individual bus errors are recorded in
// the report and the affected line is skipped.
StreamReport stream_decrypt(Fabric& fabric, const IceRegisters& regs,
                            std::span<const TileDescriptor> tiles);

struct JitterParams {
    double sigma_ks_frac = 0.1;
    double sigma_dram_frac = 0.2;
    std::uint64_t n_requests = 100000;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SimStats {
    std::uint64_t n_requests = 0;
    std::uint64_t stall_count = 0;
    double stall_probability = 0;
    std::uint64_t max_fifo_occupancy_lines = 0;
    std::uint64_t max_fifo_occupancy_bytes = 0;
    double mean_line_latency_ns = 0;
    double effective_bw_fraction = 0;
};

// Monte-Carlo pipeline robustness run. Request i is issued at
// t_i = i * 64/bw_ceiling; keystream and DRAM latencies are independent
// Gaussians (sigma = frac * mean) clamped below at 0.05x mean. A request
// stalls when its keystream finishes after its ciphertext arrives. FIFO
// occupancy counts requests whose keystream is done while ciphertext is
// still pending, tracked at every completion event. Deterministic for a
// given seed; see README for the exact RNG pinning.
SimStats simulate_jitter(const PlatformProfile& profile, const JitterParams& params);

std::string sim_stats_csv_header();
std::string sim_stats_csv_row(const PlatformProfile& profile,
                              const JitterParams& params, const SimStats& stats);

// Little's law: bytes of keystream buffer needed to ride out
// worst_latency_ns at the profile's bandwidth ceiling.
double fifo_high_water_bytes(const PlatformProfile& profile, double worst_latency_ns);

inline constexpr std::uint64_t kProvisionedFifoBytes = 4096;

}  // namespace tessera
