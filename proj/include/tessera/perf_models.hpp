//
// SPDX-License-Identifier: Apache-2.0
//
// Closed-form analytical models: bandwidth amplification by fetch
// granularity, effective throughput under the three decryption modes,
// DRAM/ICE energy per inference, and the silicon PPA projection, plus
// deterministic CSV/JSON emission of every headline table.
//
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tessera/platform.hpp"

namespace tessera {

struct TileClass {
    std::string layer;
    std::uint64_t tile_bytes;
};

// Representative layer geometries (TensorRT/Gemmini-style schedules).
const std::vector<TileClass>& reference_tile_classes();

inline constexpr std::uint64_t kPageBytes = 4096;

enum class Granularity { kPage, kTessera };

// Bytes fetched / bytes needed for a tile of `tile_bytes`.
//   page:    ceil(4096/t)          (page-granular engines fetch whole pages)
//   tessera: ceil(t/64)*64 / t     (line-granular fetch, only tail padding)
double amplification(std::uint64_t tile_bytes, Granularity g);

enum class ThroughputMode { kBaseline, kDirect, kTessera };

struct EffectiveBandwidth {
    double fraction;      // of the hardware ceiling
    double bytes_per_s;   // fraction * ceiling
};

inline constexpr double kAxiBurstBeats = 128.0;
inline constexpr double kXorPenaltyCycles = 2.0;

// Throughput under an explicit amplification factor:
//   baseline: ceiling/A
//   direct:   ceiling/A * T_DRAM/(T_DRAM + T_ks)
//   tessera:  ceiling/A * burst/(burst + xor)
EffectiveBandwidth effective_bandwidth_amplified(const PlatformProfile& profile,
                                                 ThroughputMode mode, double amp);

// Tile-driven form: amplification of the line-granular fetch unit.
EffectiveBandwidth effective_bandwidth(const PlatformProfile& profile,
                                       ThroughputMode mode,
                                       std::uint64_t tile_bytes);

struct EnergyParams {
    double dram_pj_per_byte = 120.0;
    double ice_power_w = 0.090;
    double model_bytes = 46.8e6;     // decimal MB
    double load_bw = 22.1e9;         // bytes/s sustained during the load

    void validate() const;
};

struct EnergyBreakdown {
    double dram_mj = 0;
    double ice_mj = 0;
    double total_mj = 0;
    double load_time_ms = 0;
};

EnergyBreakdown inference_energy(const EnergyParams& params, double amplification);

struct PpaParams {
    double gate_equivalents = 100000.0;
    double um2_per_ge = 0.4;
    double pj_per_bit = 0.5;

    void validate() const;
};

struct PpaResult {
    double area_mm2 = 0;
    double power_w = 0;             // at the given throughput
    double aes_blocks_per_s = 0;    // bytes/s / 16
};

PpaResult ppa(const PpaParams& params, double throughput_bytes_per_s);

// Percentage rounded half-up to one decimal, as the evaluation tables print.
double round_pct_1dp(double fraction);

// Energy figures are quoted truncated toward zero at one decimal.
std::string format_energy_mj(double mj);

// Deterministic artifact tables. Files written:
//   preempt_latency.csv, throughput.csv, amplification.csv, energy.csv, ppa.csv
void emit_tables(const std::filesystem::path& out_dir);

// The same tables as a JSON document (string keys documented in README).
std::string tables_json();

// Schedule-level aggregate: sum(count*fetched)/sum(count*needed).
struct TileScheduleEntry {
    std::string name;
    std::uint64_t tile_bytes;
    std::uint64_t count;
};

std::vector<TileScheduleEntry> load_tile_schedule(const std::filesystem::path& file);
double schedule_amplification(const std::vector<TileScheduleEntry>& entries,
                              Granularity g);

}  // namespace tessera
