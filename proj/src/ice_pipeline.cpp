//
// SPDX-License-Identifier: Apache-2.0
//
#include "tessera/ice_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace tessera {

double line_latency_ns(const PlatformProfile& profile, DecryptMode mode,
                       const IceTimingConfig& timing) {
    profile.validate();
    const double fetch_ns = kLineBytes * 1e9 / profile.bw_ceiling;
    switch (mode) {
        case DecryptMode::kTessera:
            return timing.t_addr_ns() + std::max(profile.t_ks_ns, fetch_ns) +
                   timing.t_xor_ns();
        case DecryptMode::kDirect:
            return timing.t_addr_ns() + fetch_ns + profile.t_ks_ns;
        case DecryptMode::kPlaintext:
            return timing.t_addr_ns() + fetch_ns;
    }
    return 0;
}

std::vector<TileDescriptor> split_into_tiles(std::uint64_t base_addr,
                                             std::uint64_t total_len,
                                             std::uint64_t tile_bytes,
                                             const std::string& layer) {
    if (base_addr % kLineBytes != 0)
        throw MisalignedError("tile base address must be 64-byte aligned");
    if (total_len == 0 || tile_bytes == 0)
        throw InvalidArgumentError("tile split needs positive lengths");
    if (tile_bytes % kLineBytes != 0)
        throw MisalignedError("tile size must be a whole number of lines");
    std::vector<TileDescriptor> tiles;
    for (std::uint64_t off = 0; off < total_len; off += tile_bytes) {
        TileDescriptor t;
        t.base_addr = base_addr + off;
        t.length = std::min<std::uint64_t>(tile_bytes, total_len - off);
        t.layer = layer + "[" + std::to_string(tiles.size()) + "]";
        tiles.push_back(std::move(t));
    }
    return tiles;
}

StreamReport stream_decrypt(Fabric& fabric, const IceRegisters& regs,
                            std::span<const TileDescriptor> tiles) {
    if (!regs.provisioned)
        throw IceNotProvisionedError(
            "ICE key registers are not provisioned; refusing to stream");
    std::uint64_t total_padded = 0;
    for (const auto& t : tiles) {
        if (t.base_addr % kLineBytes != 0)
            throw MisalignedError("tile at " + std::to_string(t.base_addr) +
                                  " is not line-aligned");
        if (t.length == 0)
            throw InvalidArgumentError("tile length must be > 0");
        total_padded += (t.length + kLineBytes - 1) / kLineBytes * kLineBytes;
    }
    if (total_padded > fabric.sram_region().size)
        throw SramOverflowError("schedule needs " + std::to_string(total_padded) +
                                " B of SRAM but only " +
                                std::to_string(fabric.sram_region().size) +
                                " B exist");

    const LineCipher cipher(SessionKey::from_bytes(regs.key), NonceBase{regs.nonce});
    StreamReport report;
    std::uint64_t sram_cursor = fabric.sram_region().base;
    for (std::size_t ti = 0; ti < tiles.size(); ++ti) {
        const auto& tile = tiles[ti];
        const std::uint64_t n_lines = (tile.length + kLineBytes - 1) / kLineBytes;
        for (std::uint64_t li = 0; li < n_lines; ++li) {
            const std::uint64_t addr = tile.base_addr + li * kLineBytes;
            BusResponse fetch = fabric.bus_read(kNpuDmaStream, addr, kLineBytes);
            if (!fetch.ok()) {
                report.errors.push_back({ti, addr, fetch.status, "fetch"});
                sram_cursor += kLineBytes;
                continue;
            }
            Line ct{};
            std::copy(fetch.data.begin(), fetch.data.end(), ct.begin());
            const Line pt = cipher.decrypt(CacheLine{addr, ct});
            if (fabric.mte_enabled()) fabric.tag_sram_restricted();
            BusResponse wr = fabric.bus_write(kNpuDmaStream, sram_cursor, pt);
            if (!wr.ok()) {
                report.errors.push_back({ti, sram_cursor, wr.status, "sram-write"});
            } else {
                report.sram_bytes_written += kLineBytes;
            }
            sram_cursor += kLineBytes;
            ++report.lines_processed;
            report.bytes_fetched += kLineBytes;
        }
    }
    return report;
}

void JitterParams::validate() const {
    if (!(sigma_ks_frac >= 0 && sigma_ks_frac < 1))
        throw InvalidArgumentError("sigma_ks_frac must lie in [0, 1)");
    if (!(sigma_dram_frac >= 0 && sigma_dram_frac < 1))
        throw InvalidArgumentError("sigma_dram_frac must lie in [0, 1)");
    if (n_requests < 1)
        throw InvalidArgumentError("n_requests must be >= 1");
}

namespace {

// Portable unit-interval doubles from the top 53 bits of a mt19937_64 draw.
inline double unit_open(std::uint64_t u) {  // (0, 1]
    return (static_cast<double>(u >> 11) + 1.0) * 0x1p-53;
}
inline double unit_half_open(std::uint64_t u) {  // [0, 1)
    return static_cast<double>(u >> 11) * 0x1p-53;
}

struct GaussPair {
    double z0, z1;
};

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Box-Muller on two independent draws; fully specified so that runs are
// reproducible across standard libraries (std::normal_distribution is not).
inline GaussPair box_muller(std::mt19937_64& gen) {
    const double u1 = unit_open(gen());
    const double u2 = unit_half_open(gen());
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = kTwoPi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

inline std::int64_t to_ps(double ns) {
    return static_cast<std::int64_t>(std::llround(ns * 1000.0));
}

}  // namespace

SimStats simulate_jitter(const PlatformProfile& profile, const JitterParams& params) {
    profile.validate();
    params.validate();

    const std::uint64_t n = params.n_requests;
    const double sigma_ks = params.sigma_ks_frac * profile.t_ks_ns;
    const double sigma_dram = params.sigma_dram_frac * profile.t_dram_ns;
    const double ks_floor = 0.05 * profile.t_ks_ns;
    const double dram_floor = 0.05 * profile.t_dram_ns;
    const auto bw = static_cast<std::uint64_t>(std::llround(profile.bw_ceiling));

    std::mt19937_64 gen(params.seed);

    // Absolute completion times in integer picoseconds.
    std::vector<std::int64_t> ks_done(n), ct_arrive(n);
    SimStats stats;
    stats.n_requests = n;
    double latency_sum_ns = 0;
    std::int64_t makespan_ps = 0;

    for (std::uint64_t i = 0; i < n; ++i) {
        const std::int64_t t_issue =
            static_cast<std::int64_t>((static_cast<unsigned __int128>(i) *
                                       64'000'000'000'000ULL) /
                                      bw);
        const GaussPair z = box_muller(gen);
        const double ks_ns = std::max(profile.t_ks_ns + sigma_ks * z.z0, ks_floor);
        const double dram_ns = std::max(profile.t_dram_ns + sigma_dram * z.z1, dram_floor);
        ks_done[i] = t_issue + to_ps(ks_ns);
        ct_arrive[i] = t_issue + to_ps(dram_ns);
        if (ks_done[i] > ct_arrive[i]) ++stats.stall_count;
        const std::int64_t done = std::max(ks_done[i], ct_arrive[i]);
        latency_sum_ns += static_cast<double>(done - t_issue) / 1000.0;
        makespan_ps = std::max(makespan_ps, done);
    }
    stats.stall_probability =
        static_cast<double>(stats.stall_count) / static_cast<double>(n);
    stats.mean_line_latency_ns = latency_sum_ns / static_cast<double>(n);

    // Occupancy sweep: +1 when a keystream becomes ready before its
    // ciphertext, -1 when that ciphertext arrives. Ties process the
    // keystream event first, counting the momentary hand-off.
    struct Event {
        std::int64_t t;
        std::uint8_t kind;  // 0 = keystream ready, 1 = ciphertext arrival
        std::uint64_t idx;
    };
    std::vector<Event> events;
    events.reserve(2 * n);
    for (std::uint64_t i = 0; i < n; ++i) {
        if (ks_done[i] <= ct_arrive[i]) {
            events.push_back({ks_done[i], 0, i});
            events.push_back({ct_arrive[i], 1, i});
        }
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.idx < b.idx;
    });
    std::uint64_t occ = 0, max_occ = 0;
    for (const auto& e : events) {
        if (e.kind == 0) {
            ++occ;
            max_occ = std::max(max_occ, occ);
        } else {
            --occ;
        }
    }
    stats.max_fifo_occupancy_lines = max_occ;
    stats.max_fifo_occupancy_bytes = max_occ * kLineBytes;

    if (makespan_ps > 0) {
        const double makespan_s = static_cast<double>(makespan_ps) * 1e-12;
        stats.effective_bw_fraction =
            static_cast<double>(n * kLineBytes) / (makespan_s * profile.bw_ceiling);
    }
    return stats;
}

std::string sim_stats_csv_header() {
    return "profile,seed,n,sigma_ks,sigma_dram,stalls,stall_prob,max_occ_lines,max_occ_bytes";
}

std::string sim_stats_csv_row(const PlatformProfile& profile,
                              const JitterParams& params, const SimStats& stats) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%llu,%llu,%.6g,%.6g,%llu,%.6g,%llu,%llu",
                  profile.name.c_str(),
                  static_cast<unsigned long long>(params.seed),
                  static_cast<unsigned long long>(params.n_requests),
                  params.sigma_ks_frac * profile.t_ks_ns,
                  params.sigma_dram_frac * profile.t_dram_ns,
                  static_cast<unsigned long long>(stats.stall_count),
                  stats.stall_probability,
                  static_cast<unsigned long long>(stats.max_fifo_occupancy_lines),
                  static_cast<unsigned long long>(stats.max_fifo_occupancy_bytes));
    return buf;
}

double fifo_high_water_bytes(const PlatformProfile& profile, double worst_latency_ns) {
    if (worst_latency_ns < 0)
        throw InvalidArgumentError("latency must be non-negative");
    return profile.bw_ceiling * worst_latency_ns / 1e9;
}

}  // namespace tessera
