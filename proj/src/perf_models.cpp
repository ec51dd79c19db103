// SPDX-License-Identifier: Apache-2.0

#include "tessera/perf_models.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "tessera/common.hpp"
#include "tessera/preemption.hpp"

#include <json.hpp>

namespace tessera {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

void write_text_file(const std::filesystem::path& p, const std::string& body) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw IoError("cannot open " + p.string() + " for writing");
    os << body;
    if (!os) throw IoError("short write to " + p.string());
}

double crypto_factor(const PlatformProfile& profile, ThroughputMode mode) {
    switch (mode) {
        case ThroughputMode::kBaseline:
            return 1.0;
        case ThroughputMode::kDirect:
            // Decrypt latency sits in series with the DRAM access.
            return profile.t_dram_ns / (profile.t_dram_ns + profile.t_ks_ns);
        case ThroughputMode::kTessera:
            // Keystream generation is hidden; only the XOR merge stretches
            // the burst.
            return kAxiBurstBeats / (kAxiBurstBeats + kXorPenaltyCycles);
    }
    throw InvalidArgumentError("bad throughput mode");
}

const char* mode_name(ThroughputMode mode) {
    switch (mode) {
        case ThroughputMode::kBaseline: return "baseline";
        case ThroughputMode::kDirect: return "direct";
        case ThroughputMode::kTessera: return "tessera";
    }
    return "?";
}

}  // namespace

const std::vector<TileClass>& reference_tile_classes() {
    static const std::vector<TileClass> kClasses = {
        {"BatchNorm", 128},  {"DW-Conv", 288},  {"PW-narrow", 512},
        {"Conv-mid", 1024},  {"PW-wide", 2048}, {"Conv/Attn/FC", 4096},
    };
    return kClasses;
}

double amplification(std::uint64_t tile_bytes, Granularity g) {
    if (tile_bytes == 0) throw InvalidArgumentError("tile_bytes must be > 0");
    switch (g) {
        case Granularity::kPage:
            return static_cast<double>((kPageBytes + tile_bytes - 1) / tile_bytes);
        case Granularity::kTessera: {
            const std::uint64_t fetched =
                (tile_bytes + kLineBytes - 1) / kLineBytes * kLineBytes;
            return static_cast<double>(fetched) / static_cast<double>(tile_bytes);
        }
    }
    throw InvalidArgumentError("bad granularity");
}

EffectiveBandwidth effective_bandwidth_amplified(const PlatformProfile& profile,
                                                 ThroughputMode mode, double amp) {
    profile.validate();
    if (!(amp >= 1.0)) throw InvalidArgumentError("amplification must be >= 1");
    EffectiveBandwidth out;
    out.fraction = crypto_factor(profile, mode) / amp;
    out.bytes_per_s = out.fraction * profile.bw_ceiling;
    return out;
}

EffectiveBandwidth effective_bandwidth(const PlatformProfile& profile,
                                       ThroughputMode mode,
                                       std::uint64_t tile_bytes) {
    return effective_bandwidth_amplified(
        profile, mode, amplification(tile_bytes, Granularity::kTessera));
}

void EnergyParams::validate() const {
    if (!(dram_pj_per_byte > 0) || !(ice_power_w > 0) || !(model_bytes > 0) ||
        !(load_bw > 0)) {
        throw InvalidArgumentError("energy parameters must be positive");
    }
}

EnergyBreakdown inference_energy(const EnergyParams& params, double amplification) {
    params.validate();
    if (!(amplification > 0)) throw InvalidArgumentError("amplification must be > 0");
    EnergyBreakdown out;
    // pJ/byte * bytes = pJ; 1 pJ = 1e-9 mJ.
    out.dram_mj = params.model_bytes * amplification * params.dram_pj_per_byte * 1e-9;
    const double load_s = params.model_bytes / params.load_bw;
    out.ice_mj = params.ice_power_w * load_s * 1e3;
    out.total_mj = out.dram_mj + out.ice_mj;
    out.load_time_ms = load_s * 1e3;
    return out;
}

void PpaParams::validate() const {
    if (!(gate_equivalents > 0) || !(um2_per_ge > 0) || !(pj_per_bit > 0)) {
        throw InvalidArgumentError("PPA parameters must be positive");
    }
}

PpaResult ppa(const PpaParams& params, double throughput_bytes_per_s) {
    params.validate();
    if (!(throughput_bytes_per_s > 0)) {
        throw InvalidArgumentError("throughput must be positive");
    }
    PpaResult out;
    out.area_mm2 = params.gate_equivalents * params.um2_per_ge * 1e-6;
    out.power_w = throughput_bytes_per_s * 8.0 * params.pj_per_bit * 1e-12;
    out.aes_blocks_per_s = throughput_bytes_per_s / kAesBlockBytes;
    return out;
}

double round_pct_1dp(double fraction) {
    return std::floor(fraction * 1000.0 + 0.5) / 10.0;
}

std::string format_energy_mj(double mj) {
    // Headline energy figures are quoted truncated, not rounded.
    return fmt("%.1f", std::trunc(mj * 10.0) / 10.0);
}

void emit_tables(const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto& profiles = builtin_profiles();

    std::string platforms =
        "name,memory_type,t_ks_ns,t_dram_ns,delta_ns,bw_ceiling_bytes_per_s,"
        "sram_size_bytes,sram_bw_bytes_per_s\n";
    for (const auto& p : profiles) {
        platforms += p.name + "," + p.memory_type + "," + fmt("%.10g", p.t_ks_ns) +
                     "," + fmt("%.10g", p.t_dram_ns) + "," + fmt("%.10g", p.delta_ns()) +
                     "," + fmt("%.10g", p.bw_ceiling) + "," +
                     std::to_string(p.sram_size) + "," + fmt("%.10g", p.sram_bw) + "\n";
    }
    write_text_file(out_dir / "platforms.csv", platforms);

    std::string preempt =
        "name,sram_size_bytes,sram_bw_bytes_per_s,t_save_ns,preempt_latency_ns,"
        "preempt_latency_us\n";
    for (const auto& p : profiles) {
        const double ns = preempt_latency_ns(p.sram_size, p.sram_bw, p.t_save_ns);
        preempt += p.name + "," + std::to_string(p.sram_size) + "," +
                   fmt("%.10g", p.sram_bw) + "," + fmt("%.10g", p.t_save_ns) + "," +
                   fmt("%.10g", ns) + "," + fmt("%.10g", ns / 1e3) + "\n";
    }
    write_text_file(out_dir / "preempt_latency.csv", preempt);

    std::string throughput = "platform,mode,fraction,pct_1dp,bytes_per_s\n";
    for (const auto& p : profiles) {
        for (auto mode : {ThroughputMode::kBaseline, ThroughputMode::kDirect,
                          ThroughputMode::kTessera}) {
            const auto bw = effective_bandwidth_amplified(p, mode, 1.0);
            throughput += p.name + "," + mode_name(mode) + "," +
                          fmt("%.10g", bw.fraction) + "," +
                          fmt("%.1f", round_pct_1dp(bw.fraction)) + "," +
                          fmt("%.10g", bw.bytes_per_s) + "\n";
        }
    }
    write_text_file(out_dir / "throughput.csv", throughput);

    std::string amp = "layer,tile_bytes,amp_page,amp_tessera\n";
    for (const auto& tc : reference_tile_classes()) {
        amp += tc.layer + "," + std::to_string(tc.tile_bytes) + "," +
               fmt("%.10g", amplification(tc.tile_bytes, Granularity::kPage)) + "," +
               fmt("%.10g", amplification(tc.tile_bytes, Granularity::kTessera)) +
               "\n";
    }
    write_text_file(out_dir / "amplification.csv", amp);

    const EnergyParams ep;
    const auto page = inference_energy(ep, 5.0);
    const auto line = inference_energy(ep, 1.0);
    std::string energy =
        "scenario,amplification,dram_mj,ice_mj,total_mj,dram_mj_display\n";
    energy += "page_granular,5.0," + fmt("%.10g", page.dram_mj) + "," +
              fmt("%.10g", 0.0) + "," + fmt("%.10g", page.dram_mj) + "," +
              format_energy_mj(page.dram_mj) + "\n";
    energy += "tessera,1.0," + fmt("%.10g", line.dram_mj) + "," +
              fmt("%.10g", line.ice_mj) + "," + fmt("%.10g", line.total_mj) + "," +
              format_energy_mj(line.dram_mj) + "\n";
    write_text_file(out_dir / "energy.csv", energy);

    const PpaParams pp;
    const auto p9 = ppa(pp, builtin_profile("i9").bw_ceiling);
    std::string ppa_csv =
        "gate_equivalents,um2_per_ge,area_mm2,throughput_bytes_per_s,power_w,"
        "aes_blocks_per_s\n";
    ppa_csv += fmt("%.10g", pp.gate_equivalents) + "," + fmt("%.10g", pp.um2_per_ge) +
               "," + fmt("%.10g", p9.area_mm2) + "," +
               fmt("%.10g", builtin_profile("i9").bw_ceiling) + "," +
               fmt("%.10g", p9.power_w) + "," + fmt("%.10g", p9.aes_blocks_per_s) +
               "\n";
    write_text_file(out_dir / "ppa.csv", ppa_csv);
}

std::string tables_json() {
    ordered_json root;
    const auto& profiles = builtin_profiles();

    ordered_json platforms = ordered_json::array();
    for (const auto& p : profiles) {
        platforms.push_back({{"name", p.name},
                             {"memory_type", p.memory_type},
                             {"t_ks_ns", p.t_ks_ns},
                             {"t_dram_ns", p.t_dram_ns},
                             {"delta_ns", p.delta_ns()},
                             {"bw_ceiling_bytes_per_s", p.bw_ceiling},
                             {"sram_size_bytes", p.sram_size},
                             {"sram_bw_bytes_per_s", p.sram_bw}});
    }
    root["platforms"] = platforms;

    ordered_json preempt = ordered_json::array();
    for (const auto& p : profiles) {
        const double ns = preempt_latency_ns(p.sram_size, p.sram_bw, p.t_save_ns);
        preempt.push_back({{"name", p.name},
                           {"preempt_latency_ns", ns},
                           {"preempt_latency_us", ns / 1e3}});
    }
    root["preempt_latency"] = preempt;

    ordered_json throughput = ordered_json::array();
    for (const auto& p : profiles) {
        const auto base = effective_bandwidth_amplified(p, ThroughputMode::kBaseline, 1.0);
        const auto direct = effective_bandwidth_amplified(p, ThroughputMode::kDirect, 1.0);
        const auto tess = effective_bandwidth_amplified(p, ThroughputMode::kTessera, 1.0);
        throughput.push_back({{"platform", p.name},
                              {"baseline_pct", round_pct_1dp(base.fraction)},
                              {"direct_pct", round_pct_1dp(direct.fraction)},
                              {"tessera_pct", round_pct_1dp(tess.fraction)}});
    }
    root["throughput"] = throughput;

    ordered_json amp = ordered_json::array();
    for (const auto& tc : reference_tile_classes()) {
        amp.push_back({{"layer", tc.layer},
                       {"tile_bytes", tc.tile_bytes},
                       {"amp_page", amplification(tc.tile_bytes, Granularity::kPage)},
                       {"amp_tessera",
                        amplification(tc.tile_bytes, Granularity::kTessera)}});
    }
    root["amplification"] = amp;

    const EnergyParams ep;
    const auto page = inference_energy(ep, 5.0);
    const auto line = inference_energy(ep, 1.0);
    root["energy"] = {{"model_bytes", ep.model_bytes},
                      {"page_granular_dram_mj", page.dram_mj},
                      {"tessera_dram_mj", line.dram_mj},
                      {"tessera_ice_mj", line.ice_mj},
                      {"tessera_total_mj", line.total_mj},
                      {"savings_mj", page.dram_mj - line.total_mj},
                      {"load_time_ms", line.load_time_ms}};

    const PpaParams pp;
    const auto p9 = ppa(pp, builtin_profile("i9").bw_ceiling);
    root["ppa"] = {{"area_mm2", p9.area_mm2},
                   {"power_w", p9.power_w},
                   {"aes_blocks_per_s", p9.aes_blocks_per_s}};

    return root.dump(2) + "\n";
}

std::vector<TileScheduleEntry> load_tile_schedule(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw IoError("cannot open " + file.string());
    nlohmann::json doc;
    try {
        is >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw BadFormatError("tile schedule is not valid JSON: " +
                             std::string(e.what()));
    }
    if (!doc.is_array()) throw BadFormatError("tile schedule must be a JSON array");
    std::vector<TileScheduleEntry> out;
    for (const auto& item : doc) {
        if (!item.is_object() || !item.contains("name") ||
            !item.contains("tile_bytes") || !item.contains("count")) {
            throw BadFormatError(
                "tile schedule entries need name, tile_bytes, count");
        }
        TileScheduleEntry e;
        try {
            e.name = item.at("name").get<std::string>();
            e.tile_bytes = item.at("tile_bytes").get<std::uint64_t>();
            e.count = item.at("count").get<std::uint64_t>();
        } catch (const nlohmann::json::exception& ex) {
            throw BadFormatError("bad tile schedule field: " + std::string(ex.what()));
        }
        if (e.tile_bytes == 0 || e.count == 0) {
            throw BadFormatError("tile_bytes and count must be positive");
        }
        out.push_back(std::move(e));
    }
    if (out.empty()) throw BadFormatError("tile schedule is empty");
    return out;
}

double schedule_amplification(const std::vector<TileScheduleEntry>& entries,
                              Granularity g) {
    if (entries.empty()) throw InvalidArgumentError("empty tile schedule");
    double fetched = 0, needed = 0;
    for (const auto& e : entries) {
        const double bytes = static_cast<double>(e.tile_bytes) *
                             static_cast<double>(e.count);
        fetched += bytes * amplification(e.tile_bytes, g);
        needed += bytes;
    }
    return fetched / needed;
}

}  // namespace tessera
