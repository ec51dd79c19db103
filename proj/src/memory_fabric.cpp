//
// SPDX-License-Identifier: Apache-2.0
//
#include "tessera/memory_fabric.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"

namespace tessera {

const char* bus_status_name(BusStatus s) noexcept {
    switch (s) {
        case BusStatus::kOkay: return "OKAY";
        case BusStatus::kSlverr: return "SLVERR";
        case BusStatus::kDecerr: return "DECERR";
    }
    return "?";
}

Fabric::Fabric(const PlatformProfile& profile, std::uint64_t dram_base,
               std::uint64_t dram_size, std::uint64_t sram_base)
    : profile_(profile),
      dram_r_{dram_base, dram_size},
      sram_r_{sram_base, profile.sram_size} {
    profile_.validate();
    auto aligned = [](std::uint64_t v) { return v % kLineBytes == 0; };
    if (!aligned(dram_base) || !aligned(dram_size) || !aligned(sram_base) ||
        !aligned(sram_r_.size))
        throw MisalignedError("fabric regions must be 64-byte aligned");
    if (dram_size == 0)
        throw InvalidArgumentError("DRAM region must be non-empty");
    const bool disjoint = dram_base + dram_size <= sram_base ||
                          sram_base + sram_r_.size <= dram_base;
    if (!disjoint)
        throw InvalidArgumentError("DRAM and SRAM regions overlap");
    dram_.assign(dram_size, 0);
    sram_.assign(sram_r_.size, 0);
    streams_ = {{kCpuStream, "CPU"},
                {kNpuDmaStream, "NPU-DMA"},
                {kRogueStream, "rogue-peripheral"}};
    policy_ = permissive_policy();
}

Fabric::Decode Fabric::decode(std::uint64_t addr, std::uint64_t len) const noexcept {
    if (len == 0) return Decode::kFail;
    if (dram_r_.contains(addr, len)) return Decode::kDram;
    if (sram_r_.contains(addr, len)) return Decode::kSram;
    return Decode::kFail;  // unmapped or straddling a region edge
}

bool Fabric::permitted(std::uint32_t stream, std::uint64_t addr,
                       std::uint64_t len, Access op) const noexcept {
    // Per-line evaluation: every touched 64-byte line must be covered by
    // some entry for this stream. Transactions therefore never straddle a
    // permission boundary with mixed outcomes.
    const std::uint64_t first = addr / kLineBytes;
    const std::uint64_t last = (addr + len - 1) / kLineBytes;
    for (std::uint64_t line = first; line <= last; ++line) {
        const std::uint64_t lb = line * kLineBytes;
        bool covered = false;
        for (const auto& e : policy_.entries) {
            if (e.stream_id != stream) continue;
            if (lb >= e.base && lb + kLineBytes <= e.base + e.size &&
                access_permits(e.allowed, op)) {
                covered = true;
                break;
            }
        }
        if (!covered) return false;
    }
    return true;
}

BusResponse Fabric::bus_read(std::uint32_t stream, std::uint64_t addr,
                             std::uint64_t len) const {
    const Decode d = decode(addr, len);
    if (d == Decode::kFail) return {BusStatus::kDecerr, {}};
    if (!permitted(stream, addr, len, Access::kRead))
        return {BusStatus::kSlverr, {}};
    if (d == Decode::kSram && mte_enabled_ && sram_tag_restricted_ &&
        stream != kNpuDmaStream)
        return {BusStatus::kSlverr, {}};
    const Bytes& mem = (d == Decode::kDram) ? dram_ : sram_;
    const Region& r = (d == Decode::kDram) ? dram_r_ : sram_r_;
    BusResponse resp{BusStatus::kOkay, {}};
    resp.data.assign(mem.begin() + static_cast<std::ptrdiff_t>(addr - r.base),
                     mem.begin() + static_cast<std::ptrdiff_t>(addr - r.base + len));
    return resp;
}

BusResponse Fabric::bus_write(std::uint32_t stream, std::uint64_t addr,
                              std::span<const std::uint8_t> bytes) {
    const Decode d = decode(addr, bytes.size());
    if (d == Decode::kFail) return {BusStatus::kDecerr, {}};
    if (!permitted(stream, addr, bytes.size(), Access::kWrite))
        return {BusStatus::kSlverr, {}};
    if (d == Decode::kSram && mte_enabled_ && sram_tag_restricted_ &&
        stream != kNpuDmaStream)
        return {BusStatus::kSlverr, {}};
    Bytes& mem = (d == Decode::kDram) ? dram_ : sram_;
    const Region& r = (d == Decode::kDram) ? dram_r_ : sram_r_;
    std::memcpy(mem.data() + (addr - r.base), bytes.data(), bytes.size());
    return {BusStatus::kOkay, {}};
}

void Fabric::configure_smmu(bool caller_is_secure_world, SmmuPolicy policy) {
    if (!caller_is_secure_world)
        throw NormalWorldDeniedError(
            "SMMU configuration registers are secure-world only");
    if (policy_.locked)
        throw AlreadyLockedError("SMMU policy is locked until reset");
    for (const auto& e : policy.entries) {
        if (e.base % kLineBytes != 0 || e.size % kLineBytes != 0 || e.size == 0)
            throw BadPolicyError("SMMU entries must cover 64-byte-aligned ranges");
        bool known = false;
        for (const auto& s : streams_)
            if (s.id == e.stream_id) known = true;
        if (!known)
            throw BadPolicyError("SMMU entry names unknown stream " +
                                 std::to_string(e.stream_id));
    }
    policy_ = std::move(policy);
}

double Fabric::scrub_duration_ns() const {
    return static_cast<double>(sram_r_.size) * 1e9 / profile_.sram_bw;
}

double Fabric::scrub_sram() {
    std::fill(sram_.begin(), sram_.end(), 0);
    sram_tag_restricted_ = false;
    return scrub_duration_ns();
}

void Fabric::load_dram(std::uint64_t addr, std::span<const std::uint8_t> bytes) {
    BusResponse r = bus_write(kCpuStream, addr, bytes);
    if (!r.ok())
        throw IoError(std::string("DRAM load failed with ") +
                      bus_status_name(r.status) + " at address " +
                      std::to_string(addr));
}

void Fabric::write_snapshot(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    auto dump = [&](const char* name, const Bytes& mem) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out)
            throw IoError("cannot open snapshot file " + (dir / name).string());
        out.write(reinterpret_cast<const char*>(mem.data()),
                  static_cast<std::streamsize>(mem.size()));
    };
    dump("dram.bin", dram_);
    dump("sram.bin", sram_);

    nlohmann::json sidecar;
    sidecar["dram"] = {{"base", dram_r_.base}, {"size", dram_r_.size}, {"file", "dram.bin"}};
    sidecar["sram"] = {{"base", sram_r_.base},
                       {"size", sram_r_.size},
                       {"file", "sram.bin"},
                       {"restricted_tag", sram_tag_restricted_}};
    sidecar["streams"] = nlohmann::json::array();
    for (const auto& s : streams_)
        sidecar["streams"].push_back({{"id", s.id}, {"role", s.role}});
    sidecar["smmu"] = {{"locked", policy_.locked},
                       {"entries", nlohmann::json::array()}};
    for (const auto& e : policy_.entries)
        sidecar["smmu"]["entries"].push_back(
            {{"stream", e.stream_id},
             {"base", e.base},
             {"size", e.size},
             {"access", static_cast<int>(e.allowed)}});
    std::ofstream js(dir / "layout.json");
    if (!js)
        throw IoError("cannot open snapshot sidecar");
    js << sidecar.dump(2) << '\n';
}

SmmuPolicy Fabric::permissive_policy() const {
    SmmuPolicy p;
    for (const auto& s : streams_) {
        p.entries.push_back({s.id, dram_r_.base, dram_r_.size, Access::kReadWrite});
        p.entries.push_back({s.id, sram_r_.base, sram_r_.size, Access::kReadWrite});
    }
    p.locked = false;
    return p;
}

SmmuPolicy Fabric::locked_reference_policy() const {
    SmmuPolicy p;
    for (const auto& s : streams_)
        p.entries.push_back({s.id, dram_r_.base, dram_r_.size, Access::kReadWrite});
    // Exactly one stream maps the protected SRAM range.
    p.entries.push_back({kNpuDmaStream, sram_r_.base, sram_r_.size, Access::kReadWrite});
    p.locked = true;
    return p;
}

}  // namespace tessera
