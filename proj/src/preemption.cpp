//
// SPDX-License-Identifier: Apache-2.0
//
#include "tessera/preemption.hpp"

#include <algorithm>

namespace tessera {

const char* preempt_state_name(PreemptState s) noexcept {
    switch (s) {
        case PreemptState::kRunning: return "Running";
        case PreemptState::kDmaStopped: return "DmaStopped";
        case PreemptState::kDrained: return "Drained";
        case PreemptState::kScrubbed: return "Scrubbed";
        case PreemptState::kKeysCleared: return "KeysCleared";
        case PreemptState::kSwitched: return "Switched";
        case PreemptState::kReprovisioned: return "Reprovisioned";
        case PreemptState::kRestarted: return "Restarted";
    }
    return "?";
}

double preempt_latency_ns(double sram_size_bytes, double sram_bw_bytes_per_s,
                          double t_save_ns) {
    if (sram_size_bytes < 0 || t_save_ns < 0 || sram_bw_bytes_per_s <= 0)
        throw InvalidArgumentError("preempt latency inputs must be positive");
    return sram_size_bytes * 1e9 / sram_bw_bytes_per_s + t_save_ns;
}

InferenceContext::InferenceContext(Fabric& fabric, IceRegisters& regs,
                                   std::vector<TileDescriptor> schedule,
                                   ContextOptions options)
    : fabric_(fabric), regs_(regs), tiles_(std::move(schedule)), options_(options) {
    if (tiles_.empty())
        throw InvalidArgumentError("schedule must contain at least one tile");
    for (const auto& t : tiles_) {
        if (t.base_addr % kLineBytes != 0)
            throw MisalignedError("tile base must be line-aligned");
        if (t.length == 0)
            throw InvalidArgumentError("tile length must be > 0");
        const std::uint64_t padded =
            (t.length + kLineBytes - 1) / kLineBytes * kLineBytes;
        if (padded > fabric_.sram_region().size)
            throw SramOverflowError("tile larger than the SRAM staging buffer");
    }
    record(PreemptState::kRunning, 0.0);
}

void InferenceContext::record(PreemptState s, double t_ns) {
    state_ = s;
    trace_.push_back({t_ns, s});
}

void InferenceContext::complete_tile() {
    const auto& tile = tiles_[tile_idx_];
    BusResponse rd =
        fabric_.bus_read(kNpuDmaStream, fabric_.sram_region().base, tile.length);
    if (!rd.ok())
        throw BadStateError(std::string("NPU consumption read failed with ") +
                            bus_status_name(rd.status));
    consumed_.insert(consumed_.end(), rd.data.begin(), rd.data.end());
    // Retire the tile: only the active tile is ever live in plaintext SRAM,
    // so the staging extent is zeroed once its bytes are consumed.
    const std::uint64_t padded =
        (tile.length + kLineBytes - 1) / kLineBytes * kLineBytes;
    const Bytes zeros(padded, 0);
    BusResponse wr =
        fabric_.bus_write(kNpuDmaStream, fabric_.sram_region().base, zeros);
    if (!wr.ok())
        throw BadStateError(std::string("tile retirement scrub failed with ") +
                            bus_status_name(wr.status));
    ++tile_idx_;
    line_in_tile_ = 0;
}

bool InferenceContext::step_line() {
    if (state_ == PreemptState::kRestarted)
        record(PreemptState::kRunning, now_ns_);
    if (state_ != PreemptState::kRunning)
        throw BadStateError(std::string("cannot stream in state ") +
                            preempt_state_name(state_));
    if (finished()) return false;
    if (!regs_.provisioned)
        throw IceNotProvisionedError("ICE registers are dead mid-schedule");

    const auto& tile = tiles_[tile_idx_];
    const std::uint64_t addr = tile.base_addr + line_in_tile_ * kLineBytes;
    BusResponse fetch = fabric_.bus_read(kNpuDmaStream, addr, kLineBytes);
    if (!fetch.ok())
        throw BadStateError(std::string("ciphertext fetch failed with ") +
                            bus_status_name(fetch.status));
    Line ct{};
    std::copy(fetch.data.begin(), fetch.data.end(), ct.begin());
    const LineCipher cipher(SessionKey::from_bytes(regs_.key), NonceBase{regs_.nonce});
    const Line pt = cipher.decrypt(CacheLine{addr, ct});
    if (fabric_.mte_enabled()) fabric_.tag_sram_restricted();
    BusResponse wr = fabric_.bus_write(
        kNpuDmaStream, fabric_.sram_region().base + line_in_tile_ * kLineBytes, pt);
    if (!wr.ok())
        throw BadStateError(std::string("SRAM write failed with ") +
                            bus_status_name(wr.status));

    now_ns_ += line_latency_ns(fabric_.profile(), DecryptMode::kTessera,
                               options_.timing);
    ++line_in_tile_;
    const std::uint64_t tile_lines =
        (tile.length + kLineBytes - 1) / kLineBytes;
    if (line_in_tile_ == tile_lines) complete_tile();
    return !finished();
}

void InferenceContext::run_to_completion() {
    while (step_line()) {
    }
}

std::uint64_t InferenceContext::run_lines(std::uint64_t n) {
    std::uint64_t done = 0;
    while (done < n && !finished()) {
        step_line();
        ++done;
    }
    return done;
}

PreemptReport InferenceContext::preempt() {
    if (state_ != PreemptState::kRunning)
        throw NotRunningError(std::string("preempt requires a running context, not ") +
                              preempt_state_name(state_));

    const auto& prof = fabric_.profile();
    // Stop issuing DMA; in-flight lines are modeled as already landed (the
    // step granularity is one line), so the drain is immediate and its cost
    // is part of t_save.
    record(PreemptState::kDmaStopped, now_ns_);
    record(PreemptState::kDrained, now_ns_);

    double scrub_ns;
    if (options_.hw_scrub_functional) {
        scrub_ns = fabric_.scrub_sram();
    } else {
        scrub_ns = fabric_.scrub_duration_ns();  // defective engine: time, no effect
    }
    record(PreemptState::kScrubbed, now_ns_ + scrub_ns);

    regs_.clear();
    record(PreemptState::kKeysCleared, now_ns_ + scrub_ns);

    const double total_ns = preempt_latency_ns(
        static_cast<double>(prof.sram_size), prof.sram_bw, prof.t_save_ns);
    now_ns_ += total_ns;
    record(PreemptState::kSwitched, now_ns_);

    PreemptReport report;
    report.duration_ns = total_ns;
    const auto sram = fabric_.sram_bytes();
    report.sram_zeroed = std::all_of(sram.begin(), sram.end(),
                                     [](std::uint8_t b) { return b == 0; });
    report.keys_cleared = regs_.key_is_zero() && !regs_.provisioned;
    report.resumed_tile_index = tile_idx_;
    return report;
}

void InferenceContext::resume(EnclaveState& enclave, const KeyBlob& blob,
                              const AppIdentity& caller) {
    if (state_ != PreemptState::kSwitched)
        throw BadStateError(std::string("resume requires Switched, not ") +
                            preempt_state_name(state_));
    enclave.unseal_and_provision(blob, caller, regs_);  // may throw; state keeps
    record(PreemptState::kReprovisioned, now_ns_);
    line_in_tile_ = 0;  // discard partial-tile progress, re-fetch from DRAM
    record(PreemptState::kRestarted, now_ns_);
}

void InferenceContext::write_trace_jsonl(std::ostream& out) const {
    for (const auto& e : trace_) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "{\"t_ns\": %.3f, \"state\": \"%s\"}",
                      e.t_ns, preempt_state_name(e.state));
        out << buf << '\n';
    }
}

}  // namespace tessera
