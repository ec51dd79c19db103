//
// SPDX-License-Identifier: Apache-2.0
//
// Context-switch safety: the preemption hook (stop DMA, drain, scrub,
// clear keys, switch) and tile-boundary resume with re-provisioning.
//
// Execution model: an InferenceContext stages one tile at a time at the
// base of SRAM; when a tile completes, the NPU consumes its logical bytes
// (reads them out over the bus) and the next tile overwrites the staging
// area. Preempting discards partial-tile progress; resume re-fetches the
// interrupted tile from its first line, so the consumed output stream and
// the final SRAM contents are bit-identical to an uninterrupted run.
//
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tessera/ice_pipeline.hpp"
#include "tessera/key_hierarchy.hpp"

namespace tessera {

enum class PreemptState {
    kRunning,
    kDmaStopped,
    kDrained,
    kScrubbed,
    kKeysCleared,
    kSwitched,
    kReprovisioned,
    kRestarted,
};

const char* preempt_state_name(PreemptState s) noexcept;

// Closed-form latency: sram_size/sram_bw + t_save, all in ns.
double preempt_latency_ns(double sram_size_bytes, double sram_bw_bytes_per_s,
                          double t_save_ns);

struct PreemptReport {
    double duration_ns = 0;
    bool sram_zeroed = false;
    bool keys_cleared = false;
    std::size_t resumed_tile_index = 0;
};

struct TraceEntry {
    double t_ns;
    PreemptState state;
};

struct ContextOptions {
    IceTimingConfig timing{};
    // Negative-control switch for the hijack attack: the scrub step still
    // runs (and takes its time) but the engine is defective and leaves
    // SRAM contents in place.
    bool hw_scrub_functional = true;
};

class InferenceContext {
public:
    // Every tile must fit the SRAM staging buffer. The registers must be
    // provisioned before the first step.
    InferenceContext(Fabric& fabric, IceRegisters& regs,
                     std::vector<TileDescriptor> schedule,
                     ContextOptions options = {});

    // Decrypt the next line of the current tile into SRAM. Returns false
    // when the whole schedule has completed. Throws BadStateError unless
    // the context is Running (or Restarted, which re-enters Running).
    bool step_line();
    void run_to_completion();
    std::uint64_t run_lines(std::uint64_t n);  // returns lines actually run

    // The preemption hook: stop DMA, drain, scrub, clear keys, switch.
    PreemptReport preempt();

    // Re-provision through the enclave and restart the interrupted tile.
    // Provisioning errors propagate and leave the context in Switched.
    void resume(EnclaveState& enclave, const KeyBlob& blob,
                const AppIdentity& caller);

    PreemptState state() const noexcept { return state_; }
    bool finished() const noexcept { return tile_idx_ >= tiles_.size(); }
    std::size_t current_tile() const noexcept { return tile_idx_; }
    double now_ns() const noexcept { return now_ns_; }

    // Plaintext the NPU has consumed so far (completed tiles only).
    std::span<const std::uint8_t> consumed() const noexcept { return consumed_; }

    const std::vector<TraceEntry>& trace() const noexcept { return trace_; }
    void write_trace_jsonl(std::ostream& out) const;

private:
    void record(PreemptState s, double t_ns);
    void complete_tile();

    Fabric& fabric_;
    IceRegisters& regs_;
    std::vector<TileDescriptor> tiles_;
    ContextOptions options_;
    std::size_t tile_idx_ = 0;
    std::uint64_t line_in_tile_ = 0;
    Bytes consumed_;
    double now_ns_ = 0;
    PreemptState state_ = PreemptState::kRunning;
    std::vector<TraceEntry> trace_;
};

}  // namespace tessera
