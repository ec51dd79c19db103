//
// SPDX-License-Identifier: Apache-2.0
//
// Executable adversary scenarios. Each scenario runs twice: once against the
// protected configuration (expected verdict: defended) and once against a
// deliberately broken negative control (expected verdict: not defended), so
// a vacuous matcher or check cannot pass silently.
//
// Scenarios:
//   cold_boot          raw DRAM dump scanned for known plaintext lines
//   rogue_dma          non-NPU stream sweeps the private SRAM window
//   preempt_hijack     follow-on task inspects SRAM right after a preempt
//   confused_deputy    impostor cert, per-byte blob tamper, sibling replay
//   alias_replay       ciphertext relocated in DRAM, streamed from new address
//   fixed_counter_leak XOR cancellation over a sparse image, zero line known
//   fixed_counter_leak_blind  same, zero line located via ciphertext collisions
//
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tessera/crypto_core.hpp"
#include "tessera/key_hierarchy.hpp"
#include "tessera/memory_fabric.hpp"
#include "tessera/preemption.hpp"

namespace tessera {

struct AttackVerdict {
    std::string scenario;
    bool defended = false;
    nlohmann::ordered_json evidence;

    std::string to_json() const;
};

// Plaintext model with a declared sparsity pattern (all-zero lines), the
// shape that makes fixed-counter XOR cancellation productive.
struct SparseWeightImage {
    std::vector<Line> lines;
    std::vector<bool> zero_mask;

    // At least one zero line regardless of the requested fraction.
    static SparseWeightImage random(std::size_t n_lines, double zero_fraction,
                                    std::uint64_t seed);

    std::size_t zero_count() const;
    // Index of some declared zero line; NoZeroLineError if none exists.
    std::size_t any_zero_line() const;
};

// Scan a DRAM window for 64-byte windows equal to known plaintext lines
// (byte-granularity sliding window). canary_index selects the line whose
// recovery validates the matcher itself.
AttackVerdict attack_cold_boot(const Fabric& fabric, std::uint64_t region_base,
                               std::uint64_t region_len,
                               const std::vector<Line>& known_plaintext,
                               std::size_t canary_index);

// Reads and writes every SRAM line from the rogue stream, plus one ordinary
// DRAM read. `staged` is the plaintext the defender currently holds in SRAM;
// it is only used to grade what a successful read would have leaked.
AttackVerdict attack_rogue_dma(Fabric& fabric,
                               std::span<const std::uint8_t> staged);

// Preempts the running context, then reads the whole SRAM as the follow-on
// task. Defended iff every byte is zero (and the key register is clear).
AttackVerdict attack_preempt_hijack(Fabric& fabric, InferenceContext& context);

// (a) impostor certificate, (b) single-byte tamper at each given position of
// the OAEP ciphertext (empty = every position), presented by the legitimate
// caller, (c) replay under a sibling app. Defended iff all abort and the
// register file stays untouched.
AttackVerdict attack_confused_deputy(EnclaveState& enclave, const KeyBlob& blob,
                                     const AppIdentity& legit,
                                     const AppIdentity& impostor,
                                     const AppIdentity& sibling,
                                     std::vector<std::size_t> tamper_positions,
                                     IceRegisters& regs);

// Copies `n_lines` of ciphertext from src_base to dst_base inside DRAM using
// the rogue stream (ordinary DRAM traffic, which the reference policy
// permits), streams the relocated window through the engine, and compares
// the SRAM output against the true plaintext line by line.
AttackVerdict attack_alias_replay(Fabric& fabric, IceRegisters& regs,
                                  std::uint64_t src_base, std::uint64_t dst_base,
                                  const std::vector<Line>& plaintext);

enum class CounterScheme { kFixed, kAddressDerived };

// Known-zero-line attack: recover P_i = C_i xor C_z for a declared zero
// line z, count exact recoveries over the nonzero lines.
AttackVerdict fixed_counter_leak(const SparseWeightImage& image,
                                 CounterScheme scheme, std::uint64_t base_addr);

// No-hint variant: the attacker first locates the zero-line class as the
// largest set of identical ciphertext lines (needs >= 2 zero lines to give
// a collision signal), then runs the same cancellation.
AttackVerdict fixed_counter_leak_blind(const SparseWeightImage& image,
                                       CounterScheme scheme,
                                       std::uint64_t base_addr);

struct ScenarioResult {
    AttackVerdict defended;  // protected configuration
    AttackVerdict control;   // deliberately broken configuration
};

const std::vector<std::string>& attack_scenario_names();

// Builds the full environment (enclave, app, image, fabric) for the named
// scenario and runs both arms. Throws InvalidArgumentError for unknown names.
ScenarioResult run_attack_scenario(const std::string& name, std::uint64_t seed);

std::vector<ScenarioResult> run_all_attacks(std::uint64_t seed);

}  // namespace tessera
