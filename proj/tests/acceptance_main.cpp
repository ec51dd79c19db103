// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate: the ten headline criteria, one [PASS]/[FAIL] line each,
// with the computed values inline. The process exit code is the number of
// failed criteria, so CI can gate on it directly.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tessera/aes256.hpp"
#include "tessera/attack_harness.hpp"
#include "tessera/crypto_core.hpp"
#include "tessera/ice_pipeline.hpp"
#include "tessera/key_hierarchy.hpp"
#include "tessera/memory_fabric.hpp"
#include "tessera/perf_models.hpp"
#include "tessera/preemption.hpp"
#include "tessera/weight_image.hpp"

using namespace tessera;

namespace {

void append(std::string& s, const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    if (!s.empty()) s += "; ";
    s += buf;
}

// ---- 1: context-switch latency over the built-in parts ----------------

bool criterion_preempt_latency(std::string& d) {
    const struct {
        const char* name;
        double target_us;
    } rows[] = {{"i9", 5.4}, {"xavier", 9.8}, {"orin", 5.7}};
    bool ok = true;
    for (const auto& r : rows) {
        const auto& p = builtin_profile(r.name);
        const double us =
            preempt_latency_ns(static_cast<double>(p.sram_size), p.sram_bw,
                               p.t_save_ns) / 1e3;
        const bool hit = std::abs(us - r.target_us) <= 0.05;
        ok = ok && hit;
        append(d, "%s=%.4fus (want %.1f+/-0.05)%s", r.name, us, r.target_us,
               hit ? "" : " MISS");
    }
    return ok;
}

// ---- 2: effective-throughput fractions --------------------------------

bool criterion_throughput(std::string& d) {
    const struct {
        const char* name;
        double target_pct;
    } rows[] = {{"i9", 94.4}, {"xavier", 72.0}, {"orin", 76.2}};
    bool ok = true;
    for (const auto& r : rows) {
        const auto& p = builtin_profile(r.name);
        const double pct =
            100.0 *
            effective_bandwidth_amplified(p, ThroughputMode::kDirect, 1.0).fraction;
        const bool hit = std::abs(pct - r.target_pct) <= 0.05;
        ok = ok && hit;
        append(d, "%s direct=%.3f%% (want %.1f+/-0.05%s)", r.name, pct,
               r.target_pct, hit ? "" : ", MISS");
    }
    bool tess_ok = true;
    for (const auto& p : builtin_profiles()) {
        const double rounded = round_pct_1dp(
            effective_bandwidth_amplified(p, ThroughputMode::kTessera, 1.0)
                .fraction);
        tess_ok = tess_ok && rounded == 98.5;
    }
    append(d, "tessera rounded=98.5%% on all parts: %s",
           tess_ok ? "yes" : "NO");
    return ok && tess_ok;
}

// ---- 3: fetch amplification --------------------------------------------

bool criterion_amplification(std::string& d) {
    const struct {
        std::uint64_t t;
        double a;
    } pairs[] = {{128, 32}, {288, 15}, {512, 8}, {1024, 4}, {2048, 2}, {4096, 1}};
    bool pairs_ok = true;
    for (const auto& p : pairs) {
        pairs_ok = pairs_ok && amplification(p.t, Granularity::kPage) == p.a;
    }
    bool aligned_ok = true;
    for (std::uint64_t t = 64; t <= 64 * 4096; t += 64) {
        aligned_ok = aligned_ok && amplification(t, Granularity::kTessera) == 1.0;
    }
    double worst = 0.0;
    for (std::uint64_t t = 4096; t <= 640000; ++t) {
        worst = std::max(worst, amplification(t, Granularity::kTessera));
    }
    const bool bound_ok = worst <= 1.016;
    append(d, "page pairs exact: %s", pairs_ok ? "yes" : "NO");
    append(d, "aligned tiles amp=1: %s", aligned_ok ? "yes" : "NO");
    append(d, "worst tessera amp on [4096,640000]=%.6f (limit 1.016)%s", worst,
           bound_ok ? "" : " MISS");
    return pairs_ok && aligned_ok && bound_ok;
}

// ---- 4: silicon and energy headline figures ----------------------------

bool criterion_silicon_energy(std::string& d) {
    const auto& i9 = builtin_profile("i9");
    const auto r = ppa(PpaParams{}, i9.bw_ceiling);
    const bool area_ok = std::abs(r.area_mm2 - 0.04) < 1e-15;
    const bool power_ok = std::abs(r.power_w - 0.0896) < 1e-12;
    const bool blocks_ok = r.aes_blocks_per_s == 1.4e9;

    const EnergyParams ep;
    const auto page = inference_energy(ep, 5.0);
    const auto line = inference_energy(ep, 1.0);
    const bool disp_ok = format_energy_mj(page.dram_mj) == "28.0" &&
                         format_energy_mj(line.dram_mj) == "5.6";
    const bool ice_ok = std::abs(line.ice_mj - 0.19) <= 0.01;

    const double fifo = fifo_high_water_bytes(i9, 100.0);
    const bool fifo_ok = fifo == 2240.0;

    append(d, "area=%.6gmm2%s", r.area_mm2, area_ok ? "" : " MISS");
    append(d, "power=%.4gW%s", r.power_w, power_ok ? "" : " MISS");
    append(d, "blocks/s=%.3g%s", r.aes_blocks_per_s, blocks_ok ? "" : " MISS");
    append(d, "dram display=%s/%s%s", format_energy_mj(page.dram_mj).c_str(),
           format_energy_mj(line.dram_mj).c_str(), disp_ok ? "" : " MISS");
    append(d, "ice=%.5fmJ (want 0.19+/-0.01)%s", line.ice_mj,
           ice_ok ? "" : " MISS");
    append(d, "fifo=%.0fB%s", fifo, fifo_ok ? "" : " MISS");
    return area_ok && power_ok && blocks_ok && disp_ok && ice_ok && fifo_ok;
}

// ---- 5: keystream-FIFO jitter robustness -------------------------------

bool criterion_jitter(std::string& d) {
    bool ok = true;
    for (const char* name : {"i9", "xavier", "orin"}) {
        const auto& p = builtin_profile(name);
        double worst_stall = 0.0;
        std::uint64_t occ_min = UINT64_MAX, occ_max = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            JitterParams params;  // defaults: 1e5 requests, 0.1/0.2 sigma
            params.seed = seed;
            const SimStats s = simulate_jitter(p, params);
            worst_stall = std::max(worst_stall, s.stall_probability);
            occ_min = std::min(occ_min, s.max_fifo_occupancy_lines);
            occ_max = std::max(occ_max, s.max_fifo_occupancy_lines);
        }
        const bool stall_ok = worst_stall < 0.001;
        const bool occ_ok =
            occ_min >= 10 && occ_max <= 120 && occ_max * kLineBytes <= 4096;
        ok = ok && stall_ok && occ_ok;
        append(d, "%s stall<=%.4f%%%s occ=[%llu,%llu]ln%s", name,
               100.0 * worst_stall, stall_ok ? "" : " MISS(limit 0.1%)",
               static_cast<unsigned long long>(occ_min),
               static_cast<unsigned long long>(occ_max),
               occ_ok ? "" : " MISS(band [10,120], <=4096B)");
    }
    return ok;
}

// ---- 6: crypto property suite -------------------------------------------

bool criterion_crypto(std::string& d) {
    // exhaustive counter uniqueness over 2^16 lines
    NonceBase iv;
    for (std::size_t i = 0; i < iv.bytes.size(); ++i) {
        iv.bytes[i] = static_cast<std::uint8_t>(0xA0 + i);
    }
    bool unique_ok = true;
    for (std::uint64_t lineno = 0; lineno < (1ULL << 16) && unique_ok; ++lineno) {
        const auto ctrs = derive_counters(iv, lineno * kLineBytes);
        for (std::size_t j = 0; j < ctrs.size(); ++j) {
            if (std::memcmp(ctrs[j].bytes.data(), iv.bytes.data(), 12) != 0 ||
                get_be32(ctrs[j].bytes.data() + 12) != 4 * lineno + j) {
                unique_ok = false;
            }
        }
    }

    const SessionKey key = SessionKey::random();
    const LineCipher cipher(key, NonceBase::random());
    std::mt19937_64 eng(0x7e55e7a);
    const std::uint64_t line_count = kCounterAddrLimit / kLineBytes;

    std::size_t alias_correct = 0;
    for (int i = 0; i < 10000; ++i) {
        const std::uint64_t a = (eng() % line_count) * kLineBytes;
        std::uint64_t b = (eng() % line_count) * kLineBytes;
        if (b == a) b = (a + kLineBytes) % (line_count * kLineBytes);
        CacheLine pt{a, {}};
        for (auto& byte : pt.data) byte = static_cast<std::uint8_t>(eng());
        const Line ct = cipher.encrypt(pt);
        const Line relocated = cipher.decrypt(CacheLine{b, ct});
        if (relocated == pt.data) ++alias_correct;
    }

    std::size_t rt_bad = 0;
    for (int i = 0; i < 10000; ++i) {
        const std::uint64_t a = (eng() % line_count) * kLineBytes;
        CacheLine pt{a, {}};
        for (auto& byte : pt.data) byte = static_cast<std::uint8_t>(eng());
        if (cipher.decrypt(CacheLine{a, cipher.encrypt(pt)}) != pt.data) ++rt_bad;
    }

    // FIPS-197 C.3 AES-256 single block
    std::array<std::uint8_t, 32> k{};
    for (std::size_t i = 0; i < 32; ++i) k[i] = static_cast<std::uint8_t>(i);
    const Bytes fips_pt = from_hex("00112233445566778899aabbccddeeff");
    const Bytes fips_ct = from_hex("8ea2b7ca516745bfeafc49904b496089");
    std::array<std::uint8_t, 16> block{}, out{};
    std::copy(fips_pt.begin(), fips_pt.end(), block.begin());
    Aes256(std::span<const std::uint8_t, 32>(k)).encrypt_block(block.data(),
                                                               out.data());
    const bool fips_ok = std::memcmp(out.data(), fips_ct.data(), 16) == 0;

    // SP 800-38A F.5.5 CTR-AES256 block 1
    const Bytes sp_key = from_hex(
        "603deb1015ca71be2b73aef0857d77811f352c073b6108d72d9810a30914dff4");
    const Bytes sp_ctr = from_hex("f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff");
    const Bytes sp_pt = from_hex("6bc1bee22e409f96e93d7e117393172a");
    const Bytes sp_ct = from_hex("601ec313775789a5b7a7f504bbf3d228");
    std::array<std::uint8_t, 32> k2{};
    std::copy(sp_key.begin(), sp_key.end(), k2.begin());
    std::array<std::uint8_t, 16> ctr{}, ks{};
    std::copy(sp_ctr.begin(), sp_ctr.end(), ctr.begin());
    Aes256(std::span<const std::uint8_t, 32>(k2)).encrypt_block(ctr.data(),
                                                                ks.data());
    bool sp_ok = true;
    for (std::size_t i = 0; i < 16; ++i) {
        sp_ok = sp_ok && static_cast<std::uint8_t>(ks[i] ^ sp_pt[i]) == sp_ct[i];
    }

    append(d, "counter uniqueness 2^16 lines: %s", unique_ok ? "yes" : "NO");
    append(d, "alias correct=%zu/10000 (want 0)", alias_correct);
    append(d, "round-trip failures=%zu/10000", rt_bad);
    append(d, "reference vectors: %s", (fips_ok && sp_ok) ? "match" : "MISS");
    return unique_ok && alias_correct == 0 && rt_bad == 0 && fips_ok && sp_ok;
}

// ---- 7: fixed-counter leak fractions ------------------------------------

bool criterion_leak(std::string& d) {
    std::size_t fixed_full = 0, derived_zero = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const auto img =
            SparseWeightImage::random(64, 0.3, 1000 + static_cast<std::uint64_t>(t));
        const auto broken =
            fixed_counter_leak(img, CounterScheme::kFixed, 0x80000000);
        const auto sound =
            fixed_counter_leak(img, CounterScheme::kAddressDerived, 0x80000000);
        if (broken.evidence["recovered_fraction"].get<double>() == 1.0) {
            ++fixed_full;
        }
        if (sound.evidence["recovered_fraction"].get<double>() == 0.0 &&
            sound.defended) {
            ++derived_zero;
        }
    }
    append(d, "fixed counters: %zu/%d trials fully recovered", fixed_full, trials);
    append(d, "address-derived: %zu/%d trials leak-free", derived_zero, trials);
    return fixed_full == trials && derived_zero == trials;
}

// ---- 8: attack suite ------------------------------------------------------

bool criterion_attacks(std::string& d) {
    bool ok = true;
    for (const char* name :
         {"cold_boot", "rogue_dma", "preempt_hijack", "confused_deputy"}) {
        const ScenarioResult r = run_attack_scenario(name, 42);
        bool arm_ok = r.defended.defended && !r.control.defended;
        if (std::strcmp(name, "cold_boot") == 0) {
            arm_ok = arm_ok &&
                     r.control.evidence["recovered_fraction"].get<double>() ==
                         1.0 &&
                     r.defended.evidence["recovered_fraction"].get<double>() ==
                         0.0;
        }
        ok = ok && arm_ok;
        append(d, "%s: %s", name, arm_ok ? "defended/control ok" : "MISS");
    }
    return ok;
}

// ---- 9: preemption integration -------------------------------------------

bool criterion_preemption(std::string& d) {
    EnclaveState enclave = EnclaveState::generate(2048);
    const AppIdentity app{"vendor=acme;app=npu-runtime;ver=1.0"};
    const SessionKey k_msk = SessionKey::random();
    const NonceBase iv = NonceBase::random();
    const KeyBlob blob = seal_model_key(enclave.device_public(), k_msk, app, iv);

    PlatformProfile prof;
    prof.name = "acceptance";
    prof.description = "acceptance rig";
    prof.memory_type = "model";
    prof.t_ks_ns = 4.2;
    prof.t_dram_ns = 71.6;
    prof.bw_ceiling = 22.4e9;
    prof.sram_size = 512;
    prof.sram_bw = 512e9;
    prof.t_save_ns = 1500.0;

    const std::uint64_t base = 0x100000;
    const Bytes plaintext = random_bytes(64 * kLineBytes);  // 16 tiles x 4 lines
    const auto schedule = split_into_tiles(base, plaintext.size(), 256);

    const LineCipher cipher(k_msk, iv);
    Bytes ciphertext(plaintext.size());
    for (std::size_t i = 0; i < plaintext.size(); i += kLineBytes) {
        CacheLine line{base + i, {}};
        std::memcpy(line.data.data(), plaintext.data() + i, kLineBytes);
        const Line ct = cipher.encrypt(line);
        std::memcpy(ciphertext.data() + i, ct.data(), kLineBytes);
    }

    auto fresh_fabric = [&]() {
        Fabric f(prof, base, plaintext.size(), 0x200000);
        f.configure_smmu(true, f.locked_reference_policy());
        f.load_dram(base, ciphertext);
        return f;
    };
    auto provision = [&]() {
        IceRegisters regs;
        enclave.unseal_and_provision(blob, app, regs);
        return regs;
    };

    Fabric ref_fabric = fresh_fabric();
    IceRegisters ref_regs = provision();
    InferenceContext ref(ref_fabric, ref_regs, schedule);
    ref.run_to_completion();
    const Bytes ref_out(ref.consumed().begin(), ref.consumed().end());
    const Bytes ref_sram(ref_fabric.sram_bytes().begin(),
                         ref_fabric.sram_bytes().end());
    if (ref_out != plaintext) {
        append(d, "reference run does not reproduce the plaintext");
        return false;
    }

    std::mt19937_64 eng(20260814);
    std::size_t good = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t cut = 1 + eng() % 63;  // strictly mid-schedule
        Fabric fabric = fresh_fabric();
        IceRegisters regs = provision();
        InferenceContext ctx(fabric, regs, schedule);
        ctx.run_lines(cut);
        const PreemptReport rep = ctx.preempt();
        const bool clean = rep.sram_zeroed && rep.keys_cleared &&
                           regs.key_is_zero() && !regs.provisioned;
        ctx.resume(enclave, blob, app);
        ctx.run_to_completion();
        const Bytes out(ctx.consumed().begin(), ctx.consumed().end());
        const Bytes sram(fabric.sram_bytes().begin(), fabric.sram_bytes().end());
        if (clean && out == ref_out && sram == ref_sram) ++good;
    }
    append(d, "%zu/%d random preemption points: scrubbed, keys clear, output "
              "bit-identical", good, trials);
    return good == trials;
}

// ---- 10: key hierarchy ----------------------------------------------------

bool criterion_key_hierarchy(std::string& d) {
    EnclaveState device_a = EnclaveState::generate(2048);
    EnclaveState device_b = EnclaveState::generate(2048);
    const AppIdentity app{"vendor=acme;app=vision;ver=1.0"};
    const AppIdentity other{"vendor=eve;app=exfil;ver=6.66"};
    const SessionKey k_msk = SessionKey::random();
    const NonceBase iv = NonceBase::random();
    const KeyBlob blob = seal_model_key(device_a.device_public(), k_msk, app, iv);

    std::size_t tamper_ok = 0;
    IceRegisters regs;
    for (std::size_t pos = 0; pos < blob.oaep_ciphertext.size(); ++pos) {
        KeyBlob bad = blob;
        bad.oaep_ciphertext[pos] ^= 0xFF;
        try {
            device_a.unseal_and_provision(bad, app, regs);
        } catch (const OaepDecodeError&) {
            if (regs.key_is_zero() && !regs.provisioned) ++tamper_ok;
        } catch (const Error&) {
        }
    }

    bool cross_device = false;
    try {
        device_b.unseal_and_provision(blob, app, regs);
    } catch (const OaepDecodeError&) {
        cross_device = regs.key_is_zero();
    }
    bool cross_app = false;
    try {
        device_a.unseal_and_provision(blob, other, regs);
    } catch (const AppBindingMismatchError&) {
        cross_app = regs.key_is_zero();
    }

    bool legit = false;
    try {
        device_a.unseal_and_provision(blob, app, regs);
        legit = regs.provisioned &&
                std::memcmp(regs.key.data(), k_msk.bytes().data(), 32) == 0 &&
                std::memcmp(regs.nonce.data(), iv.bytes.data(), 12) == 0;
    } catch (const Error&) {
    }

    append(d, "tamper %zu/%zu bytes fail OAEP with registers untouched",
           tamper_ok, blob.oaep_ciphertext.size());
    append(d, "cross-device abort: %s", cross_device ? "yes" : "NO");
    append(d, "cross-app abort: %s", cross_app ? "yes" : "NO");
    append(d, "legitimate provisioning: %s", legit ? "ok" : "NO");
    return tamper_ok == blob.oaep_ciphertext.size() && cross_device &&
           cross_app && legit;
}

struct Criterion {
    const char* name;
    std::function<bool(std::string&)> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"preempt-latency", criterion_preempt_latency},
        {"throughput-fractions", criterion_throughput},
        {"fetch-amplification", criterion_amplification},
        {"silicon-and-energy", criterion_silicon_energy},
        {"jitter-robustness", criterion_jitter},
        {"crypto-properties", criterion_crypto},
        {"fixed-counter-leak", criterion_leak},
        {"attack-suite", criterion_attacks},
        {"preemption-integration", criterion_preemption},
        {"key-hierarchy", criterion_key_hierarchy},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::string detail;
        bool ok = false;
        try {
            ok = criteria[i].run(detail);
        } catch (const std::exception& e) {
            append(detail, "unexpected exception: %s", e.what());
        }
        std::printf("[%s] %2zu %-24s %s\n", ok ? "PASS" : "FAIL", i + 1,
                    criteria[i].name, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    std::printf("%zu/%zu acceptance criteria passed\n",
                criteria.size() - static_cast<std::size_t>(failures),
                criteria.size());
    return failures;
}
