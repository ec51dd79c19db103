// SPDX-License-Identifier: Apache-2.0
//
// tessera: provisioning and simulation toolchain.
//
//   keygen    mint a device identity (simulated fuse store)
//   pack      encrypt a weight file into a packed image
//   inspect   decode an image header
//   simulate  stream  - decrypt an image through the fabric model
//             jitter  - Monte-Carlo pipeline robustness run
//   attack    run adversary scenarios (defended + negative control)
//   model     emit the analytical tables (CSV / JSON)
//
// Exit codes: 0 success; otherwise the error-class codes from
// tessera/common.hpp (printed with the message). Key material is never
// written to stdout/stderr.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tessera/attack_harness.hpp"
#include "tessera/common.hpp"
#include "tessera/ice_pipeline.hpp"
#include "tessera/key_hierarchy.hpp"
#include "tessera/memory_fabric.hpp"
#include "tessera/perf_models.hpp"
#include "tessera/platform.hpp"
#include "tessera/preemption.hpp"
#include "tessera/weight_image.hpp"

namespace {

using tessera::Bytes;

Bytes read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw tessera::IoError("cannot open " + path);
    Bytes data((std::istreambuf_iterator<char>(is)),
               std::istreambuf_iterator<char>());
    if (is.bad()) throw tessera::IoError("read failed: " + path);
    return data;
}

void write_file(const std::string& path, std::span<const std::uint8_t> data) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw tessera::IoError("cannot open " + path + " for writing");
    os.write(reinterpret_cast<const char*>(data.data()),
             static_cast<std::streamsize>(data.size()));
    if (!os) throw tessera::IoError("write failed: " + path);
}

std::string read_text(const std::string& path) {
    const Bytes raw = read_file(path);
    return std::string(raw.begin(), raw.end());
}

std::uint64_t parse_addr(const std::string& text) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 0);
    if (errno != 0 || end == text.c_str() || *end != '\0') {
        throw tessera::InvalidArgumentError("bad address: " + text);
    }
    return v;
}

// Accepts a device-public PEM or a full enclave PEM (public half is used).
tessera::DeviceIdentity load_device_public(const std::string& path) {
    const std::string pem = read_text(path);
    try {
        return tessera::DeviceIdentity::from_pem(pem);
    } catch (const tessera::Error&) {
        return tessera::EnclaveState::from_pem(pem).device_public();
    }
}

struct StreamSetup {
    tessera::Fabric fabric;
    tessera::WeightImageHeader header;
};

// Fabric sized around the image: DRAM window over the ciphertext, SRAM
// placed past it. The locked reference policy is installed up front.
StreamSetup make_stream_fabric(const tessera::PlatformProfile& profile,
                               const Bytes& image) {
    const auto header = tessera::inspect_image(image);
    const std::uint64_t dram_base = header.base_addr;
    const std::uint64_t dram_size =
        std::max<std::uint64_t>(header.ciphertext_bytes(), tessera::kLineBytes);
    std::uint64_t sram_base = dram_base + dram_size + 4096;
    sram_base = (sram_base + 63) / 64 * 64;
    tessera::Fabric fabric(profile, dram_base, dram_size, sram_base);
    fabric.configure_smmu(true, fabric.locked_reference_policy());
    fabric.load_dram(header.base_addr,
                     tessera::image_ciphertext(image, header));
    return StreamSetup{std::move(fabric), header};
}

int cmd_keygen(const std::string& out, const std::string& pub_out,
               unsigned bits, bool json) {
    auto enclave = tessera::EnclaveState::generate(bits);
    const std::string pem = enclave.to_pem();
    write_file(out, Bytes(pem.begin(), pem.end()));
    if (!pub_out.empty()) {
        const std::string pub = enclave.device_public().to_pem();
        write_file(pub_out, Bytes(pub.begin(), pub.end()));
    }
    const auto device = enclave.device_public();
    if (json) {
        nlohmann::ordered_json doc{{"bits", device.bits()},
                                   {"fingerprint", tessera::to_hex(device.fingerprint())},
                                   {"out", out}};
        if (!pub_out.empty()) doc["pub_out"] = pub_out;
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "device identity RSA-" << device.bits() << " written to "
                  << out << "\n"
                  << "fingerprint " << tessera::to_hex(device.fingerprint()) << "\n";
    }
    return 0;
}

int cmd_pack(const std::string& in, const std::string& device_path,
             const std::string& cert_path, const std::string& base_text,
             const std::string& out, bool fixed_counter, bool insecure_demo,
             bool json) {
    if (fixed_counter && !insecure_demo) {
        throw tessera::InvalidArgumentError(
            "--fixed-counter is a deliberately broken demo mode; pass "
            "--insecure-demo to confirm");
    }
    const Bytes plaintext = read_file(in);
    const auto device = load_device_public(device_path);
    const tessera::AppIdentity app{read_text(cert_path)};
    const std::uint64_t base_addr = parse_addr(base_text);

    const Bytes image =
        tessera::pack_image(plaintext, device, app, base_addr, fixed_counter);
    write_file(out, image);

    const auto header = tessera::inspect_image(image);
    if (json) {
        std::cout << tessera::inspect_json(header);
    } else {
        std::cout << "packed " << plaintext.size() << " bytes into " << out
                  << " (" << header.ciphertext_lines() << " lines at base 0x"
                  << std::hex << header.base_addr << std::dec << ")\n";
        if (fixed_counter) {
            std::cout << "WARNING: fixed-counter demo image; every line reuses "
                         "one keystream\n";
        }
    }
    return 0;
}

int cmd_inspect(const std::string& path, bool json) {
    const Bytes image = read_file(path);
    const auto header = tessera::inspect_image(image);
    std::cout << (json ? tessera::inspect_json(header)
                       : tessera::inspect_report(header));
    return 0;
}

int cmd_sim_stream(const std::string& image_path, const std::string& device_path,
                   const std::string& cert_path, const std::string& profile_name,
                   std::uint64_t tile_bytes, const std::string& out, bool json) {
    const auto profile = tessera::resolve_profile(profile_name);
    const Bytes image = read_file(image_path);
    auto setup = make_stream_fabric(profile, image);
    const auto& header = setup.header;

    auto enclave = tessera::EnclaveState::from_pem(read_text(device_path));
    const tessera::AppIdentity app{read_text(cert_path)};
    tessera::IceRegisters regs;
    enclave.unseal_and_provision(header.blob, app, regs);

    if (header.fixed_counter_demo()) {
        std::cerr << "note: fixed-counter demo image; the engine derives "
                     "counters from addresses, output will not match\n";
    }

    const auto tiles = tessera::split_into_tiles(
        header.base_addr, header.plaintext_len, tile_bytes, "tile");
    const auto report = tessera::stream_decrypt(setup.fabric, regs, tiles);
    regs.clear();

    if (!out.empty()) {
        const auto sram = setup.fabric.sram_bytes().subspan(
            0, static_cast<std::size_t>(header.plaintext_len));
        write_file(out, sram);
    }

    nlohmann::ordered_json doc{
        {"profile", profile.name},
        {"tiles", tiles.size()},
        {"lines_processed", report.lines_processed},
        {"bytes_fetched", report.bytes_fetched},
        {"sram_bytes_written", report.sram_bytes_written},
        {"bus_errors", report.errors.size()},
        {"line_latency_ns",
         tessera::line_latency_ns(profile, tessera::DecryptMode::kTessera)},
    };
    if (json) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "streamed " << report.lines_processed << " lines ("
                  << report.bytes_fetched << " bytes fetched, "
                  << report.errors.size() << " bus errors)\n";
        if (!out.empty()) std::cout << "decrypted weights written to " << out << "\n";
    }
    if (!report.errors.empty()) {
        std::cerr << "error: " << report.errors.size()
                  << " bus errors during streaming\n";
        return static_cast<int>(tessera::Errc::kBadState);
    }
    return 0;
}

int cmd_sim_jitter(const std::string& profile_name, tessera::JitterParams params,
                   const std::string& out, bool json) {
    const auto profile = tessera::resolve_profile(profile_name);
    const auto stats = tessera::simulate_jitter(profile, params);

    std::string text;
    if (json) {
        nlohmann::ordered_json doc{
            {"profile", profile.name},
            {"seed", params.seed},
            {"n_requests", stats.n_requests},
            {"sigma_ks_ns", params.sigma_ks_frac * profile.t_ks_ns},
            {"sigma_dram_ns", params.sigma_dram_frac * profile.t_dram_ns},
            {"stall_count", stats.stall_count},
            {"stall_probability", stats.stall_probability},
            {"max_fifo_occupancy_lines", stats.max_fifo_occupancy_lines},
            {"max_fifo_occupancy_bytes", stats.max_fifo_occupancy_bytes},
            {"mean_line_latency_ns", stats.mean_line_latency_ns},
            {"effective_bw_fraction", stats.effective_bw_fraction},
            {"fifo_provisioned_bytes", tessera::kProvisionedFifoBytes},
        };
        text = doc.dump(2) + "\n";
    } else {
        text = tessera::sim_stats_csv_header() + "\n" +
               tessera::sim_stats_csv_row(profile, params, stats) + "\n";
    }
    if (out.empty()) {
        std::cout << text;
    } else {
        write_file(out, Bytes(text.begin(), text.end()));
    }
    return 0;
}

int cmd_attack(const std::string& scenario, std::uint64_t seed, bool json) {
    std::vector<std::string> names;
    if (scenario == "all") {
        names = tessera::attack_scenario_names();
    } else {
        names.push_back(scenario);
    }

    int failures = 0;
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& name : names) {
        const auto result = tessera::run_attack_scenario(name, seed);
        const bool ok = result.defended.defended && !result.control.defended;
        if (!ok) ++failures;
        if (json) {
            doc.push_back({{"scenario", name},
                           {"ok", ok},
                           {"defended_arm", {{"defended", result.defended.defended},
                                             {"evidence", result.defended.evidence}}},
                           {"control_arm", {{"defended", result.control.defended},
                                            {"evidence", result.control.evidence}}}});
        } else {
            std::printf("%-26s defended arm: %-9s control arm: %s%s\n",
                        name.c_str(),
                        result.defended.defended ? "DEFENDED" : "BREACHED",
                        result.control.defended ? "defended" : "breached",
                        ok ? "" : "  <-- UNEXPECTED");
        }
    }
    if (json) std::cout << doc.dump(2) << "\n";
    return failures == 0 ? 0 : 1;
}

int cmd_model(const std::string& profile_name, const std::string& out_dir,
              const std::string& schedule_path, bool json) {
    nlohmann::ordered_json doc =
        nlohmann::ordered_json::parse(tessera::tables_json());

    if (!profile_name.empty()) {
        const auto profile = tessera::resolve_profile(profile_name);
        const auto direct = tessera::effective_bandwidth_amplified(
            profile, tessera::ThroughputMode::kDirect, 1.0);
        const auto tess = tessera::effective_bandwidth_amplified(
            profile, tessera::ThroughputMode::kTessera, 1.0);
        doc["profile"] = {
            {"name", profile.name},
            {"direct_pct", tessera::round_pct_1dp(direct.fraction)},
            {"tessera_pct", tessera::round_pct_1dp(tess.fraction)},
            {"preempt_latency_ns",
             tessera::preempt_latency_ns(
                 static_cast<double>(profile.sram_size), profile.sram_bw,
                 profile.t_save_ns)},
        };
    }
    if (!schedule_path.empty()) {
        const auto schedule = tessera::load_tile_schedule(schedule_path);
        doc["schedule"] = {
            {"entries", schedule.size()},
            {"amp_page",
             tessera::schedule_amplification(schedule,
                                             tessera::Granularity::kPage)},
            {"amp_tessera",
             tessera::schedule_amplification(schedule,
                                             tessera::Granularity::kTessera)},
        };
    }
    if (!out_dir.empty()) {
        tessera::emit_tables(out_dir);
    }

    if (json) {
        std::cout << doc.dump(2) << "\n";
    } else {
        if (!out_dir.empty()) {
            std::cout << "tables written to " << out_dir << "\n";
        } else {
            std::cout << doc.dump(2) << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tessera inline-crypto-engine reference toolchain"};
    app.require_subcommand(1);

    // keygen
    auto* keygen = app.add_subcommand("keygen", "mint a device identity");
    std::string kg_out, kg_pub;
    unsigned kg_bits = 2048;
    bool kg_json = false;
    keygen->add_option("--out", kg_out, "enclave state PEM (simulated fuses)")
        ->required();
    keygen->add_option("--pub", kg_pub, "also write the public half");
    keygen->add_option("--bits", kg_bits, "RSA modulus bits (2048 or 4096)");
    keygen->add_flag("--json", kg_json, "machine-readable output");

    // pack
    auto* pack = app.add_subcommand("pack", "encrypt weights into an image");
    std::string pk_in, pk_dev, pk_cert, pk_base = "0x80000000", pk_out;
    bool pk_fixed = false, pk_insecure = false, pk_json = false;
    pack->add_option("--in", pk_in, "plaintext weight file")->required();
    pack->add_option("--device", pk_dev, "device PEM (public or enclave)")
        ->required();
    pack->add_option("--cert", pk_cert, "app certificate file")->required();
    pack->add_option("--base-addr", pk_base,
                     "physical load address (64-byte aligned)");
    pack->add_option("--out", pk_out, "output image")->required();
    pack->add_flag("--fixed-counter", pk_fixed,
                   "broken demo mode: one keystream for every line");
    pack->add_flag("--insecure-demo", pk_insecure,
                   "required confirmation for --fixed-counter");
    pack->add_flag("--json", pk_json, "machine-readable output");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "decode an image header");
    std::string in_path;
    bool in_json = false;
    inspect->add_option("image", in_path, "packed image")->required();
    inspect->add_flag("--json", in_json, "machine-readable output");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run the fabric models");
    simulate->require_subcommand(1);
    auto* sstream = simulate->add_subcommand("stream", "decrypt an image");
    std::string ss_image, ss_dev, ss_cert, ss_profile = "i9", ss_out;
    std::uint64_t ss_tile = 4096;
    bool ss_json = false;
    sstream->add_option("--image", ss_image, "packed image")->required();
    sstream->add_option("--device", ss_dev, "enclave PEM")->required();
    sstream->add_option("--cert", ss_cert, "app certificate file")->required();
    sstream->add_option("--profile", ss_profile, "i9|xavier|orin|custom.json");
    sstream->add_option("--tile-bytes", ss_tile, "tile size in bytes");
    sstream->add_option("--out", ss_out, "write decrypted weights here");
    sstream->add_flag("--json", ss_json, "machine-readable output");

    auto* sjitter = simulate->add_subcommand("jitter", "Monte-Carlo run");
    std::string sj_profile = "i9", sj_out;
    tessera::JitterParams sj_params;
    bool sj_json = false;
    sjitter->add_option("--profile", sj_profile, "i9|xavier|orin|custom.json");
    sjitter->add_option("--seed", sj_params.seed, "RNG seed");
    sjitter->add_option("--requests", sj_params.n_requests, "request count");
    sjitter->add_option("--sigma-ks", sj_params.sigma_ks_frac,
                        "keystream sigma as a fraction of T_ks");
    sjitter->add_option("--sigma-dram", sj_params.sigma_dram_frac,
                        "DRAM sigma as a fraction of T_DRAM");
    sjitter->add_option("--out", sj_out, "write output to a file");
    sjitter->add_flag("--json", sj_json, "JSON instead of CSV");

    // attack
    auto* attack = app.add_subcommand("attack", "run adversary scenarios");
    std::string at_scenario = "all";
    std::uint64_t at_seed = 42;
    bool at_json = false;
    attack
        ->add_option("scenario", at_scenario,
                     "scenario name or 'all' (see --list)")
        ->check(CLI::IsMember([] {
            auto v = tessera::attack_scenario_names();
            v.push_back("all");
            return v;
        }()));
    attack->add_option("--seed", at_seed, "scenario RNG seed");
    attack->add_flag("--json", at_json, "machine-readable output");

    // model
    auto* model = app.add_subcommand("model", "analytical tables");
    std::string md_profile, md_out, md_schedule;
    bool md_json = false;
    model->add_option("--profile", md_profile, "focus one platform");
    model->add_option("--out", md_out, "emit CSV tables into this directory");
    model->add_option("--schedule", md_schedule,
                      "tile schedule JSON for amplification analysis");
    model->add_flag("--json", md_json, "machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);  // help/version exit 0, usage errors nonzero
    }

    try {
        if (keygen->parsed()) return cmd_keygen(kg_out, kg_pub, kg_bits, kg_json);
        if (pack->parsed()) {
            return cmd_pack(pk_in, pk_dev, pk_cert, pk_base, pk_out, pk_fixed,
                            pk_insecure, pk_json);
        }
        if (inspect->parsed()) return cmd_inspect(in_path, in_json);
        if (simulate->parsed()) {
            if (sstream->parsed()) {
                return cmd_sim_stream(ss_image, ss_dev, ss_cert, ss_profile,
                                      ss_tile, ss_out, ss_json);
            }
            return cmd_sim_jitter(sj_profile, sj_params, sj_out, sj_json);
        }
        if (attack->parsed()) return cmd_attack(at_scenario, at_seed, at_json);
        if (model->parsed()) return cmd_model(md_profile, md_out, md_schedule, md_json);
    } catch (const tessera::Error& e) {
        std::cerr << "error: " << e.what() << " ["
                  << tessera::errc_name(e.code()) << "]\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
