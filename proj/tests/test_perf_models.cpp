// SPDX-License-Identifier: Apache-2.0
//
// Analytical model oracle checks: amplification pairs, throughput
// fractions, energy, PPA, rounding policy, and table emission.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tessera/common.hpp"
#include "tessera/perf_models.hpp"

using namespace tessera;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const std::string& text) {
    return text.substr(0, text.find('\n'));
}

}  // namespace

TEST_CASE("amplification pairs for the reference tile classes") {
    struct Row {
        std::uint64_t t;
        double page;
        double tessera;
    };
    const Row rows[] = {
        {128, 32.0, 1.0},          {288, 15.0, 320.0 / 288.0},
        {512, 8.0, 1.0},           {1024, 4.0, 1.0},
        {2048, 2.0, 1.0},          {4096, 1.0, 1.0},
    };
    for (const auto& r : rows) {
        CAPTURE(r.t);
        CHECK(amplification(r.t, Granularity::kPage) == r.page);
        CHECK(amplification(r.t, Granularity::kTessera) == r.tessera);
    }
    // the published table rows carry exactly these tile sizes
    const auto& classes = reference_tile_classes();
    REQUIRE(classes.size() == 6);
    for (std::size_t i = 0; i < classes.size(); ++i)
        CHECK(classes[i].tile_bytes == rows[i].t);
}

TEST_CASE("tessera amplification stays under 1.016 for large tiles") {
    CHECK(amplification(4097, Granularity::kTessera) == 4160.0 / 4097.0);
    for (std::uint64_t t = 4096; t <= 640000; t += 97) {
        const double a = amplification(t, Granularity::kTessera);
        REQUIRE(a >= 1.0);
        REQUIRE(a <= 1.016);
    }
    // exact when the tile is already line-aligned
    CHECK(amplification(64 * 977, Granularity::kTessera) == 1.0);
    // within the sub-page tile regime the page engine always fetches at
    // least as much as the line engine
    for (std::uint64_t t : {64u, 100u, 1000u, 2048u, 4000u, 4096u}) {
        CHECK(amplification(t, Granularity::kPage) >=
              amplification(t, Granularity::kTessera));
    }
    CHECK_THROWS_AS(amplification(0, Granularity::kPage), InvalidArgumentError);
}

TEST_CASE("direct-mode fractions carry the serialized AES penalty") {
    CHECK(effective_bandwidth_amplified(builtin_profile("i9"),
                                        ThroughputMode::kDirect, 1.0)
              .fraction == doctest::Approx(0.9445910290237467).epsilon(1e-15));
    CHECK(effective_bandwidth_amplified(builtin_profile("xavier"),
                                        ThroughputMode::kDirect, 1.0)
              .fraction == doctest::Approx(0.72).epsilon(1e-15));
    CHECK(effective_bandwidth_amplified(builtin_profile("orin"),
                                        ThroughputMode::kDirect, 1.0)
              .fraction == doctest::Approx(0.7618110236220472).epsilon(1e-15));

    // tessera mode is platform-independent: burst/(burst+xor)
    for (const auto& p : builtin_profiles()) {
        CHECK(effective_bandwidth_amplified(p, ThroughputMode::kTessera, 1.0)
                  .fraction == 128.0 / 130.0);
        CHECK(effective_bandwidth_amplified(p, ThroughputMode::kBaseline, 1.0)
                  .fraction == 1.0);
    }
}

TEST_CASE("rounding policy is half-up at one decimal") {
    const double i9 = effective_bandwidth_amplified(
        builtin_profile("i9"), ThroughputMode::kDirect, 1.0).fraction;
    const double xavier = effective_bandwidth_amplified(
        builtin_profile("xavier"), ThroughputMode::kDirect, 1.0).fraction;
    const double orin = effective_bandwidth_amplified(
        builtin_profile("orin"), ThroughputMode::kDirect, 1.0).fraction;
    CHECK(round_pct_1dp(i9) == 94.5);
    CHECK(round_pct_1dp(xavier) == 72.0);
    CHECK(round_pct_1dp(orin) == 76.2);
    CHECK(round_pct_1dp(128.0 / 130.0) == 98.5);
    // 0.0625 * 1000 is exactly 62.5: half-up keeps the upper value
    CHECK(round_pct_1dp(0.0625) == 6.3);
    CHECK(round_pct_1dp(0.0) == 0.0);
    CHECK(round_pct_1dp(1.0) == 100.0);
}

TEST_CASE("absolute bandwidth figures") {
    const auto& i9 = builtin_profile("i9");
    const auto tess = effective_bandwidth_amplified(i9, ThroughputMode::kTessera, 1.0);
    CHECK(tess.bytes_per_s ==
          doctest::Approx(22.055384615384615e9).epsilon(1e-12));
    const auto base5 = effective_bandwidth_amplified(i9, ThroughputMode::kBaseline, 5.0);
    CHECK(base5.bytes_per_s == 4.48e9);
    CHECK(base5.fraction == doctest::Approx(0.2).epsilon(1e-15));
    // tile-driven form with an aligned tile reduces to the amp=1 case
    const auto by_tile = effective_bandwidth(i9, ThroughputMode::kDirect, 4096);
    CHECK(by_tile.fraction ==
          effective_bandwidth_amplified(i9, ThroughputMode::kDirect, 1.0).fraction);
    CHECK_THROWS_AS(
        effective_bandwidth_amplified(i9, ThroughputMode::kBaseline, 0.5),
        InvalidArgumentError);
}

TEST_CASE("energy breakdown for the reference model") {
    const EnergyParams ep;
    const auto page = inference_energy(ep, 5.0);
    const auto line = inference_energy(ep, 1.0);

    CHECK(page.dram_mj == doctest::Approx(28.08).epsilon(1e-12));
    CHECK(line.dram_mj == doctest::Approx(5.616).epsilon(1e-12));
    CHECK(line.ice_mj == doctest::Approx(0.19058823529411764).epsilon(1e-12));
    CHECK(line.total_mj == doctest::Approx(5.806588235294117).epsilon(1e-12));
    CHECK(line.load_time_ms == doctest::Approx(2.1176470588235294).epsilon(1e-12));
    CHECK(page.dram_mj - line.total_mj > 22.0);

    CHECK(format_energy_mj(page.dram_mj) == "28.0");
    CHECK(format_energy_mj(line.dram_mj) == "5.6");
    CHECK(format_energy_mj(line.ice_mj) == "0.1");

    EnergyParams bad;
    bad.model_bytes = 0;
    CHECK_THROWS_AS(inference_energy(bad, 1.0), InvalidArgumentError);
    CHECK_THROWS_AS(inference_energy(ep, 0.0), InvalidArgumentError);
}

TEST_CASE("PPA projection at the i9 ceiling") {
    const PpaParams pp;
    const auto r = ppa(pp, builtin_profile("i9").bw_ceiling);
    CHECK(r.area_mm2 == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(r.power_w == doctest::Approx(0.0896).epsilon(1e-12));
    CHECK(r.aes_blocks_per_s == 1.4e9);

    PpaParams bad;
    bad.um2_per_ge = 0;
    CHECK_THROWS_AS(ppa(bad, 1.0), InvalidArgumentError);
    CHECK_THROWS_AS(ppa(pp, 0.0), InvalidArgumentError);
}

TEST_CASE("emitted tables are deterministic and carry the display figures") {
    namespace fs = std::filesystem;
    const fs::path a = fs::temp_directory_path() / "tessera_tables_a";
    const fs::path b = fs::temp_directory_path() / "tessera_tables_b";
    fs::remove_all(a);
    fs::remove_all(b);
    emit_tables(a);
    emit_tables(b);

    const char* files[] = {"platforms.csv", "preempt_latency.csv",
                           "throughput.csv", "amplification.csv", "energy.csv",
                           "ppa.csv"};
    for (const char* f : files) {
        CAPTURE(f);
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }

    CHECK(first_line(slurp(a / "amplification.csv")) ==
          "layer,tile_bytes,amp_page,amp_tessera");
    const std::string energy = slurp(a / "energy.csv");
    CHECK(energy.find(",28.0\n") != std::string::npos);
    CHECK(energy.find(",5.6\n") != std::string::npos);
    const std::string throughput = slurp(a / "throughput.csv");
    CHECK(throughput.find("i9,direct,") != std::string::npos);
    CHECK(throughput.find(",98.5,") != std::string::npos);
    const std::string ppa_csv = slurp(a / "ppa.csv");
    CHECK(ppa_csv.find("0.04,") != std::string::npos);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("tables_json round-trips through a parser") {
    const std::string text = tables_json();
    const auto doc = nlohmann::json::parse(text);
    REQUIRE(doc.contains("platforms"));
    REQUIRE(doc.contains("preempt_latency"));
    REQUIRE(doc.contains("throughput"));
    REQUIRE(doc.contains("amplification"));
    REQUIRE(doc.contains("energy"));
    REQUIRE(doc.contains("ppa"));

    CHECK(doc["platforms"].size() == 3);
    bool saw_i9 = false;
    for (const auto& row : doc["throughput"]) {
        if (row["platform"] == "i9") {
            saw_i9 = true;
            CHECK(row["direct_pct"].get<double>() == 94.5);
            CHECK(row["tessera_pct"].get<double>() == 98.5);
            CHECK(row["baseline_pct"].get<double>() == 100.0);
        }
    }
    CHECK(saw_i9);
    CHECK(doc["ppa"]["area_mm2"].get<double>() ==
          doctest::Approx(0.04).epsilon(1e-12));
    CHECK(doc["energy"]["savings_mj"].get<double>() > 22.0);
    CHECK(doc["energy"]["load_time_ms"].get<double>() ==
          doctest::Approx(2.1176470588235294).epsilon(1e-12));
    // emission is deterministic
    CHECK(tables_json() == text);
}

TEST_CASE("tile schedules load from JSON and aggregate") {
    namespace fs = std::filesystem;
    const fs::path file = fs::temp_directory_path() / "tessera_sched.json";
    {
        std::ofstream out(file);
        out << R"([
            {"name": "bn",   "tile_bytes": 128,  "count": 2},
            {"name": "conv", "tile_bytes": 4096, "count": 1}
        ])";
    }
    const auto sched = load_tile_schedule(file);
    REQUIRE(sched.size() == 2);
    CHECK(sched[0].name == "bn");
    CHECK(sched[0].tile_bytes == 128);
    CHECK(sched[0].count == 2);

    // page: (2*128*32 + 4096*1) / (2*128 + 4096) = 12288/4352
    CHECK(schedule_amplification(sched, Granularity::kPage) ==
          doctest::Approx(12288.0 / 4352.0).epsilon(1e-15));
    CHECK(schedule_amplification(sched, Granularity::kTessera) == 1.0);

    auto write = [&](const char* body) {
        std::ofstream out(file);
        out << body;
    };
    write("{\"not\": \"an array\"}");
    CHECK_THROWS_AS(load_tile_schedule(file), BadFormatError);
    write("[{\"name\": \"x\", \"tile_bytes\": 64}]");
    CHECK_THROWS_AS(load_tile_schedule(file), BadFormatError);
    write("[{\"name\": \"x\", \"tile_bytes\": 0, \"count\": 1}]");
    CHECK_THROWS_AS(load_tile_schedule(file), BadFormatError);
    write("[]");
    CHECK_THROWS_AS(load_tile_schedule(file), BadFormatError);
    write("not json at all");
    CHECK_THROWS_AS(load_tile_schedule(file), BadFormatError);
    CHECK_THROWS_AS(load_tile_schedule(file.parent_path() / "absent.json"),
                    IoError);
    fs::remove(file);

    const std::vector<TileScheduleEntry> none;
    CHECK_THROWS_AS(schedule_amplification(none, Granularity::kPage),
                    InvalidArgumentError);
}
