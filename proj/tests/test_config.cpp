#include "nrv2x/config.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace nrv2x;

TEST_CASE("empty document resolves to the defaults")
{
    const ScenarioConfig cfg = parse_config("");
    const ScenarioConfig def;
    CHECK(fingerprint(cfg) == fingerprint(def));
    CHECK(cfg.road_length_m == 2000.0);
    CHECK(cfg.lanes_per_direction == 2);
    CHECK(cfg.lane_width_m == 4.0);
    CHECK(cfg.speed_stddev_kmh == 7.0);
    CHECK(cfg.speed_limit_kmh == 120.0);
    CHECK(cfg.fc_ghz == 5.9);
    CHECK(cfg.bandwidth_mhz == 20.0);
    CHECK(cfg.noise_figure_db == 9.0);
    CHECK(cfg.antenna_gain_tx_dbi == 3.0);
    CHECK(cfg.antenna_gain_rx_dbi == 3.0);
    CHECK(cfg.packet_size_bytes == 350);
    CHECK(cfg.pps == 10.0);
    CHECK(cfg.harq_max_attempts == 3);
    CHECK(cfg.subchannel_prbs == 10);
    CHECK(cfg.num_subchannels == 5);
    CHECK(cfg.subchannels_per_packet == 2);
    CHECK(cfg.keep_probability == 0.4);
    CHECK(cfg.allocation_period_ms == 100.0);
    CHECK(cfg.sensing_threshold_dbm == -110.0);
    CHECK(cfg.shadowing_sigma_db == 3.0);
    CHECK(cfg.decorr_distance_m == 25.0);
    CHECK(cfg.prr_bin_width_m == 25.0);
    CHECK(cfg.max_eval_distance_m == 500.0);
    CHECK(cfg.packet_bits() == 2800);
}

TEST_CASE("dmrs follows the subcarrier spacing unless overridden")
{
    CHECK(parse_config("scs_khz: 30").dmrs_re_per_slot() == 18);
    CHECK(parse_config("scs_khz: 15").dmrs_re_per_slot() == 24);
    CHECK(parse_config("scs_khz: 15\ndmrs_re_per_slot: 12").dmrs_re_per_slot() == 12);
}

TEST_CASE("slot timing")
{
    ScenarioConfig cfg;
    cfg.scs_khz = 15;
    CHECK(cfg.slot_duration_s() == doctest::Approx(1e-3));
    CHECK(cfg.slots_per_period() == 100);
    cfg.scs_khz = 30;
    CHECK(cfg.slot_duration_s() == doctest::Approx(0.5e-3));
    CHECK(cfg.slots_per_period() == 200);
}

TEST_CASE("validation names the offending field")
{
    auto field_of = [](std::string_view yaml) {
        try {
            parse_config(yaml);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    CHECK(field_of("keep_probability: 1.5") == "keep_probability");
    CHECK(field_of("harq_max_attempts: 0") == "harq_max_attempts");
    CHECK(field_of("subchannels_per_packet: 6") == "subchannels_per_packet");
    CHECK(field_of("mcs_index: 11") == "mcs_index");
    CHECK(field_of("scs_khz: 60") == "scs_khz");
    CHECK(field_of("road_length: -1") == "road_length");
    CHECK(field_of("no_such_key: 1") == "no_such_key");
    CHECK(field_of("pt_dbm: [1, 2]") == "pt_dbm");
}

TEST_CASE("malformed yaml is a config error")
{
    CHECK_THROWS_AS(parse_config("a: [1, 2"), ConfigError);
    CHECK_THROWS_AS(parse_config("- 1\n- 2"), ConfigError);
}

TEST_CASE("overrides")
{
    ScenarioConfig cfg;
    apply_override(cfg, "pt_dbm=26");
    apply_override(cfg, "harq_mode=truncated_stop");
    apply_override(cfg, "ici_enabled=false");
    CHECK(cfg.pt_dbm == 26.0);
    CHECK(cfg.harq_mode == HarqMode::TruncatedStop);
    CHECK_FALSE(cfg.ici_enabled);
    CHECK_THROWS_AS(apply_override(cfg, "pt_dbm"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "bogus=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "scs_khz=abc"), ConfigError);
}

TEST_CASE("yaml round trip keeps the fingerprint")
{
    ScenarioConfig cfg;
    cfg.pt_dbm = 24.5;
    cfg.density_rho = 80;
    cfg.scs_khz = 15;
    cfg.dmrs_override = 12;
    cfg.harq_mode = HarqMode::TruncatedStop;
    cfg.master_seed = 0xdeadbeefcafeULL;
    const auto text = to_yaml(cfg);
    const auto again = parse_config(text);
    CHECK(fingerprint(again) == fingerprint(cfg));
    CHECK(to_yaml(again) == text);

    const auto path = std::filesystem::temp_directory_path() / "nrv2x_cfg_roundtrip.yaml";
    std::ofstream(path) << text;
    CHECK(fingerprint(load_config(path)) == fingerprint(cfg));
    std::filesystem::remove(path);
}

TEST_CASE("fingerprint is 16 hex digits and sensitive to every field")
{
    const ScenarioConfig base;
    const auto fp = fingerprint(base);
    CHECK(fp.size() == 16);
    CHECK(fp.find_first_not_of("0123456789abcdef") == std::string::npos);
    for (const auto& name : field_names()) {
        if (!is_sweepable(name)) {
            continue;
        }
        ScenarioConfig changed = base;
        const double v = std::stod(get_field(base, name));
        set_field(changed, name, std::to_string(static_cast<long long>(v) + 1));
        CHECK_MESSAGE(fingerprint(changed) != fp, name);
    }
}

TEST_CASE("sweep expansion")
{
    const ScenarioConfig base;
    CHECK(expand_sweep(base, {}).size() == 1);

    const std::vector<SweepAxis> axes{{"pt_dbm", {23, 24, 25, 26}}, {"density_rho", {30, 50, 80, 100}}};
    const auto points = expand_sweep(base, axes);
    REQUIRE(points.size() == 16);
    CHECK(points[0].pt_dbm == 23);
    CHECK(points[0].density_rho == 30);
    CHECK(points[1].density_rho == 50);
    CHECK(points[4].pt_dbm == 24);
    CHECK(points[15].pt_dbm == 26);
    CHECK(points[15].density_rho == 100);

    std::set<std::uint64_t> seeds;
    for (const auto& p : points) {
        seeds.insert(p.master_seed);
    }
    CHECK(seeds.size() == 16);

    const auto again = expand_sweep(base, axes);
    for (std::size_t i = 0; i < points.size(); ++i) {
        CHECK(fingerprint(points[i]) == fingerprint(again[i]));
    }

    const auto shared = expand_sweep(base, axes, SeedPolicy::Shared);
    for (const auto& p : shared) {
        CHECK(p.master_seed == shared[0].master_seed);
    }
}

TEST_CASE("sweep expansion rejects ill-formed axes")
{
    const ScenarioConfig base;
    CHECK_THROWS_AS(expand_sweep(base, {{"pt_dbm", {23}}, {"pt_dbm", {24}}}), ConfigError);
    CHECK_THROWS_AS(expand_sweep(base, {{"pt_dbm", {}}}), ConfigError);
    CHECK_THROWS_AS(expand_sweep(base, {{"harq_mode", {1}}}), ConfigError);
    CHECK_THROWS_AS(expand_sweep(base, {{"nope", {1}}}), ConfigError);
    CHECK_THROWS_AS(expand_sweep(base, {{"keep_probability", {0.5, 2.0}}}), ConfigError);
}

TEST_CASE("derived quantities")
{
    ScenarioConfig cfg;
    cfg.density_rho = 30;
    CHECK(cfg.vehicle_count() == 60);
    CHECK(cfg.rsu_x() == 1000.0);
    CHECK(cfg.occupied_bandwidth_hz() == doctest::Approx(7.2e6));
    CHECK(cfg.modulation_order() == 4);
    cfg.mcs_index = 14;
    CHECK(cfg.modulation_order() == 16);
    cfg.pt_dbm = 26;
    CHECK(cfg.power_density_dbm_per_mhz() == doctest::Approx(26 - 10 * std::log10(20.0)));
}

TEST_CASE("shipped scenario file spells out the defaults")
{
    const auto cfg = load_config(std::string(NRV2X_DATA_DIR) + "/scenario.yaml");
    CHECK(fingerprint(cfg) == fingerprint(ScenarioConfig{}));
    CHECK(cfg.master_seed == ScenarioConfig{}.master_seed);
}
