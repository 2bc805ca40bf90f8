#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nrv2x {

/// Raised for any configuration problem; `field()` names the offending key
/// (empty for document-level parse failures).
class ConfigError : public std::runtime_error
{
  public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field.empty() ? what : field + ": " + what),
          field_(std::move(field))
    {
    }

    const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

enum class HarqMode
{
    BlindFixed,    ///< always H attempts per packet
    TruncatedStop, ///< stop a link after its first success
};

enum class OverlapModel
{
    Fraction,     ///< interferer power scaled by the overlapped subchannel fraction
    AllOrNothing, ///< any overlap counts as full interference
};

std::string_view to_string(HarqMode mode);
std::string_view to_string(OverlapModel model);

/// Full experiment parameterization. Units are in the member names.
struct ScenarioConfig
{
    // road and traffic
    double road_length_m = 2000.0;
    int lanes_per_direction = 2;
    double lane_width_m = 4.0;
    double density_rho = 50.0; ///< vehicles per km of roadway (all lanes)
    double mean_speed_kmh = 50.0;
    double speed_stddev_kmh = 7.0;
    double speed_limit_kmh = 120.0;

    // radio
    double fc_ghz = 5.9;
    double bandwidth_mhz = 20.0;
    double noise_figure_db = 9.0;
    double antenna_gain_tx_dbi = 3.0;
    double antenna_gain_rx_dbi = 3.0;
    double pt_dbm = 23.0;
    int scs_khz = 30;
    int mcs_index = 8;
    std::string mcs_table_path; ///< empty: built-in table
    int packet_size_bytes = 350;
    double pps = 10.0;

    // HARQ and resource pool
    int harq_max_attempts = 3;
    HarqMode harq_mode = HarqMode::BlindFixed;
    int subchannel_prbs = 10;
    int num_subchannels = 5;
    int subchannels_per_packet = 2;
    double keep_probability = 0.4;
    double allocation_period_ms = 100.0;
    double sensing_threshold_dbm = -110.0;
    int reselection_min = 5;
    int reselection_max = 15;
    double fallback_fraction = 0.2;
    std::optional<int> dmrs_override;
    OverlapModel interference_overlap = OverlapModel::Fraction;

    // channel
    double shadowing_sigma_db = 3.0;
    double decorr_distance_m = 25.0;
    bool ici_enabled = true;

    // RSU placement; negative position means road midpoint
    double rsu_position_m = -1.0;
    double rsu_lateral_offset_m = 5.0;

    // run control
    double sim_duration_s = 10.0;
    double warmup_s = 1.0;
    int replications = 1;
    std::uint64_t master_seed = 1;
    double prr_bin_width_m = 25.0;
    double max_eval_distance_m = 500.0;
    /// Synthetic harness: when in [0, 1], every decode uses this PER.
    double fixed_per = -1.0;

    // derived values
    int dmrs_re_per_slot() const;
    int modulation_order() const;
    double slot_duration_s() const;
    int slots_per_period() const;
    double rsu_x() const;
    int vehicle_count() const;
    int packet_bits() const { return packet_size_bytes * 8; }
    double occupied_bandwidth_hz() const;
    /// Reported only; the swept pt_dbm governs transmissions.
    double power_density_dbm_per_mhz() const;
};

/// DMRS resource elements per slot for a subcarrier spacing.
int default_dmrs_re_per_slot(int scs_khz);

/// Checks every invariant; throws ConfigError naming the first violated field.
void validate(const ScenarioConfig& cfg);

ScenarioConfig parse_config(std::string_view yaml_text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Applies one `key=value` override. Does not validate.
void apply_override(ScenarioConfig& cfg, std::string_view assignment);
void set_field(ScenarioConfig& cfg, const std::string& key, const std::string& value);
std::string get_field(const ScenarioConfig& cfg, const std::string& key);

std::vector<std::string> field_names();
bool is_sweepable(std::string_view key);

/// Canonical YAML of all resolved values; parse_config() of it round-trips.
std::string to_yaml(const ScenarioConfig& cfg);

/// Stable 64-bit hash of all resolved values, as 16 hex digits.
std::string fingerprint(const ScenarioConfig& cfg);

struct SweepAxis
{
    std::string field;
    std::vector<double> values;
};

enum class SeedPolicy
{
    PerPoint, ///< seed derived from (master_seed, point index)
    Shared,   ///< every point uses the seed of point 0 (common random numbers)
};

/// Cartesian product over `axes` (last axis varies fastest).
std::vector<ScenarioConfig> expand_sweep(const ScenarioConfig& base,
                                         const std::vector<SweepAxis>& axes,
                                         SeedPolicy policy = SeedPolicy::PerPoint);

} // namespace nrv2x
