#pragma once

#include "nrv2x/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nrv2x {

/// Identifies a sweep point in every output row.
struct PointMeta
{
    std::string fingerprint;
    double pt_dbm = 0.0;
    int scs_khz = 0;
    int mcs = 0;
    double rho = 0.0;
    double v_kmh = 0.0;
};

PointMeta point_meta(const ScenarioConfig& cfg);

struct DistanceBin
{
    std::uint64_t receptions = 0;
    std::uint64_t successes = 0;
    double per_sum = 0.0; ///< sum of analog PERs of the recorded receptions
};

/// First-success delay of one (packet, receiver) link.
struct DelaySample
{
    double delay_slots = 0.0;
    double speed_mps = 0.0; ///< receiver speed, converts delay to travel distance
    bool censored = false;  ///< every attempt failed; delay is the HARQ horizon
};

class MetricsAccumulator
{
  public:
    MetricsAccumulator() = default;
    MetricsAccumulator(double bin_width_m, double max_distance_m);

    /// Returns false (and counts a drop) when the distance is outside [0, max).
    bool record_reception(double distance_m, bool success, double analog_per);
    void record_attempts(int tx, std::uint64_t count);
    void record_delivery(double delay_slots, double speed_mps);
    void record_undelivered(double horizon_slots, double speed_mps);

    /// Successes / receptions, absent for a bin without receptions.
    std::optional<double> prr(std::size_t bin) const;
    std::optional<double> mean_per(std::size_t bin) const;

    double bin_width() const { return bin_width_; }
    double max_distance() const { return max_distance_; }
    const std::vector<DistanceBin>& bins() const { return bins_; }
    std::uint64_t dropped() const { return dropped_; }
    const std::map<int, std::uint64_t>& attempts_by_tx() const { return attempts_; }
    std::uint64_t total_attempts() const;
    const std::vector<DelaySample>& delays() const { return delays_; }
    std::uint64_t delivered() const { return delivered_; }
    std::uint64_t replications() const { return replications_; }
    void set_replications(std::uint64_t n) { replications_ = n; }

    /// Counter-wise sum; delay samples are concatenated.
    void merge(const MetricsAccumulator& other);

  private:
    double bin_width_ = 25.0;
    double max_distance_ = 500.0;
    std::vector<DistanceBin> bins_;
    std::uint64_t dropped_ = 0;
    std::map<int, std::uint64_t> attempts_;
    std::vector<DelaySample> delays_;
    std::uint64_t delivered_ = 0;
    std::uint64_t replications_ = 1;
};

/// Linear-interpolation sample quantile (Hyndman-Fan type 7).
double quantile(std::vector<double> values, double q);

struct DcommEstimate
{
    double quantile_m = 0.0; ///< q-quantile of per-link travel distance
    double mean_m = 0.0;
    double censored_fraction = 0.0;
    std::size_t samples = 0;
};

inline constexpr double kDcommQuantile = 0.99;

/// Travel distance while waiting for the first correct packet, for a common
/// speed `v_mps`. Throws std::invalid_argument for an empty input.
DcommEstimate measured_d_comm(std::span<const double> delays_slots, double v_mps, double slot_s,
                              double q = kDcommQuantile);

/// Same, with each sample's own receiver speed.
DcommEstimate measured_d_comm(std::span<const DelaySample> samples, double slot_s, double q = kDcommQuantile);

struct EnergyRow
{
    std::uint64_t total_attempts = 0;
    double total_joules = 0.0;
    double joules_per_delivered = 0.0; ///< NaN when nothing was delivered
};

/// attempts * Pt * (L / R), recomputed from the integer attempt count.
EnergyRow energy_report(const MetricsAccumulator& acc, double pt_w, double attempt_duration_s);

// ---- CSV outputs (fixed column order) ----

struct PrrRow
{
    PointMeta meta;
    double bin_low_m = 0.0;
    double bin_high_m = 0.0;
    std::uint64_t receptions = 0;
    std::uint64_t successes = 0;
    double prr = 0.0;
};

struct DcommRow
{
    PointMeta meta;
    double dcomm_p99_m = 0.0;
    double dcomm_mean_m = 0.0;
    double censored_fraction = 0.0;
};

struct EnergyCsvRow
{
    PointMeta meta;
    std::uint64_t total_attempts = 0;
    double total_joules = 0.0;
    double joules_per_delivered = 0.0;
};

inline constexpr const char* kPrrHeader =
    "scenario_fingerprint,pt_dbm,scs_khz,mcs,rho,v_kmh,bin_low_m,bin_high_m,receptions,successes,prr";
inline constexpr const char* kDcommHeader =
    "scenario_fingerprint,pt_dbm,v_kmh,rho,dcomm_p99_m,dcomm_mean_m,censored_fraction";
inline constexpr const char* kEnergyHeader =
    "scenario_fingerprint,pt_dbm,rho,total_attempts,total_joules,joules_per_delivered";

std::string format_number(double v);

/// Body rows only; empty bins are omitted.
void write_prr_rows(std::ostream& out, const PointMeta& meta, const MetricsAccumulator& acc);
void write_dcomm_row(std::ostream& out, const PointMeta& meta, const DcommEstimate& d);
void write_energy_row(std::ostream& out, const PointMeta& meta, const EnergyRow& e);

std::vector<PrrRow> read_prr_csv(const std::filesystem::path& path);
std::vector<DcommRow> read_dcomm_csv(const std::filesystem::path& path);
std::vector<EnergyCsvRow> read_energy_csv(const std::filesystem::path& path);

/// One logical HARQ attempt of an RSU packet as seen by one receiver.
struct LedgerRow
{
    int replication = 0;
    long long packet_id = 0;
    int tx = 0;
    int attempt = 1;
    long long slot = 0;
    int subchannel_start = 0;
    int subchannel_count = 0;
    int rx = 0;
    double distance_m = 0.0;
    bool success = false;
    double per = 0.0;
};

inline constexpr const char* kLedgerHeader =
    "replication,packet_id,tx,attempt,slot,subchannel_start,subchannel_count,rx,distance_m,outcome,per";

void write_ledger(std::ostream& out, std::span<const LedgerRow> rows);
std::vector<LedgerRow> read_ledger(const std::filesystem::path& path);

/// Splits one CSV line on commas (no quoting; outputs here never need it).
std::vector<std::string> split_csv_line(const std::string& line);

} // namespace nrv2x
