#pragma once

#include "nrv2x/config.hpp"
#include "nrv2x/metrics.hpp"
#include "nrv2x/phy_link.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace nrv2x {

struct EngineOptions
{
    bool record_ledger = false;
};

struct ReplicationOutput
{
    MetricsAccumulator metrics;
    std::vector<LedgerRow> ledger;
};

/// One replication. Per slot: move vehicles, evolve the shadowing of the links
/// that are evaluated, run SPS reselection for transmitters generating a
/// packet, register the slot's transmissions, resolve RSU receptions, and
/// commit the metrics of RSU packets whose HARQ cycle has ended.
///
/// Vehicles and the RSU all broadcast on the shared pool; metrics cover the
/// RSU -> vehicle links of receivers within max_eval_distance at generation.
/// Packets generated during the warm-up or still in flight at the end are not
/// counted.
ReplicationOutput run_replication(const ScenarioConfig& cfg, int replication, const McsTable& mcs,
                                  const EngineOptions& options = {});

/// All replications of a point, merged in replication order.
ReplicationOutput run_point(const ScenarioConfig& cfg, const McsTable& mcs, const EngineOptions& options = {});

/// Derived per-point quantities written alongside the metrics.
struct PointSummary
{
    PointMeta meta;
    DcommEstimate dcomm;
    bool has_dcomm = false;
    EnergyRow energy;
};

PointSummary summarize(const ScenarioConfig& cfg, const McsTable& mcs, const MetricsAccumulator& metrics);

/// Writes prr_by_distance.csv, dcomm.csv and energy.csv (with headers) into `dir`.
void write_point_outputs(const std::filesystem::path& dir, const ScenarioConfig& cfg, const McsTable& mcs,
                         const MetricsAccumulator& metrics);

struct SweepOptions
{
    unsigned threads = 1;
    bool resume = true;
    bool record_ledger = false;
};

struct ManifestRow
{
    std::size_t index = 0;
    std::string fingerprint;
    double pt_dbm = 0.0;
    int scs_khz = 0;
    int mcs = 0;
    double rho = 0.0;
    double v_kmh = 0.0;
    std::uint64_t seed = 0;
    int replications = 0;
    std::string harq_mode;
    std::string status; ///< "ok" or "failed: <reason>"
    std::string output_dir;
};

inline constexpr const char* kManifestHeader =
    "index,fingerprint,pt_dbm,scs_khz,mcs,rho,v_kmh,seed,replications,harq_mode,status,output_dir";

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

struct SweepSummary
{
    std::vector<ManifestRow> manifest;
    std::size_t executed = 0;
    std::size_t resumed = 0;
    std::size_t failed = 0;
};

/// Runs every point (in parallel when threads > 1), writes per-point outputs
/// under points/<fingerprint>/, the merged CSVs and manifest.csv into `out_dir`.
/// With `resume`, points recorded as ok in an existing manifest are reused.
/// A failing point is recorded in the manifest; the rest still complete.
SweepSummary run_sweep(const std::vector<ScenarioConfig>& points, const std::filesystem::path& out_dir,
                       const SweepOptions& options = {});

} // namespace nrv2x
