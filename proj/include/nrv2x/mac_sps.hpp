#pragma once

#include "nrv2x/config.hpp"
#include "nrv2x/phy_link.hpp"
#include "nrv2x/rng.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace nrv2x {

/// A periodic reservation: one slot of the allocation period and a run of
/// contiguous subchannels starting at `subchannel_start`.
struct Resource
{
    int slot = 0;
    int subchannel_start = 0;

    friend bool operator==(const Resource&, const Resource&) = default;
};

/// Slot x subchannel occupancy over the most recent allocation period.
/// Cell (g, s) holds the transmitters heard in the last slot congruent to g.
class ResourceGrid
{
  public:
    ResourceGrid(int slots_per_period, int num_subchannels);

    int slots_per_period() const { return slots_per_period_; }
    int num_subchannels() const { return num_subchannels_; }

    /// Forgets what was recorded one period ago in this slot.
    void begin_slot(long long abs_slot);
    void occupy(long long abs_slot, int tx, int subchannel_start, int subchannel_count);
    std::span<const int> occupants(int slot, int subchannel) const;

  private:
    int slots_per_period_;
    int num_subchannels_;
    std::vector<std::vector<int>> cells_;
};

/// Received power (mW) per (slot, subchannel) as sensed by one listener.
struct SensingMap
{
    int slots_per_period = 0;
    int num_subchannels = 0;
    std::vector<double> power_mw;

    double at(int slot, int subchannel) const
    {
        return power_mw[static_cast<std::size_t>(slot) * num_subchannels + subchannel];
    }
    /// Mean power over the subchannels of a resource, in dBm (-inf when idle).
    double resource_rssi_dbm(const Resource& r, int subchannel_count) const;
};

/// Builds the listener's view of the grid. The listener's own transmissions
/// are not sensed. `rx_power_mw(tx)` is the power of `tx` at the listener.
SensingMap sense(const ResourceGrid& grid, int listener, const std::function<double(int)>& rx_power_mw);

struct SpsParams
{
    double keep_probability = 0.4;
    double sensing_threshold_dbm = -110.0;
    int reselection_min = 5;
    int reselection_max = 15;
    double fallback_fraction = 0.2;
    int subchannels_per_packet = 2;
    int num_subchannels = 5;
    int slots_per_period = 100;

    static SpsParams from_config(const ScenarioConfig& cfg);
};

struct SpsAgent
{
    int owner = 0;
    std::optional<Resource> selection;
    int reselection_counter = 0;
};

bool reselection_due(const SpsAgent& agent);

/// Candidate resources whose sensed RSSI is below the threshold, or the
/// lowest-RSSI fallback fraction when none is.
std::vector<Resource> candidate_resources(const SensingMap& sensed, const SpsParams& params);

/// Semi-persistent selection. Nothing happens while the counter is running.
/// When it has expired the current resource is kept with the keep probability,
/// otherwise a candidate is drawn uniformly; the counter is then redrawn.
/// `sense_fn` is only invoked when a fresh selection is made.
SpsAgent select_resources(SpsAgent agent, const SpsParams& params, const std::function<SensingMap()>& sense_fn,
                          Rng& rng);

/// Counts one transmission against the reselection counter.
void on_transmission(SpsAgent& agent);

/// First absolute slot >= generation_slot that falls on the resource.
long long next_transmission_slot(long long generation_slot, const Resource& resource, int slots_per_period);

struct PacketAttempt
{
    long long packet_id = 0;
    int tx = 0;
    int attempt = 1; ///< k in [1, H]
    long long slot = 0;
    int subchannel_start = 0;
    int subchannel_count = 0;
};

/// Blind HARQ plan: H attempts on the agent's resource in consecutive
/// allocation opportunities, without waiting for feedback.
std::vector<PacketAttempt> schedule_packet(long long packet_id, long long generation_slot, const SpsAgent& agent,
                                           int max_attempts, const SpsParams& params);

struct SlotTransmission
{
    int tx = 0;
    int subchannel_start = 0;
    int subchannel_count = 1;
};

struct ReceptionRequest
{
    std::size_t transmission = 0; ///< index into the slot's transmissions
    int rx = 0;
};

struct Reception
{
    int tx = 0;
    int rx = 0;
    double sinr_db = 0.0;
    double per = 1.0;
    bool success = false;
    bool half_duplex = false; ///< receiver was transmitting in this slot
};

/// Channel queries needed to resolve a slot.
class LinkModel
{
  public:
    virtual ~LinkModel() = default;
    virtual double rx_power_dbm(int tx, int rx) = 0;
    /// ICI-to-signal ratio of the link; 0 disables the ICI floor.
    virtual double ici_ratio(int tx, int rx) = 0;
};

struct ResolveParams
{
    LinkProfile profile;
    OverlapModel overlap = OverlapModel::Fraction;
    double fixed_per = -1.0; ///< in [0, 1]: override the SINR-derived PER
};

/// Fraction of `wanted`'s subchannels that `other` overlaps.
double overlap_fraction(const SlotTransmission& wanted, const SlotTransmission& other, OverlapModel model);

/// SINR and decode outcome for each request. Interferers are all other
/// transmitters of the slot that share a subchannel with the wanted one.
/// Exactly one uniform is drawn per request, in request order.
std::vector<Reception> resolve_slot(std::span<const SlotTransmission> transmissions,
                                    std::span<const ReceptionRequest> requests, LinkModel& links,
                                    const ResolveParams& params, Rng& rng);

} // namespace nrv2x
