#include "nrv2x/mac_sps.hpp"

#include "nrv2x/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nrv2x {

ResourceGrid::ResourceGrid(int slots_per_period, int num_subchannels)
    : slots_per_period_(slots_per_period),
      num_subchannels_(num_subchannels),
      cells_(static_cast<std::size_t>(slots_per_period) * num_subchannels)
{
    if (slots_per_period < 1 || num_subchannels < 1) {
        throw std::invalid_argument("ResourceGrid: dimensions must be positive");
    }
}

void ResourceGrid::begin_slot(long long abs_slot)
{
    const auto g = static_cast<int>(abs_slot % slots_per_period_);
    for (int s = 0; s < num_subchannels_; ++s) {
        cells_[static_cast<std::size_t>(g) * num_subchannels_ + s].clear();
    }
}

void ResourceGrid::occupy(long long abs_slot, int tx, int subchannel_start, int subchannel_count)
{
    if (subchannel_start < 0 || subchannel_start + subchannel_count > num_subchannels_) {
        throw std::out_of_range("ResourceGrid::occupy: subchannels outside the pool");
    }
    const auto g = static_cast<int>(abs_slot % slots_per_period_);
    for (int s = subchannel_start; s < subchannel_start + subchannel_count; ++s) {
        cells_[static_cast<std::size_t>(g) * num_subchannels_ + s].push_back(tx);
    }
}

std::span<const int> ResourceGrid::occupants(int slot, int subchannel) const
{
    return cells_[static_cast<std::size_t>(slot) * num_subchannels_ + subchannel];
}

double SensingMap::resource_rssi_dbm(const Resource& r, int subchannel_count) const
{
    double sum = 0.0;
    for (int s = r.subchannel_start; s < r.subchannel_start + subchannel_count; ++s) {
        sum += at(r.slot, s);
    }
    return sum > 0.0 ? mw_to_dbm(sum / subchannel_count) : -std::numeric_limits<double>::infinity();
}

SensingMap sense(const ResourceGrid& grid, int listener, const std::function<double(int)>& rx_power_mw)
{
    SensingMap map;
    map.slots_per_period = grid.slots_per_period();
    map.num_subchannels = grid.num_subchannels();
    map.power_mw.assign(static_cast<std::size_t>(map.slots_per_period) * map.num_subchannels, 0.0);
    for (int g = 0; g < map.slots_per_period; ++g) {
        for (int s = 0; s < map.num_subchannels; ++s) {
            double& cell = map.power_mw[static_cast<std::size_t>(g) * map.num_subchannels + s];
            for (int tx : grid.occupants(g, s)) {
                if (tx != listener) {
                    cell += rx_power_mw(tx);
                }
            }
        }
    }
    return map;
}

SpsParams SpsParams::from_config(const ScenarioConfig& cfg)
{
    SpsParams p;
    p.keep_probability = cfg.keep_probability;
    p.sensing_threshold_dbm = cfg.sensing_threshold_dbm;
    p.reselection_min = cfg.reselection_min;
    p.reselection_max = cfg.reselection_max;
    p.fallback_fraction = cfg.fallback_fraction;
    p.subchannels_per_packet = cfg.subchannels_per_packet;
    p.num_subchannels = cfg.num_subchannels;
    p.slots_per_period = cfg.slots_per_period();
    return p;
}

bool reselection_due(const SpsAgent& agent)
{
    return !agent.selection || agent.reselection_counter <= 0;
}

std::vector<Resource> candidate_resources(const SensingMap& sensed, const SpsParams& params)
{
    const int starts = params.num_subchannels - params.subchannels_per_packet + 1;
    std::vector<Resource> all;
    std::vector<double> rssi;
    all.reserve(static_cast<std::size_t>(sensed.slots_per_period) * starts);
    for (int g = 0; g < sensed.slots_per_period; ++g) {
        for (int s = 0; s < starts; ++s) {
            all.push_back({g, s});
            rssi.push_back(sensed.resource_rssi_dbm(all.back(), params.subchannels_per_packet));
        }
    }

    std::vector<Resource> below;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (rssi[i] < params.sensing_threshold_dbm) {
            below.push_back(all[i]);
        }
    }
    if (!below.empty()) {
        return below;
    }

    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rssi[a] < rssi[b]; });
    const auto keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(params.fallback_fraction * static_cast<double>(all.size()))));
    std::vector<Resource> pool;
    for (std::size_t i = 0; i < keep && i < order.size(); ++i) {
        pool.push_back(all[order[i]]);
    }
    return pool;
}

SpsAgent select_resources(SpsAgent agent, const SpsParams& params, const std::function<SensingMap()>& sense_fn,
                          Rng& rng)
{
    if (!reselection_due(agent)) {
        return agent;
    }
    if (agent.selection && uniform01(rng) < params.keep_probability) {
        agent.reselection_counter = uniform_int(rng, params.reselection_min, params.reselection_max);
        return agent;
    }
    const auto candidates = candidate_resources(sense_fn(), params);
    agent.selection = candidates[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(candidates.size()) - 1))];
    agent.reselection_counter = uniform_int(rng, params.reselection_min, params.reselection_max);
    return agent;
}

void on_transmission(SpsAgent& agent)
{
    if (agent.reselection_counter > 0) {
        --agent.reselection_counter;
    }
}

long long next_transmission_slot(long long generation_slot, const Resource& resource, int slots_per_period)
{
    const long long phase = generation_slot % slots_per_period;
    const long long wait = ((resource.slot - phase) % slots_per_period + slots_per_period) % slots_per_period;
    return generation_slot + wait;
}

std::vector<PacketAttempt> schedule_packet(long long packet_id, long long generation_slot, const SpsAgent& agent,
                                           int max_attempts, const SpsParams& params)
{
    if (max_attempts < 1) {
        throw std::invalid_argument("schedule_packet: H must be >= 1");
    }
    if (!agent.selection) {
        throw std::logic_error("schedule_packet: agent has no resource");
    }
    std::vector<PacketAttempt> attempts;
    const long long first = next_transmission_slot(generation_slot, *agent.selection, params.slots_per_period);
    for (int k = 1; k <= max_attempts; ++k) {
        attempts.push_back({packet_id, agent.owner, k, first + static_cast<long long>(k - 1) * params.slots_per_period,
                            agent.selection->subchannel_start, params.subchannels_per_packet});
    }
    return attempts;
}

double overlap_fraction(const SlotTransmission& wanted, const SlotTransmission& other, OverlapModel model)
{
    const int lo = std::max(wanted.subchannel_start, other.subchannel_start);
    const int hi = std::min(wanted.subchannel_start + wanted.subchannel_count,
                            other.subchannel_start + other.subchannel_count);
    if (hi <= lo) {
        return 0.0;
    }
    if (model == OverlapModel::AllOrNothing) {
        return 1.0;
    }
    return static_cast<double>(hi - lo) / wanted.subchannel_count;
}

std::vector<Reception> resolve_slot(std::span<const SlotTransmission> transmissions,
                                    std::span<const ReceptionRequest> requests, LinkModel& links,
                                    const ResolveParams& params, Rng& rng)
{
    std::vector<Reception> out;
    out.reserve(requests.size());
    std::vector<double> interferers;
    for (const auto& req : requests) {
        const SlotTransmission& wanted = transmissions[req.transmission];
        Reception r;
        r.tx = wanted.tx;
        r.rx = req.rx;
        r.half_duplex = std::any_of(transmissions.begin(), transmissions.end(),
                                    [&](const SlotTransmission& t) { return t.tx == req.rx; });
        const double u = uniform01(rng);
        if (r.half_duplex) {
            r.sinr_db = -std::numeric_limits<double>::infinity();
            r.per = 1.0;
            r.success = false;
            out.push_back(r);
            continue;
        }

        const double p_rx_dbm = links.rx_power_dbm(wanted.tx, req.rx);
        interferers.clear();
        for (std::size_t j = 0; j < transmissions.size(); ++j) {
            if (j == req.transmission) {
                continue;
            }
            const double frac = overlap_fraction(wanted, transmissions[j], params.overlap);
            if (frac > 0.0) {
                interferers.push_back(links.rx_power_dbm(transmissions[j].tx, req.rx) + 10.0 * std::log10(frac));
            }
        }
        const double ici_floor_mw = links.ici_ratio(wanted.tx, req.rx) * dbm_to_mw(p_rx_dbm);
        r.sinr_db = sinr_db(p_rx_dbm, params.profile.noise_dbm, interferers, ici_floor_mw);
        r.per = params.fixed_per >= 0.0 ? params.fixed_per : evaluate_link(r.sinr_db, params.profile).per;
        r.success = u >= r.per;
        out.push_back(r);
    }
    return out;
}

} // namespace nrv2x
