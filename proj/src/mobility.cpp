#include "nrv2x/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nrv2x {

int lane_direction(int lane, int lanes_per_direction)
{
    return lane < lanes_per_direction ? 1 : -1;
}

double lane_center_y(int lane, double lane_width_m)
{
    return (lane + 0.5) * lane_width_m;
}

Position position_of(const Vehicle& v, const ScenarioConfig& cfg)
{
    return {v.position_x, lane_center_y(v.lane, cfg.lane_width_m)};
}

Position position_of(const Rsu& rsu)
{
    return {rsu.position_x, -rsu.lateral_offset};
}

Rsu make_rsu(const ScenarioConfig& cfg)
{
    return Rsu{cfg.rsu_x(), cfg.rsu_lateral_offset_m, cfg.pt_dbm};
}

double draw_speed_mps(const ScenarioConfig& cfg, Rng& rng)
{
    const double mean = cfg.mean_speed_kmh;
    const double sd = cfg.speed_stddev_kmh;
    const double lo = std::max(0.0, mean - 3.0 * sd);
    const double hi = std::min(mean + 3.0 * sd, cfg.speed_limit_kmh);
    if (sd == 0.0 || hi <= lo) {
        return kmh_to_mps(std::clamp(mean, lo, hi));
    }
    for (;;) {
        const double kmh = mean + sd * standard_normal(rng);
        if (kmh >= lo && kmh <= hi) {
            return kmh_to_mps(kmh);
        }
    }
}

std::vector<Vehicle> spawn_traffic(const ScenarioConfig& cfg, Rng& rng)
{
    const int count = cfg.vehicle_count();
    const int lanes = 2 * cfg.lanes_per_direction;
    std::vector<Vehicle> vehicles;
    vehicles.reserve(static_cast<std::size_t>(count));
    for (int id = 0; id < count; ++id) {
        Vehicle v;
        v.id = id;
        v.lane = id % lanes;
        v.direction = lane_direction(v.lane, cfg.lanes_per_direction);
        v.position_x = uniform01(rng) * cfg.road_length_m;
        v.speed_mps = draw_speed_mps(cfg, rng);
        vehicles.push_back(v);
    }
    return vehicles;
}

void advance(std::span<Vehicle> vehicles, double dt_s, double road_length_m)
{
    if (!(dt_s > 0.0)) {
        throw std::invalid_argument("advance: dt must be > 0");
    }
    for (auto& v : vehicles) {
        double x = std::fmod(v.position_x + v.direction * v.speed_mps * dt_s, road_length_m);
        if (x < 0.0) {
            x += road_length_m;
        }
        // fmod of a tiny negative value can round back up to the ring length
        v.position_x = x >= road_length_m ? 0.0 : x;
    }
}

double distance(const Position& a, const Position& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

double pathloss_distance(const Position& a, const Position& b)
{
    return std::max(1.0, distance(a, b));
}

} // namespace nrv2x
