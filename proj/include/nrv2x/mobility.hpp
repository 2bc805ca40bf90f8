#pragma once

#include "nrv2x/config.hpp"
#include "nrv2x/rng.hpp"

#include <span>
#include <vector>

namespace nrv2x {

struct Position
{
    double x = 0.0; ///< along the road, m
    double y = 0.0; ///< across the road, m
};

struct Vehicle
{
    int id = 0;
    int lane = 0;
    double position_x = 0.0;
    int direction = 1; ///< +1 or -1
    double speed_mps = 0.0;
};

struct Rsu
{
    double position_x = 0.0;
    double lateral_offset = 5.0;
    double pt_dbm = 23.0;
};

constexpr double kmh_to_mps(double kmh) { return kmh / 3.6; }

/// Lanes [0, lanes_per_direction) drive in +x; the rest in -x.
int lane_direction(int lane, int lanes_per_direction);
double lane_center_y(int lane, double lane_width_m);

Position position_of(const Vehicle& v, const ScenarioConfig& cfg);
/// The RSU stands beside the road, on the side of lane 0.
Position position_of(const Rsu& rsu);

Rsu make_rsu(const ScenarioConfig& cfg);

/// Speed drawn from Normal(v, sigma) truncated to [max(0, v-3s), min(v+3s, limit)], in m/s.
double draw_speed_mps(const ScenarioConfig& cfg, Rng& rng);

/// Places round(rho * road_km) vehicles, lanes filled round-robin, uniform positions.
std::vector<Vehicle> spawn_traffic(const ScenarioConfig& cfg, Rng& rng);

/// Constant-speed motion on a ring of length `road_length_m`. Requires dt > 0.
void advance(std::span<Vehicle> vehicles, double dt_s, double road_length_m);

/// Euclidean distance; not clamped.
double distance(const Position& a, const Position& b);

/// Distance used for pathloss evaluation (clamped below at 1 m).
double pathloss_distance(const Position& a, const Position& b);

} // namespace nrv2x
