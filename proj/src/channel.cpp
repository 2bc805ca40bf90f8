#include "nrv2x/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nrv2x {

double dbm_to_mw(double dbm)
{
    return std::pow(10.0, dbm / 10.0);
}

double mw_to_dbm(double mw)
{
    return 10.0 * std::log10(mw);
}

double pathloss_db(double d_m, double fc_ghz)
{
    if (!(fc_ghz > 0.0)) {
        throw std::invalid_argument("pathloss_db: fc must be > 0");
    }
    return 20.0 * std::log10(d_m) + 20.0 * std::log10(fc_ghz) + 32.45;
}

LinkGainResult link_gain(double d_m, double fc_ghz, double gain_tx_dbi, double gain_rx_dbi,
                         double shadowing_db)
{
    LinkGainResult r;
    r.distance_m = d_m;
    r.pathloss_db = pathloss_db(std::max(1.0, d_m), fc_ghz);
    r.shadowing_db = shadowing_db;
    r.gain_total_db = -r.pathloss_db + gain_tx_dbi + gain_rx_dbi + shadowing_db;
    return r;
}

double update_shadowing(double s_db, double delta_d_m, const ShadowingParams& params, Rng& rng)
{
    const double n = params.sigma_db * standard_normal(rng);
    const double a = std::exp(-delta_d_m / params.decorr_distance_m);
    // 1 - a^2 without cancellation for small steps
    const double b = std::sqrt(-std::expm1(-2.0 * delta_d_m / params.decorr_distance_m));
    return a * s_db + b * n;
}

double evolve_shadowing(ShadowingState& state, double link_distance_m, const ShadowingParams& params,
                        Rng& rng)
{
    if (!state.initialized) {
        state.s_db = params.sigma_db * standard_normal(rng);
        state.last_distance_m = link_distance_m;
        state.initialized = true;
        return state.s_db;
    }
    const double dd = std::fabs(link_distance_m - state.last_distance_m);
    if (dd > 0.0) {
        state.s_db = update_shadowing(state.s_db, dd, params, rng);
        state.last_distance_m = link_distance_m;
    }
    return state.s_db;
}

double noise_power_dbm(double bandwidth_hz, double noise_figure_db)
{
    return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double ici_ratio(double speed_rel_mps, double fc_ghz, double scs_hz)
{
    const double doppler_hz = std::fabs(speed_rel_mps) * fc_ghz * 1e9 / kSpeedOfLight;
    const double x = std::numbers::pi * doppler_hz / scs_hz;
    return x * x / 3.0;
}

double ici_penalty_db(double speed_rel_mps, double fc_ghz, double scs_hz, double snr_linear)
{
    return 10.0 * std::log10(1.0 + ici_ratio(speed_rel_mps, fc_ghz, scs_hz) * snr_linear);
}

double sinr_db(double p_rx_dbm, double noise_dbm, std::span<const double> interferers_dbm,
               double ici_floor_mw)
{
    double denom = dbm_to_mw(noise_dbm) + ici_floor_mw;
    for (double i : interferers_dbm) {
        denom += dbm_to_mw(i); // -inf maps to 0
    }
    return mw_to_dbm(dbm_to_mw(p_rx_dbm) / denom);
}

} // namespace nrv2x
