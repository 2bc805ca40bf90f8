#pragma once

#include "nrv2x/rng.hpp"

#include <span>

namespace nrv2x {

inline constexpr double kSpeedOfLight = 299792458.0;

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

/// Rural LOS pathloss: 20 log10(d) + 20 log10(fc) + 32.45, d in m, fc in GHz.
/// Throws std::invalid_argument for fc <= 0. Callers clamp d to >= 1 m.
double pathloss_db(double d_m, double fc_ghz);

struct LinkGainResult
{
    double pathloss_db = 0.0;
    double shadowing_db = 0.0;  ///< zero-mean term added to the gain
    double gain_total_db = 0.0; ///< -pathloss + G_tx + G_rx + shadowing
    double distance_m = 0.0;
};

LinkGainResult link_gain(double d_m, double fc_ghz, double gain_tx_dbi, double gain_rx_dbi,
                         double shadowing_db);

struct ShadowingParams
{
    double sigma_db = 3.0;
    double decorr_distance_m = 25.0;
};

/// Correlated log-normal shadowing of one ordered link.
struct ShadowingState
{
    double s_db = 0.0;
    double last_distance_m = 0.0;
    bool initialized = false;
};

/// One autoregressive step:
///   S' = exp(-dd/dcorr) S + sqrt(1 - exp(-2 dd/dcorr)) N,  N ~ Normal(0, sigma^2).
/// Always consumes exactly one normal draw.
double update_shadowing(double s_db, double delta_d_m, const ShadowingParams& params, Rng& rng);

/// Advances the link to `link_distance_m`, evolving by the change in link
/// distance since the last evaluation. The first call draws the stationary sample.
double evolve_shadowing(ShadowingState& state, double link_distance_m, const ShadowingParams& params,
                        Rng& rng);

/// Thermal noise: -174 dBm/Hz + 10 log10(B) + NF.
double noise_power_dbm(double bandwidth_hz, double noise_figure_db);

/// Doppler-induced ICI-to-signal ratio, (pi f_d / scs)^2 / 3 with f_d = v fc / c.
double ici_ratio(double speed_rel_mps, double fc_ghz, double scs_hz);

/// Effective SNR degradation of the ICI floor: 10 log10(1 + rho_ici * snr).
double ici_penalty_db(double speed_rel_mps, double fc_ghz, double scs_hz, double snr_linear);

/// 10 log10(p_rx / (noise + sum interferers + ici_floor)), all in mW internally.
double sinr_db(double p_rx_dbm, double noise_dbm, std::span<const double> interferers_dbm,
               double ici_floor_mw);

} // namespace nrv2x
