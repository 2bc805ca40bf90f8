#pragma once

namespace nrv2x::analytic {

/// Inputs of the closed-form critical distance.
struct DcommInput
{
    double delivered_packets = 0.0; ///< N
    double speed_mps = 0.0;         ///< v
    double pps = 10.0;
    double prr = 1.0;
};

/// Inputs of the truncated-HARQ energy model.
struct EnergyInput
{
    double n_pkt = 0.0; ///< pps * horizon
    double pt_w = 0.0;
    double l_bits = 0.0;
    double rate_bps = 0.0;
    int max_attempts = 1; ///< H
    double prr = 1.0;
};

/// D_comm = N v / pps * (1 - PRR). Throws std::invalid_argument for pps <= 0.
double d_comm(const DcommInput& in);

/// E[min(K, H)] for geometric K with success probability `prr`:
/// (1 - (1 - prr)^H) / prr. Returns H at prr = 0 (the limit).
double expected_attempts(double prr, int max_attempts);

/// N_pkt Pt (L/R) E[min(K, H)]. Throws std::invalid_argument for R <= 0.
double e_total(const EnergyInput& in);

/// Energy of one attempt, Pt L / R.
double attempt_energy(double pt_w, double l_bits, double rate_bps);

double dbm_to_watts(double dbm);

/// Eb/N0 [dB] that yields `prr_target` for an L-bit packet. Throws
/// std::domain_error when the implied BER exceeds the modulation's range.
double required_ebn0_for_prr(double prr_target, double l_bits, int modulation_order);

} // namespace nrv2x::analytic
