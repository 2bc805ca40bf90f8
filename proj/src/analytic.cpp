#include "nrv2x/analytic.hpp"

#include "nrv2x/phy_link.hpp"

#include <cmath>
#include <stdexcept>

namespace nrv2x::analytic {

double d_comm(const DcommInput& in)
{
    if (!(in.pps > 0.0)) {
        throw std::invalid_argument("d_comm: pps must be > 0");
    }
    return in.delivered_packets * in.speed_mps / in.pps * (1.0 - in.prr);
}

double expected_attempts(double prr, int max_attempts)
{
    if (max_attempts < 1) {
        throw std::invalid_argument("expected_attempts: H must be >= 1");
    }
    if (prr <= 0.0) {
        return max_attempts;
    }
    // 1 - (1-p)^H computed as -expm1(H log1p(-p)) to keep precision near p -> 0
    const double tail = prr >= 1.0 ? 1.0 : -std::expm1(max_attempts * std::log1p(-prr));
    return tail / prr;
}

double attempt_energy(double pt_w, double l_bits, double rate_bps)
{
    if (!(rate_bps > 0.0)) {
        throw std::invalid_argument("attempt energy: R must be > 0");
    }
    return pt_w * l_bits / rate_bps;
}

double e_total(const EnergyInput& in)
{
    return in.n_pkt * attempt_energy(in.pt_w, in.l_bits, in.rate_bps) *
           expected_attempts(in.prr, in.max_attempts);
}

double dbm_to_watts(double dbm)
{
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double required_ebn0_for_prr(double prr_target, double l_bits, int modulation_order)
{
    if (!(prr_target > 0.0 && prr_target < 1.0)) {
        throw std::domain_error("required_ebn0_for_prr: target PRR must lie in (0, 1)");
    }
    const double ber = ber_from_prr(prr_target, l_bits);
    return 10.0 * std::log10(ebn0_from_ber(ber, modulation_order));
}

} // namespace nrv2x::analytic
