#include "nrv2x/phy_link.hpp"

#include "nrv2x/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

namespace nrv2x {

double q_function(double x)
{
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double q_inverse(double p)
{
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("q_inverse: p must lie in (0, 1)");
    }
    // Q is strictly decreasing; bisect to the resolution of a double.
    double lo = -40.0;
    double hi = 40.0;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) {
            break;
        }
        if (q_function(mid) > p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double ber_ceiling(int modulation_order)
{
    switch (modulation_order) {
    case 4:
        return 0.5;
    case 16:
        return 3.0 / 16.0;
    default:
        throw std::invalid_argument("unsupported modulation order " + std::to_string(modulation_order));
    }
}

double ber_from_ebn0(double ebn0_linear, int modulation_order)
{
    if (!(ebn0_linear >= 0.0)) {
        throw std::domain_error("ber_from_ebn0: Eb/N0 must be >= 0");
    }
    switch (modulation_order) {
    case 4:
        return q_function(std::sqrt(ebn0_linear));
    case 16:
        return 3.0 / 8.0 * q_function(std::sqrt(0.8 * ebn0_linear));
    default:
        throw std::invalid_argument("unsupported modulation order " + std::to_string(modulation_order));
    }
}

double ebn0_from_ber(double ber, int modulation_order)
{
    const double ceiling = ber_ceiling(modulation_order);
    if (!(ber > 0.0 && ber < ceiling)) {
        throw std::domain_error("ebn0_from_ber: BER " + std::to_string(ber) +
                                " outside the invertible range for M=" + std::to_string(modulation_order));
    }
    if (modulation_order == 4) {
        const double x = q_inverse(ber);
        return x * x;
    }
    const double x = q_inverse(8.0 / 3.0 * ber);
    return 1.25 * x * x;
}

double per_from_ber(double ber, double l_bits)
{
    if (ber >= 1.0) {
        return 1.0;
    }
    return -std::expm1(l_bits * std::log1p(-ber));
}

double ber_from_prr(double prr, double l_bits)
{
    if (prr <= 0.0) {
        return 1.0;
    }
    return -std::expm1(std::log(prr) / l_bits);
}

double data_rate_bps(double n_sub_prb, double bits_per_symbol, double code_rate, double scs_hz,
                     double n_symbols)
{
    return 12.0 * n_sub_prb * bits_per_symbol * code_rate * scs_hz * n_symbols;
}

double data_symbols_per_slot(int dmrs_re_per_slot)
{
    return 14.0 - dmrs_re_per_slot / 12.0;
}

double ebn0_from_sinr(double sinr_db, double occupied_bw_hz, double rate_bps)
{
    return sinr_db + 10.0 * std::log10(occupied_bw_hz / rate_bps);
}

McsTable::McsTable(std::vector<McsEntry> entries) : entries_(std::move(entries))
{
    std::sort(entries_.begin(), entries_.end(),
              [](const McsEntry& a, const McsEntry& b) { return a.index < b.index; });
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.modulation_order != 4 && e.modulation_order != 16) {
            throw std::invalid_argument("MCS " + std::to_string(e.index) + ": unsupported modulation");
        }
        if (!(e.code_rate > 0.0 && e.code_rate <= 1.0)) {
            throw std::invalid_argument("MCS " + std::to_string(e.index) + ": code rate must be in (0, 1]");
        }
        if (i > 0 && entries_[i - 1].index == e.index) {
            throw std::invalid_argument("MCS " + std::to_string(e.index) + ": duplicate index");
        }
        if (i > 0 && entries_[i - 1].modulation_order == e.modulation_order &&
            entries_[i - 1].code_rate >= e.code_rate) {
            throw std::invalid_argument("MCS " + std::to_string(e.index) +
                                        ": code rate must increase with index within a modulation");
        }
    }
}

McsTable McsTable::builtin()
{
    auto qpsk = [](int i, double rc) { return McsEntry{i, 4, 2, rc}; };
    auto qam16 = [](int i, double rc) { return McsEntry{i, 16, 4, rc}; };
    return McsTable({qpsk(8, 0.44), qpsk(9, 0.50), qpsk(10, 0.55), qam16(12, 0.37), qam16(13, 0.42),
                     qam16(14, 0.48), qam16(15, 0.54), qam16(16, 0.60), qam16(17, 0.64), qam16(18, 0.68)});
}

McsTable McsTable::parse(std::istream& in)
{
    std::vector<McsEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream row(line);
        McsEntry e;
        std::string modulation;
        if (!(row >> e.index)) {
            continue; // blank line
        }
        if (!(row >> modulation >> e.code_rate)) {
            throw std::invalid_argument("MCS table line " + std::to_string(line_no) + ": expected index modulation code_rate");
        }
        if (modulation == "QPSK" || modulation == "4") {
            e.modulation_order = 4;
            e.bits_per_symbol = 2;
        } else if (modulation == "16QAM" || modulation == "16") {
            e.modulation_order = 16;
            e.bits_per_symbol = 4;
        } else {
            throw std::invalid_argument("MCS table line " + std::to_string(line_no) + ": unknown modulation " + modulation);
        }
        entries.push_back(e);
    }
    return McsTable(std::move(entries));
}

McsTable McsTable::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open MCS table " + path.string());
    }
    return parse(in);
}

McsTable McsTable::for_config(const ScenarioConfig& cfg)
{
    return cfg.mcs_table_path.empty() ? builtin() : load(cfg.mcs_table_path);
}

const McsEntry& McsTable::at(int index) const
{
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const McsEntry& e) { return e.index == index; });
    if (it == entries_.end()) {
        throw std::out_of_range("no MCS entry with index " + std::to_string(index));
    }
    return *it;
}

LinkProfile make_link_profile(const ScenarioConfig& cfg, const McsTable& table)
{
    LinkProfile p;
    p.mcs = table.at(cfg.mcs_index);
    if (p.mcs.modulation_order != cfg.modulation_order()) {
        throw ConfigError("mcs_index", "MCS table modulation disagrees with the index family");
    }
    p.packet_bits = cfg.packet_bits();
    p.occupied_bw_hz = cfg.occupied_bandwidth_hz();
    p.n_symbols = data_symbols_per_slot(cfg.dmrs_re_per_slot());
    p.rate_bps = data_rate_bps(static_cast<double>(cfg.subchannels_per_packet) * cfg.subchannel_prbs,
                               p.mcs.bits_per_symbol, p.mcs.code_rate, cfg.scs_khz * 1e3, p.n_symbols);
    p.noise_dbm = noise_power_dbm(p.occupied_bw_hz, cfg.noise_figure_db);
    return p;
}

DecodeResult evaluate_link(double sinr_db, const LinkProfile& profile)
{
    DecodeResult r;
    r.ebn0_db = ebn0_from_sinr(sinr_db, profile.occupied_bw_hz, profile.rate_bps);
    const double ebn0 = std::pow(10.0, r.ebn0_db / 10.0);
    r.per = per_from_ber(ber_from_ebn0(ebn0, profile.mcs.modulation_order), profile.packet_bits);
    return r;
}

bool draw_success(double per, Rng& rng)
{
    return uniform01(rng) >= per;
}

DecodeResult decode(double sinr_db, const LinkProfile& profile, Rng& rng)
{
    DecodeResult r = evaluate_link(sinr_db, profile);
    r.success = draw_success(r.per, rng);
    return r;
}

} // namespace nrv2x
