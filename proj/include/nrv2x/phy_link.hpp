#pragma once

#include "nrv2x/config.hpp"
#include "nrv2x/rng.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace nrv2x {

// Gaussian tail function and its inverse. The BER expressions use the
// standard normal upper tail Q(x) = P(Z > x).

double q_function(double x);

/// Inverse of q_function on (0, 1); throws std::domain_error outside.
double q_inverse(double p);

/// Uncoded BER: M=4 -> Q(sqrt(g)); M=16 -> 3/8 Q(sqrt(0.8 g)), g = Eb/N0 (linear).
double ber_from_ebn0(double ebn0_linear, int modulation_order);

/// Inverse of ber_from_ebn0. Throws std::domain_error when the BER is outside
/// the invertible range of the modulation ((0, 1/2) for QPSK, (0, 3/16) for 16-QAM).
double ebn0_from_ber(double ber, int modulation_order);

/// Highest BER the closed form can produce for the modulation (its value at Eb/N0 = 0).
double ber_ceiling(int modulation_order);

/// PER = 1 - (1 - BER)^L.
double per_from_ber(double ber, double l_bits);

/// BER = 1 - PRR^(1/L); exact inverse of per_from_ber.
double ber_from_prr(double prr, double l_bits);

/// R = 12 N_sub N_bits/symbol Rc SCS N_symbols.
double data_rate_bps(double n_sub_prb, double bits_per_symbol, double code_rate, double scs_hz,
                     double n_symbols);

/// Data symbols per slot after DMRS overhead: 14 - dmrs_re / 12.
double data_symbols_per_slot(int dmrs_re_per_slot);

/// Eb/N0 [dB] = SINR [dB] + 10 log10(B / R).
double ebn0_from_sinr(double sinr_db, double occupied_bw_hz, double rate_bps);

struct McsEntry
{
    int index = 0;
    int modulation_order = 4;
    int bits_per_symbol = 2;
    double code_rate = 0.5;
};

class McsTable
{
  public:
    McsTable() = default;
    explicit McsTable(std::vector<McsEntry> entries);

    /// Index 8..10 QPSK and 12..18 16-QAM.
    static McsTable builtin();
    /// Whitespace-separated rows `index modulation code_rate`, `#` comments.
    static McsTable parse(std::istream& in);
    static McsTable load(const std::filesystem::path& path);
    /// Built-in table, or the file named by cfg.mcs_table_path.
    static McsTable for_config(const ScenarioConfig& cfg);

    const McsEntry& at(int index) const;
    const std::vector<McsEntry>& entries() const { return entries_; }

  private:
    std::vector<McsEntry> entries_;
};

/// Per-scenario constants of the link abstraction.
struct LinkProfile
{
    McsEntry mcs;
    double packet_bits = 2800.0;
    double occupied_bw_hz = 0.0;
    double rate_bps = 0.0;
    double noise_dbm = 0.0;
    double n_symbols = 12.0;
};

LinkProfile make_link_profile(const ScenarioConfig& cfg, const McsTable& table);

struct DecodeResult
{
    bool success = false;
    double per = 1.0;
    double ebn0_db = 0.0;
};

/// Analog PER for a SINR under the profile.
DecodeResult evaluate_link(double sinr_db, const LinkProfile& profile);

/// Draws exactly one uniform from `rng`; fails with probability PER.
DecodeResult decode(double sinr_db, const LinkProfile& profile, Rng& rng);

/// Bernoulli outcome for a known PER; consumes exactly one uniform.
bool draw_success(double per, Rng& rng);

} // namespace nrv2x
