#pragma once

#include "nrv2x/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace nrv2x::report {

enum class Status { Pass, Fail, Skipped };

const char* to_string(Status s);

/// One trend check.
struct CheckRow
{
    std::string check;
    std::string scope;
    double value = 0.0; ///< NaN when not computable
    std::string threshold;
    Status status = Status::Skipped;
    std::string detail;
};

struct Outputs
{
    std::vector<PrrRow> prr;
    std::vector<DcommRow> dcomm;
    std::vector<EnergyCsvRow> energy;
};

/// Reads the merged CSVs of each directory; missing files contribute nothing.
Outputs load_outputs(std::span<const std::filesystem::path> dirs);

struct Thresholds
{
    double prr_range_m = 375.0;
    double prr_gain_min = 0.02;
    double prr_gain_rho = 50.0;
    double energy_ratio_lo = 1.7;
    double energy_ratio_hi = 2.3;
    double energy_ratio_rho = 100.0;
    double dcomm_ratio_lo = 1.6;
    double dcomm_ratio_hi = 2.8;
    double scs_fraction_min = 0.7;
    double scs_speed_kmh = 110.0;
    std::vector<double> rho_values{30.0, 50.0, 80.0, 100.0};
    std::vector<double> pt_values{23.0, 24.0, 25.0, 26.0};
    std::vector<double> speed_values{50.0, 80.0, 110.0};
};

/// Unweighted mean of the populated bin PRRs with bin_high <= range, for the
/// rows of one point (identified by fingerprint). NaN if none.
double bin_averaged_prr(std::span<const PrrRow> rows, const std::string& fingerprint, double range_m);

/// Fraction of distance bins populated in both points where PRR(b) >= PRR(a).
/// NaN if no bin is shared.
double fraction_bins_not_worse(std::span<const PrrRow> rows, const std::string& fp_a, const std::string& fp_b);

std::vector<CheckRow> prr_checks(const Outputs& out, const Thresholds& t = {});
std::vector<CheckRow> energy_checks(const Outputs& out, const Thresholds& t = {});
std::vector<CheckRow> dcomm_checks(const Outputs& out, const Thresholds& t = {});
std::vector<CheckRow> scs_checks(const Outputs& out, const Thresholds& t = {});

/// All of the above, in that order.
std::vector<CheckRow> run_checks(const Outputs& out, const Thresholds& t = {});

void write_table(std::ostream& os, std::span<const CheckRow> rows);
void write_csv(std::ostream& os, std::span<const CheckRow> rows);

} // namespace nrv2x::report
