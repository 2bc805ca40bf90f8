#include "nrv2x/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

namespace nrv2x::report {

const char* to_string(Status s)
{
    switch (s) {
    case Status::Pass:
        return "PASS";
    case Status::Fail:
        return "FAIL";
    case Status::Skipped:
        return "SKIPPED";
    }
    return "?";
}

Outputs load_outputs(std::span<const std::filesystem::path> dirs)
{
    Outputs out;
    for (const auto& dir : dirs) {
        if (std::filesystem::exists(dir / "prr_by_distance.csv")) {
            auto rows = read_prr_csv(dir / "prr_by_distance.csv");
            out.prr.insert(out.prr.end(), rows.begin(), rows.end());
        }
        if (std::filesystem::exists(dir / "dcomm.csv")) {
            auto rows = read_dcomm_csv(dir / "dcomm.csv");
            out.dcomm.insert(out.dcomm.end(), rows.begin(), rows.end());
        }
        if (std::filesystem::exists(dir / "energy.csv")) {
            auto rows = read_energy_csv(dir / "energy.csv");
            out.energy.insert(out.energy.end(), rows.begin(), rows.end());
        }
    }
    return out;
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

/// Everything but Pt.
using GroupKey = std::tuple<int, int, double, double>; // scs, mcs, v, rho

std::string fmt(double v)
{
    return format_number(v);
}

std::string scope_of(const GroupKey& k)
{
    return "scs=" + std::to_string(std::get<0>(k)) + " mcs=" + std::to_string(std::get<1>(k)) +
           " v=" + fmt(std::get<2>(k)) + " rho=" + fmt(std::get<3>(k));
}

/// Full point parameters by fingerprint; the PRR rows carry all of them.
std::map<std::string, PointMeta> metas_of(const Outputs& out)
{
    std::map<std::string, PointMeta> m;
    for (const auto& r : out.prr) {
        m.emplace(r.meta.fingerprint, r.meta);
    }
    for (const auto& r : out.dcomm) {
        m.emplace(r.meta.fingerprint, r.meta);
    }
    for (const auto& r : out.energy) {
        m.emplace(r.meta.fingerprint, r.meta);
    }
    return m;
}

GroupKey key_of(const PointMeta& m)
{
    return {m.scs_khz, m.mcs, m.v_kmh, m.rho};
}

/// group -> Pt -> value (first point wins on duplicates)
template <typename Value>
using ByPt = std::map<GroupKey, std::map<double, Value>>;

std::string missing_pts(const std::map<double, double>& have, const std::vector<double>& want)
{
    std::string s;
    for (double pt : want) {
        if (have.count(pt) == 0) {
            s += (s.empty() ? "" : " ") + fmt(pt);
        }
    }
    return s;
}

std::string series(const std::map<double, double>& values)
{
    std::string s;
    for (const auto& [pt, v] : values) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%g:%.4g", s.empty() ? "" : " ", pt, v);
        s += buf;
    }
    return s;
}

ByPt<double> prr_series(const Outputs& out, double range_m)
{
    std::set<std::string> fps;
    for (const auto& r : out.prr) {
        fps.insert(r.meta.fingerprint);
    }
    const auto metas = metas_of(out);
    ByPt<double> g;
    for (const auto& fp : fps) {
        const auto& m = metas.at(fp);
        const double avg = bin_averaged_prr(out.prr, fp, range_m);
        if (!std::isnan(avg)) {
            g[key_of(m)].emplace(m.pt_dbm, avg);
        }
    }
    return g;
}

} // namespace

double bin_averaged_prr(std::span<const PrrRow> rows, const std::string& fingerprint, double range_m)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
        if (r.meta.fingerprint == fingerprint && r.bin_high_m <= range_m + 1e-9 && r.receptions > 0) {
            sum += r.prr;
            ++n;
        }
    }
    return n == 0 ? kNan : sum / static_cast<double>(n);
}

double fraction_bins_not_worse(std::span<const PrrRow> rows, const std::string& fp_a, const std::string& fp_b)
{
    std::map<double, double> a;
    std::map<double, double> b;
    for (const auto& r : rows) {
        if (r.receptions == 0) {
            continue;
        }
        if (r.meta.fingerprint == fp_a) {
            a.emplace(r.bin_low_m, r.prr);
        } else if (r.meta.fingerprint == fp_b) {
            b.emplace(r.bin_low_m, r.prr);
        }
    }
    std::size_t shared = 0;
    std::size_t ok = 0;
    for (const auto& [bin, pa] : a) {
        const auto it = b.find(bin);
        if (it == b.end()) {
            continue;
        }
        ++shared;
        ok += it->second >= pa ? 1 : 0;
    }
    return shared == 0 ? kNan : static_cast<double>(ok) / static_cast<double>(shared);
}

std::vector<CheckRow> prr_checks(const Outputs& out, const Thresholds& t)
{
    const auto groups = prr_series(out, t.prr_range_m);
    std::vector<CheckRow> rows;
    for (double rho : t.rho_values) {
        bool any = false;
        for (const auto& [key, pts] : groups) {
            if (std::get<3>(key) != rho) {
                continue;
            }
            any = true;
            CheckRow row{"prr_monotone_in_pt", scope_of(key), kNan, "nondecreasing", Status::Skipped, series(pts)};
            const auto missing = missing_pts(pts, t.pt_values);
            if (!missing.empty()) {
                row.detail = "missing pt " + missing;
            } else {
                double worst = std::numeric_limits<double>::infinity();
                double prev = kNan;
                for (double pt : t.pt_values) {
                    const double v = pts.at(pt);
                    if (!std::isnan(prev)) {
                        worst = std::min(worst, v - prev);
                    }
                    prev = v;
                }
                row.value = worst;
                row.status = worst >= 0.0 ? Status::Pass : Status::Fail;
            }
            rows.push_back(row);

            if (rho == t.prr_gain_rho) {
                const double lo = t.pt_values.front();
                const double hi = t.pt_values.back();
                CheckRow gain{"prr_gain_" + fmt(hi) + "_vs_" + fmt(lo), scope_of(key), kNan, ">= " + fmt(t.prr_gain_min),
                              Status::Skipped, ""};
                if (pts.count(lo) != 0 && pts.count(hi) != 0) {
                    gain.value = pts.at(hi) - pts.at(lo);
                    gain.status = gain.value >= t.prr_gain_min ? Status::Pass : Status::Fail;
                } else {
                    gain.detail = "missing pt " + missing_pts(pts, {lo, hi});
                }
                rows.push_back(gain);
            }
        }
        if (!any) {
            rows.push_back({"prr_monotone_in_pt", "rho=" + fmt(rho), kNan, "nondecreasing", Status::Skipped,
                            "no points"});
        }
    }
    return rows;
}

std::vector<CheckRow> energy_checks(const Outputs& out, const Thresholds& t)
{
    const auto metas = metas_of(out);
    ByPt<double> groups;
    for (const auto& r : out.energy) {
        const auto& m = metas.at(r.meta.fingerprint);
        groups[key_of(m)].emplace(m.pt_dbm, r.total_joules);
    }
    const double lo = t.pt_values.front();
    const double hi = t.pt_values.back();
    const std::string name = "energy_ratio_" + fmt(hi) + "_over_" + fmt(lo);
    const std::string band = "[" + fmt(t.energy_ratio_lo) + " .. " + fmt(t.energy_ratio_hi) + "]";
    std::vector<CheckRow> rows;
    bool target_seen = false;
    for (const auto& [key, pts] : groups) {
        target_seen = target_seen || std::get<3>(key) == t.energy_ratio_rho;
        CheckRow row{name, scope_of(key), kNan, band, Status::Skipped, ""};
        if (pts.count(lo) != 0 && pts.count(hi) != 0 && pts.at(lo) > 0.0) {
            row.value = pts.at(hi) / pts.at(lo);
            row.status = row.value >= t.energy_ratio_lo && row.value <= t.energy_ratio_hi ? Status::Pass : Status::Fail;
        } else {
            row.detail = "missing pt " + missing_pts(pts, {lo, hi});
        }
        rows.push_back(row);
    }
    if (!target_seen) {
        rows.push_back({name, "rho=" + fmt(t.energy_ratio_rho), kNan, band, Status::Skipped, "no points"});
    }
    return rows;
}

std::vector<CheckRow> dcomm_checks(const Outputs& out, const Thresholds& t)
{
    const auto metas = metas_of(out);
    ByPt<double> groups;
    for (const auto& r : out.dcomm) {
        const auto& m = metas.at(r.meta.fingerprint);
        groups[key_of(m)].emplace(m.pt_dbm, r.dcomm_p99_m);
    }
    std::vector<CheckRow> rows;
    for (double v : t.speed_values) {
        bool any = false;
        for (const auto& [key, pts] : groups) {
            if (std::get<2>(key) != v) {
                continue;
            }
            any = true;
            CheckRow row{"dcomm_decreasing_in_pt", scope_of(key), kNan, "strictly decreasing", Status::Skipped,
                         series(pts)};
            const auto missing = missing_pts(pts, t.pt_values);
            if (!missing.empty()) {
                row.detail = "missing pt " + missing;
            } else {
                double worst = std::numeric_limits<double>::infinity();
                double prev = kNan;
                for (double pt : t.pt_values) {
                    const double d = pts.at(pt);
                    if (!std::isnan(prev)) {
                        worst = std::min(worst, prev - d);
                    }
                    prev = d;
                }
                row.value = worst;
                row.status = worst > 0.0 ? Status::Pass : Status::Fail;
            }
            rows.push_back(row);
        }
        if (!any) {
            rows.push_back({"dcomm_decreasing_in_pt", "v=" + fmt(v), kNan, "strictly decreasing", Status::Skipped,
                            "no points"});
        }
    }

    const double v_lo = t.speed_values.front();
    const double v_hi = t.speed_values.back();
    const std::string name = "dcomm_ratio_v" + fmt(v_hi) + "_over_v" + fmt(v_lo);
    const std::string band = "[" + fmt(t.dcomm_ratio_lo) + " .. " + fmt(t.dcomm_ratio_hi) + "]";
    bool any_ratio = false;
    for (const auto& [key, pts] : groups) {
        if (std::get<2>(key) != v_lo) {
            continue;
        }
        const GroupKey fast{std::get<0>(key), std::get<1>(key), v_hi, std::get<3>(key)};
        const auto it = groups.find(fast);
        if (it == groups.end()) {
            continue;
        }
        for (const auto& [pt, d_lo] : pts) {
            const auto jt = it->second.find(pt);
            if (jt == it->second.end()) {
                continue;
            }
            any_ratio = true;
            CheckRow row{name, scope_of(key) + " pt=" + fmt(pt), kNan, band, Status::Skipped, ""};
            if (d_lo > 0.0) {
                row.value = jt->second / d_lo;
                row.status =
                    row.value >= t.dcomm_ratio_lo && row.value <= t.dcomm_ratio_hi ? Status::Pass : Status::Fail;
            } else {
                row.detail = "zero baseline";
            }
            rows.push_back(row);
        }
    }
    if (!any_ratio) {
        rows.push_back({name, "", kNan, band, Status::Skipped, "no speed pair"});
    }
    return rows;
}

std::vector<CheckRow> scs_checks(const Outputs& out, const Thresholds& t)
{
    // (mcs, v, rho, pt) -> scs -> fingerprint
    std::map<std::tuple<int, double, double, double>, std::map<int, std::string>> pairs;
    for (const auto& [fp, m] : metas_of(out)) {
        if (m.v_kmh == t.scs_speed_kmh && m.scs_khz != 0) {
            pairs[{m.mcs, m.v_kmh, m.rho, m.pt_dbm}].emplace(m.scs_khz, fp);
        }
    }
    const std::string band = ">= " + fmt(t.scs_fraction_min);
    std::vector<CheckRow> rows;
    for (const auto& [key, by_scs] : pairs) {
        const auto a = by_scs.find(15);
        const auto b = by_scs.find(30);
        if (a == by_scs.end() || b == by_scs.end()) {
            continue;
        }
        const auto& [mcs, v, rho, pt] = key;
        CheckRow row{"scs30_not_worse_than_scs15",
                     "mcs=" + std::to_string(mcs) + " v=" + fmt(v) + " rho=" + fmt(rho) + " pt=" + fmt(pt), kNan, band,
                     Status::Skipped, "fraction of shared bins"};
        row.value = fraction_bins_not_worse(out.prr, a->second, b->second);
        if (!std::isnan(row.value)) {
            row.status = row.value >= t.scs_fraction_min ? Status::Pass : Status::Fail;
        }
        rows.push_back(row);
    }
    if (rows.empty()) {
        rows.push_back({"scs30_not_worse_than_scs15", "v=" + fmt(t.scs_speed_kmh), kNan, band, Status::Skipped,
                        "no scs pair"});
    }
    return rows;
}

std::vector<CheckRow> run_checks(const Outputs& out, const Thresholds& t)
{
    std::vector<CheckRow> rows = prr_checks(out, t);
    for (auto part : {energy_checks(out, t), dcomm_checks(out, t), scs_checks(out, t)}) {
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

void write_table(std::ostream& os, std::span<const CheckRow> rows)
{
    for (const auto& r : rows) {
        char value[32];
        std::snprintf(value, sizeof value, "%.4f", r.value);
        os << to_string(r.status) << "  " << r.check << "  [" << r.scope << "]  value=" << value
           << "  want " << r.threshold;
        if (!r.detail.empty()) {
            os << "  (" << r.detail << ")";
        }
        os << '\n';
    }
}

void write_csv(std::ostream& os, std::span<const CheckRow> rows)
{
    os << "check,scope,value,threshold,status,detail\n";
    for (const auto& r : rows) {
        os << r.check << ',' << r.scope << ',' << format_number(r.value) << ',' << r.threshold << ','
           << to_string(r.status) << ',' << r.detail << '\n';
    }
}

} // namespace nrv2x::report
