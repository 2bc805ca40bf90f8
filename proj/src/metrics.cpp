#include "nrv2x/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace nrv2x {

PointMeta point_meta(const ScenarioConfig& cfg)
{
    return PointMeta{fingerprint(cfg), cfg.pt_dbm, cfg.scs_khz, cfg.mcs_index, cfg.density_rho, cfg.mean_speed_kmh};
}

MetricsAccumulator::MetricsAccumulator(double bin_width_m, double max_distance_m)
    : bin_width_(bin_width_m),
      max_distance_(max_distance_m),
      bins_(static_cast<std::size_t>(std::ceil(max_distance_m / bin_width_m)))
{
    if (!(bin_width_m > 0.0) || !(max_distance_m > 0.0)) {
        throw std::invalid_argument("MetricsAccumulator: bin width and range must be > 0");
    }
}

bool MetricsAccumulator::record_reception(double distance_m, bool success, double analog_per)
{
    if (!(distance_m >= 0.0) || distance_m >= max_distance_) {
        ++dropped_;
        return false;
    }
    auto& bin = bins_[static_cast<std::size_t>(distance_m / bin_width_)];
    ++bin.receptions;
    bin.successes += success ? 1 : 0;
    bin.per_sum += analog_per;
    return true;
}

void MetricsAccumulator::record_attempts(int tx, std::uint64_t count)
{
    attempts_[tx] += count;
}

void MetricsAccumulator::record_delivery(double delay_slots, double speed_mps)
{
    delays_.push_back({delay_slots, speed_mps, false});
    ++delivered_;
}

void MetricsAccumulator::record_undelivered(double horizon_slots, double speed_mps)
{
    delays_.push_back({horizon_slots, speed_mps, true});
}

std::optional<double> MetricsAccumulator::prr(std::size_t bin) const
{
    const auto& b = bins_.at(bin);
    if (b.receptions == 0) {
        return std::nullopt;
    }
    return static_cast<double>(b.successes) / static_cast<double>(b.receptions);
}

std::optional<double> MetricsAccumulator::mean_per(std::size_t bin) const
{
    const auto& b = bins_.at(bin);
    if (b.receptions == 0) {
        return std::nullopt;
    }
    return b.per_sum / static_cast<double>(b.receptions);
}

std::uint64_t MetricsAccumulator::total_attempts() const
{
    std::uint64_t total = 0;
    for (const auto& [tx, n] : attempts_) {
        total += n;
    }
    return total;
}

void MetricsAccumulator::merge(const MetricsAccumulator& other)
{
    if (other.bin_width_ != bin_width_ || other.bins_.size() != bins_.size()) {
        throw std::invalid_argument("MetricsAccumulator::merge: incompatible binning");
    }
    for (std::size_t i = 0; i < bins_.size(); ++i) {
        bins_[i].receptions += other.bins_[i].receptions;
        bins_[i].successes += other.bins_[i].successes;
        bins_[i].per_sum += other.bins_[i].per_sum;
    }
    dropped_ += other.dropped_;
    for (const auto& [tx, n] : other.attempts_) {
        attempts_[tx] += n;
    }
    delays_.insert(delays_.end(), other.delays_.begin(), other.delays_.end());
    delivered_ += other.delivered_;
    replications_ += other.replications_;
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty()) {
        throw std::invalid_argument("quantile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

DcommEstimate measured_d_comm(std::span<const double> delays_slots, double v_mps, double slot_s, double q)
{
    std::vector<DelaySample> samples;
    samples.reserve(delays_slots.size());
    for (double d : delays_slots) {
        samples.push_back({d, v_mps, false});
    }
    return measured_d_comm(samples, slot_s, q);
}

DcommEstimate measured_d_comm(std::span<const DelaySample> samples, double slot_s, double q)
{
    if (samples.empty()) {
        throw std::invalid_argument("measured_d_comm: no delay samples");
    }
    std::vector<double> travel;
    travel.reserve(samples.size());
    std::size_t censored = 0;
    for (const auto& s : samples) {
        travel.push_back(s.delay_slots * slot_s * s.speed_mps);
        censored += s.censored ? 1 : 0;
    }
    DcommEstimate d;
    d.samples = samples.size();
    d.mean_m = std::accumulate(travel.begin(), travel.end(), 0.0) / static_cast<double>(travel.size());
    d.quantile_m = quantile(std::move(travel), q);
    d.censored_fraction = static_cast<double>(censored) / static_cast<double>(samples.size());
    return d;
}

EnergyRow energy_report(const MetricsAccumulator& acc, double pt_w, double attempt_duration_s)
{
    EnergyRow e;
    e.total_attempts = acc.total_attempts();
    e.total_joules = static_cast<double>(e.total_attempts) * pt_w * attempt_duration_s;
    e.joules_per_delivered = acc.delivered() > 0 ? e.total_joules / static_cast<double>(acc.delivered())
                                                 : std::numeric_limits<double>::quiet_NaN();
    return e;
}

std::string format_number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

namespace {

std::string meta_prefix(const PointMeta& m)
{
    return m.fingerprint + ',' + format_number(m.pt_dbm) + ',' + std::to_string(m.scs_khz) + ',' +
           std::to_string(m.mcs) + ',' + format_number(m.rho) + ',' + format_number(m.v_kmh);
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path, const char* header)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw std::runtime_error(path.string() + ": unexpected header");
    }
    const auto width = split_csv_line(header).size();
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != width) {
            throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

double to_double(const std::string& s)
{
    return s == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
}

} // namespace

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

void write_prr_rows(std::ostream& out, const PointMeta& meta, const MetricsAccumulator& acc)
{
    const auto prefix = meta_prefix(meta);
    for (std::size_t i = 0; i < acc.bins().size(); ++i) {
        const auto prr = acc.prr(i);
        if (!prr) {
            continue;
        }
        const auto& b = acc.bins()[i];
        const double lo = static_cast<double>(i) * acc.bin_width();
        const double hi = std::min(lo + acc.bin_width(), acc.max_distance());
        out << prefix << ',' << format_number(lo) << ',' << format_number(hi) << ',' << b.receptions << ','
            << b.successes << ',' << format_number(*prr) << '\n';
    }
}

void write_dcomm_row(std::ostream& out, const PointMeta& m, const DcommEstimate& d)
{
    out << m.fingerprint << ',' << format_number(m.pt_dbm) << ',' << format_number(m.v_kmh) << ','
        << format_number(m.rho) << ',' << format_number(d.quantile_m) << ',' << format_number(d.mean_m) << ','
        << format_number(d.censored_fraction) << '\n';
}

void write_energy_row(std::ostream& out, const PointMeta& m, const EnergyRow& e)
{
    out << m.fingerprint << ',' << format_number(m.pt_dbm) << ',' << format_number(m.rho) << ',' << e.total_attempts
        << ',' << format_number(e.total_joules) << ',' << format_number(e.joules_per_delivered) << '\n';
}

std::vector<PrrRow> read_prr_csv(const std::filesystem::path& path)
{
    std::vector<PrrRow> rows;
    for (const auto& f : read_rows(path, kPrrHeader)) {
        PrrRow r;
        r.meta = {f[0], to_double(f[1]), std::stoi(f[2]), std::stoi(f[3]), to_double(f[4]), to_double(f[5])};
        r.bin_low_m = to_double(f[6]);
        r.bin_high_m = to_double(f[7]);
        r.receptions = std::stoull(f[8]);
        r.successes = std::stoull(f[9]);
        r.prr = to_double(f[10]);
        rows.push_back(r);
    }
    return rows;
}

std::vector<DcommRow> read_dcomm_csv(const std::filesystem::path& path)
{
    std::vector<DcommRow> rows;
    for (const auto& f : read_rows(path, kDcommHeader)) {
        DcommRow r;
        r.meta.fingerprint = f[0];
        r.meta.pt_dbm = to_double(f[1]);
        r.meta.v_kmh = to_double(f[2]);
        r.meta.rho = to_double(f[3]);
        r.dcomm_p99_m = to_double(f[4]);
        r.dcomm_mean_m = to_double(f[5]);
        r.censored_fraction = to_double(f[6]);
        rows.push_back(r);
    }
    return rows;
}

std::vector<EnergyCsvRow> read_energy_csv(const std::filesystem::path& path)
{
    std::vector<EnergyCsvRow> rows;
    for (const auto& f : read_rows(path, kEnergyHeader)) {
        EnergyCsvRow r;
        r.meta.fingerprint = f[0];
        r.meta.pt_dbm = to_double(f[1]);
        r.meta.rho = to_double(f[2]);
        r.total_attempts = std::stoull(f[3]);
        r.total_joules = to_double(f[4]);
        r.joules_per_delivered = to_double(f[5]);
        rows.push_back(r);
    }
    return rows;
}

void write_ledger(std::ostream& out, std::span<const LedgerRow> rows)
{
    out << kLedgerHeader << '\n';
    char dist[40];
    for (const auto& r : rows) {
        std::snprintf(dist, sizeof dist, "%.17g", r.distance_m);
        out << r.replication << ',' << r.packet_id << ',' << r.tx << ',' << r.attempt << ',' << r.slot << ',' << r.subchannel_start << ','
            << r.subchannel_count << ',' << r.rx << ',' << dist << ',' << (r.success ? "success" : "failure") << ','
            << format_number(r.per) << '\n';
    }
}

std::vector<LedgerRow> read_ledger(const std::filesystem::path& path)
{
    std::vector<LedgerRow> rows;
    for (const auto& f : read_rows(path, kLedgerHeader)) {
        LedgerRow r;
        r.replication = std::stoi(f[0]);
        r.packet_id = std::stoll(f[1]);
        r.tx = std::stoi(f[2]);
        r.attempt = std::stoi(f[3]);
        r.slot = std::stoll(f[4]);
        r.subchannel_start = std::stoi(f[5]);
        r.subchannel_count = std::stoi(f[6]);
        r.rx = std::stoi(f[7]);
        r.distance_m = std::stod(f[8]);
        r.success = f[9] == "success";
        r.per = to_double(f[10]);
        rows.push_back(r);
    }
    return rows;
}

} // namespace nrv2x
