#include "nrv2x/config.hpp"

#include "nrv2x/rng.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace nrv2x {

std::string_view to_string(HarqMode mode)
{
    return mode == HarqMode::BlindFixed ? "blind_fixed" : "truncated_stop";
}

std::string_view to_string(OverlapModel model)
{
    return model == OverlapModel::Fraction ? "fraction" : "all_or_nothing";
}

int default_dmrs_re_per_slot(int scs_khz)
{
    return scs_khz == 15 ? 24 : 18;
}

int ScenarioConfig::dmrs_re_per_slot() const
{
    return dmrs_override.value_or(default_dmrs_re_per_slot(scs_khz));
}

int ScenarioConfig::modulation_order() const
{
    return mcs_index <= 10 ? 4 : 16;
}

double ScenarioConfig::slot_duration_s() const
{
    return 1e-3 * 15.0 / scs_khz;
}

int ScenarioConfig::slots_per_period() const
{
    return static_cast<int>(std::lround(allocation_period_ms * 1e-3 / slot_duration_s()));
}

double ScenarioConfig::rsu_x() const
{
    return rsu_position_m < 0.0 ? road_length_m / 2.0 : rsu_position_m;
}

int ScenarioConfig::vehicle_count() const
{
    return static_cast<int>(std::lround(density_rho * road_length_m / 1000.0));
}

double ScenarioConfig::occupied_bandwidth_hz() const
{
    return static_cast<double>(subchannels_per_packet) * subchannel_prbs * 12.0 * scs_khz * 1e3;
}

double ScenarioConfig::power_density_dbm_per_mhz() const
{
    return pt_dbm - 10.0 * std::log10(bandwidth_mhz);
}

namespace {

std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text)
{
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') {
        ++first;
    }
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(v)) {
        throw ConfigError(key, "expected a finite number, got '" + text + "'");
    }
    return v;
}

long long parse_integer(const std::string& key, const std::string& text)
{
    const double v = parse_double(key, text);
    if (v != std::floor(v) || std::fabs(v) > 9.0e15) {
        throw ConfigError(key, "expected an integer, got '" + text + "'");
    }
    return static_cast<long long>(v);
}

bool parse_bool(const std::string& key, const std::string& text)
{
    if (text == "true" || text == "1" || text == "yes" || text == "on") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no" || text == "off") {
        return false;
    }
    throw ConfigError(key, "expected a boolean, got '" + text + "'");
}

enum class Kind
{
    Real,
    Integer,
    Text,
};

struct Field
{
    std::string name;
    Kind kind;
    bool sweepable;
    std::function<void(ScenarioConfig&, const std::string&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

Field real(std::string name, double ScenarioConfig::*member)
{
    return {name, Kind::Real, true,
            [member, name](ScenarioConfig& c, const std::string& v) { c.*member = parse_double(name, v); },
            [member](const ScenarioConfig& c) { return format_double(c.*member); }};
}

Field integer(std::string name, int ScenarioConfig::*member)
{
    return {name, Kind::Integer, true,
            [member, name](ScenarioConfig& c, const std::string& v) {
                const auto n = parse_integer(name, v);
                if (n < -2147483647LL || n > 2147483647LL) {
                    throw ConfigError(name, "integer out of range");
                }
                c.*member = static_cast<int>(n);
            },
            [member](const ScenarioConfig& c) { return std::to_string(c.*member); }};
}

const std::vector<Field>& registry()
{
    static const std::vector<Field> fields = [] {
        std::vector<Field> f;
        f.push_back(real("road_length", &ScenarioConfig::road_length_m));
        f.push_back(integer("lanes_per_direction", &ScenarioConfig::lanes_per_direction));
        f.push_back(real("lane_width", &ScenarioConfig::lane_width_m));
        f.push_back(real("density_rho", &ScenarioConfig::density_rho));
        f.push_back(real("mean_speed_v", &ScenarioConfig::mean_speed_kmh));
        f.push_back(real("speed_stddev", &ScenarioConfig::speed_stddev_kmh));
        f.push_back(real("speed_limit", &ScenarioConfig::speed_limit_kmh));
        f.push_back(real("fc", &ScenarioConfig::fc_ghz));
        f.push_back(real("bandwidth", &ScenarioConfig::bandwidth_mhz));
        f.push_back(real("noise_figure", &ScenarioConfig::noise_figure_db));
        f.push_back(real("antenna_gain_tx", &ScenarioConfig::antenna_gain_tx_dbi));
        f.push_back(real("antenna_gain_rx", &ScenarioConfig::antenna_gain_rx_dbi));
        f.push_back(real("pt_dbm", &ScenarioConfig::pt_dbm));
        f.push_back(integer("scs_khz", &ScenarioConfig::scs_khz));
        f.push_back(integer("mcs_index", &ScenarioConfig::mcs_index));
        f.push_back({"mcs_table", Kind::Text, false,
                     [](ScenarioConfig& c, const std::string& v) { c.mcs_table_path = v; },
                     [](const ScenarioConfig& c) { return c.mcs_table_path; }});
        f.push_back(integer("packet_size_bytes", &ScenarioConfig::packet_size_bytes));
        f.push_back(real("pps", &ScenarioConfig::pps));
        f.push_back(integer("harq_max_attempts", &ScenarioConfig::harq_max_attempts));
        f.push_back({"harq_mode", Kind::Text, false,
                     [](ScenarioConfig& c, const std::string& v) {
                         if (v == "blind_fixed") {
                             c.harq_mode = HarqMode::BlindFixed;
                         } else if (v == "truncated_stop") {
                             c.harq_mode = HarqMode::TruncatedStop;
                         } else {
                             throw ConfigError("harq_mode", "expected blind_fixed or truncated_stop, got '" + v + "'");
                         }
                     },
                     [](const ScenarioConfig& c) { return std::string(to_string(c.harq_mode)); }});
        f.push_back(integer("subchannel_prbs", &ScenarioConfig::subchannel_prbs));
        f.push_back(integer("num_subchannels", &ScenarioConfig::num_subchannels));
        f.push_back(integer("subchannels_per_packet", &ScenarioConfig::subchannels_per_packet));
        f.push_back(real("keep_probability", &ScenarioConfig::keep_probability));
        f.push_back(real("allocation_period", &ScenarioConfig::allocation_period_ms));
        f.push_back(real("sensing_threshold", &ScenarioConfig::sensing_threshold_dbm));
        f.push_back(integer("reselection_min", &ScenarioConfig::reselection_min));
        f.push_back(integer("reselection_max", &ScenarioConfig::reselection_max));
        f.push_back(real("fallback_fraction", &ScenarioConfig::fallback_fraction));
        f.push_back({"dmrs_re_per_slot", Kind::Integer, false,
                     [](ScenarioConfig& c, const std::string& v) {
                         c.dmrs_override = static_cast<int>(parse_integer("dmrs_re_per_slot", v));
                     },
                     [](const ScenarioConfig& c) { return std::to_string(c.dmrs_re_per_slot()); }});
        f.push_back({"interference_overlap", Kind::Text, false,
                     [](ScenarioConfig& c, const std::string& v) {
                         if (v == "fraction") {
                             c.interference_overlap = OverlapModel::Fraction;
                         } else if (v == "all_or_nothing") {
                             c.interference_overlap = OverlapModel::AllOrNothing;
                         } else {
                             throw ConfigError("interference_overlap",
                                               "expected fraction or all_or_nothing, got '" + v + "'");
                         }
                     },
                     [](const ScenarioConfig& c) { return std::string(to_string(c.interference_overlap)); }});
        f.push_back(real("shadowing_sigma", &ScenarioConfig::shadowing_sigma_db));
        f.push_back(real("decorr_distance", &ScenarioConfig::decorr_distance_m));
        f.push_back({"ici_enabled", Kind::Text, false,
                     [](ScenarioConfig& c, const std::string& v) { c.ici_enabled = parse_bool("ici_enabled", v); },
                     [](const ScenarioConfig& c) { return std::string(c.ici_enabled ? "true" : "false"); }});
        f.push_back(real("rsu_position", &ScenarioConfig::rsu_position_m));
        f.push_back(real("rsu_lateral_offset", &ScenarioConfig::rsu_lateral_offset_m));
        f.push_back(real("sim_duration", &ScenarioConfig::sim_duration_s));
        f.push_back(real("warmup", &ScenarioConfig::warmup_s));
        f.push_back(integer("replications", &ScenarioConfig::replications));
        f.push_back({"master_seed", Kind::Integer, false,
                     [](ScenarioConfig& c, const std::string& v) {
                         std::uint64_t seed = 0;
                         auto res = std::from_chars(v.data(), v.data() + v.size(), seed);
                         if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
                             throw ConfigError("master_seed", "expected an unsigned integer, got '" + v + "'");
                         }
                         c.master_seed = seed;
                     },
                     [](const ScenarioConfig& c) { return std::to_string(c.master_seed); }});
        f.push_back(real("prr_bin_width", &ScenarioConfig::prr_bin_width_m));
        f.push_back(real("max_eval_distance", &ScenarioConfig::max_eval_distance_m));
        f.push_back(real("fixed_per", &ScenarioConfig::fixed_per));
        return f;
    }();
    return fields;
}

const Field* find_field(std::string_view key)
{
    const auto& fields = registry();
    auto it = std::find_if(fields.begin(), fields.end(), [&](const Field& f) { return f.name == key; });
    return it == fields.end() ? nullptr : &*it;
}

void require(bool ok, const char* field, const std::string& rule)
{
    if (!ok) {
        throw ConfigError(field, rule);
    }
}

} // namespace

std::vector<std::string> field_names()
{
    std::vector<std::string> names;
    for (const auto& f : registry()) {
        names.push_back(f.name);
    }
    return names;
}

bool is_sweepable(std::string_view key)
{
    const Field* f = find_field(key);
    return f != nullptr && f->sweepable;
}

void set_field(ScenarioConfig& cfg, const std::string& key, const std::string& value)
{
    const Field* f = find_field(key);
    if (f == nullptr) {
        throw ConfigError(key, "unknown key");
    }
    f->set(cfg, value);
}

std::string get_field(const ScenarioConfig& cfg, const std::string& key)
{
    const Field* f = find_field(key);
    if (f == nullptr) {
        throw ConfigError(key, "unknown key");
    }
    return f->get(cfg);
}

void apply_override(ScenarioConfig& cfg, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("", "override must have the form key=value: '" + std::string(assignment) + "'");
    }
    set_field(cfg, std::string(assignment.substr(0, eq)), std::string(assignment.substr(eq + 1)));
}

void validate(const ScenarioConfig& c)
{
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    require(positive(c.road_length_m), "road_length", "must be > 0");
    require(c.lanes_per_direction >= 1, "lanes_per_direction", "must be >= 1");
    require(positive(c.lane_width_m), "lane_width", "must be > 0");
    require(std::isfinite(c.density_rho) && c.density_rho >= 0.0, "density_rho", "must be >= 0");
    require(std::isfinite(c.mean_speed_kmh) && c.mean_speed_kmh >= 0.0, "mean_speed_v", "must be >= 0");
    require(std::isfinite(c.speed_stddev_kmh) && c.speed_stddev_kmh >= 0.0, "speed_stddev", "must be >= 0");
    require(positive(c.speed_limit_kmh), "speed_limit", "must be > 0");
    require(c.mean_speed_kmh <= c.speed_limit_kmh, "mean_speed_v", "must not exceed speed_limit");
    require(positive(c.fc_ghz), "fc", "must be > 0");
    require(positive(c.bandwidth_mhz), "bandwidth", "must be > 0");
    require(std::isfinite(c.noise_figure_db), "noise_figure", "must be finite");
    require(std::isfinite(c.pt_dbm), "pt_dbm", "must be finite");
    require(c.scs_khz == 15 || c.scs_khz == 30, "scs_khz", "must be 15 or 30");
    require((c.mcs_index >= 8 && c.mcs_index <= 10) || (c.mcs_index >= 12 && c.mcs_index <= 18), "mcs_index",
            "must be in {8,9,10,12..18}");
    require(c.packet_size_bytes >= 1, "packet_size_bytes", "must be >= 1");
    require(positive(c.pps), "pps", "must be > 0");
    require(c.harq_max_attempts >= 1, "harq_max_attempts", "must be >= 1");
    require(c.subchannel_prbs >= 1, "subchannel_prbs", "must be >= 1");
    require(c.num_subchannels >= 1, "num_subchannels", "must be >= 1");
    require(c.subchannels_per_packet >= 1, "subchannels_per_packet", "must be >= 1");
    require(c.subchannels_per_packet <= c.num_subchannels, "subchannels_per_packet",
            "must not exceed num_subchannels");
    require(static_cast<double>(c.num_subchannels) * c.subchannel_prbs * 12.0 * c.scs_khz * 1e-3 <= c.bandwidth_mhz,
            "num_subchannels", "resource pool exceeds the channel bandwidth");
    require(c.keep_probability >= 0.0 && c.keep_probability <= 1.0, "keep_probability", "must be in [0, 1]");
    require(positive(c.allocation_period_ms), "allocation_period", "must be > 0");
    {
        const double slots = c.allocation_period_ms * 1e-3 / c.slot_duration_s();
        require(std::fabs(slots - std::round(slots)) < 1e-9 && slots >= 1.0, "allocation_period",
                "must be a whole number of slots");
    }
    require(std::isfinite(c.sensing_threshold_dbm), "sensing_threshold", "must be finite");
    require(c.reselection_min >= 1, "reselection_min", "must be >= 1");
    require(c.reselection_max >= c.reselection_min, "reselection_max", "must be >= reselection_min");
    require(c.fallback_fraction > 0.0 && c.fallback_fraction <= 1.0, "fallback_fraction", "must be in (0, 1]");
    if (c.dmrs_override) {
        require(*c.dmrs_override >= 0 && *c.dmrs_override < 12 * 14, "dmrs_re_per_slot", "must be in [0, 168)");
    }
    require(std::isfinite(c.shadowing_sigma_db) && c.shadowing_sigma_db >= 0.0, "shadowing_sigma", "must be >= 0");
    require(positive(c.decorr_distance_m), "decorr_distance", "must be > 0");
    require(c.rsu_position_m <= c.road_length_m, "rsu_position", "must lie within the road");
    require(std::isfinite(c.rsu_lateral_offset_m) && c.rsu_lateral_offset_m >= 0.0, "rsu_lateral_offset",
            "must be >= 0");
    require(std::isfinite(c.sim_duration_s) && c.sim_duration_s >= 0.0, "sim_duration", "must be >= 0");
    require(std::isfinite(c.warmup_s) && c.warmup_s >= 0.0, "warmup", "must be >= 0");
    require(c.replications >= 1, "replications", "must be >= 1");
    require(positive(c.prr_bin_width_m), "prr_bin_width", "must be > 0");
    require(positive(c.max_eval_distance_m), "max_eval_distance", "must be > 0");
    require(c.fixed_per <= 1.0, "fixed_per", "must be <= 1 (negative disables)");
}

ScenarioConfig parse_config(std::string_view yaml_text)
{
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::Exception& e) {
        throw ConfigError("", std::string("parse failure: ") + e.what());
    }
    ScenarioConfig cfg;
    if (root.IsNull()) {
        validate(cfg);
        return cfg;
    }
    if (!root.IsMap()) {
        throw ConfigError("", "parse failure: top level must be a key-value mapping");
    }
    std::set<std::string> seen;
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (!seen.insert(key).second) {
            throw ConfigError(key, "duplicate key");
        }
        if (!kv.second.IsScalar()) {
            throw ConfigError(key, "value must be a scalar");
        }
        set_field(cfg, key, kv.second.Scalar());
    }
    validate(cfg);
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot open config file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string to_yaml(const ScenarioConfig& cfg)
{
    YAML::Emitter out;
    out << YAML::BeginMap;
    for (const auto& f : registry()) {
        if (f.name == "dmrs_re_per_slot" && !cfg.dmrs_override) {
            continue;
        }
        out << YAML::Key << f.name << YAML::Value;
        if (f.kind == Kind::Text) {
            out << YAML::DoubleQuoted << f.get(cfg);
        } else {
            out << f.get(cfg);
        }
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::string fingerprint(const ScenarioConfig& cfg)
{
    std::string canonical;
    for (const auto& f : registry()) {
        canonical += f.name;
        canonical += '=';
        canonical += f.get(cfg);
        canonical += '\n';
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical)));
    return hex;
}

std::vector<ScenarioConfig> expand_sweep(const ScenarioConfig& base, const std::vector<SweepAxis>& axes,
                                         SeedPolicy policy)
{
    std::set<std::string> seen;
    std::size_t count = 1;
    for (const auto& axis : axes) {
        if (!is_sweepable(axis.field)) {
            throw ConfigError(axis.field, find_field(axis.field) ? "field is not sweepable" : "unknown key");
        }
        if (!seen.insert(axis.field).second) {
            throw ConfigError(axis.field, "duplicate sweep axis");
        }
        if (axis.values.empty()) {
            throw ConfigError(axis.field, "sweep axis has no values");
        }
        count *= axis.values.size();
    }

    std::vector<ScenarioConfig> points;
    points.reserve(count);
    for (std::size_t index = 0; index < count; ++index) {
        ScenarioConfig point = base;
        std::size_t rem = index;
        for (auto axis = axes.rbegin(); axis != axes.rend(); ++axis) {
            const auto n = axis->values.size();
            set_field(point, axis->field, format_double(axis->values[rem % n]));
            rem /= n;
        }
        point.master_seed = derive_seed(base.master_seed, policy == SeedPolicy::Shared ? 0 : index);
        validate(point);
        points.push_back(std::move(point));
    }
    return points;
}

} // namespace nrv2x
