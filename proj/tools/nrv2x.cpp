// nrv2x: closed-form calculations, single runs, sweeps and trend reports.

#include "nrv2x/analytic.hpp"
#include "nrv2x/config.hpp"
#include "nrv2x/mobility.hpp"
#include "nrv2x/phy_link.hpp"
#include "nrv2x/report.hpp"
#include "nrv2x/sim_engine.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace nrv2x;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kRuntime = 2, kAcceptance = 3 };

struct ValidationError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct ScenarioArgs
{
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

void add_scenario_options(CLI::App* cmd, ScenarioArgs& a)
{
    cmd->add_option("-c,--config", a.config_path, "YAML scenario file");
    cmd->add_option("--set", a.overrides, "override a config key (key=value), repeatable");
    cmd->add_option("--seed", a.seed, "master seed");
    cmd->add_option("-o,--out", a.out_dir, "output directory (default: $NRV2X_OUT_DIR/<timestamp>)");
}

ScenarioConfig resolve_base(const ScenarioArgs& a)
{
    ScenarioConfig cfg = a.config_path.empty() ? ScenarioConfig{} : load_config(a.config_path);
    return cfg;
}

void apply_user_overrides(ScenarioConfig& cfg, const ScenarioArgs& a)
{
    for (const auto& o : a.overrides) {
        apply_override(cfg, o);
    }
    if (a.seed) {
        cfg.master_seed = *a.seed;
    }
    validate(cfg);
}

fs::path output_dir(const std::string& requested)
{
    if (!requested.empty()) {
        return requested;
    }
    const char* env = std::getenv("NRV2X_OUT_DIR");
    const fs::path root = env != nullptr && *env != '\0' ? fs::path(env) : fs::path("runs");
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "run-%Y%m%d-%H%M%S", std::localtime(&now));
    return root / stamp;
}

SweepAxis parse_axis(const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ValidationError("--axis expects field=v1,v2,...: '" + text + "'");
    }
    SweepAxis axis{text.substr(0, eq), {}};
    std::stringstream ss(text.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            axis.values.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::logic_error&) {
            throw ValidationError("--axis " + axis.field + ": '" + item + "' is not a number");
        }
    }
    return axis;
}

struct Preset
{
    std::vector<std::string> base; ///< overrides applied before the user's --set
    std::vector<SweepAxis> axes;
};

std::optional<Preset> find_preset(const std::string& name)
{
    if (name == "paper-grid") {
        return Preset{{"scs_khz=30", "mcs_index=8", "mean_speed_v=50"},
                      {{"pt_dbm", {23, 24, 25, 26}}, {"density_rho", {30, 50, 80, 100}}}};
    }
    if (name == "fig3-dcomm") {
        return Preset{{"scs_khz=30", "mcs_index=8", "density_rho=50", "replications=10"},
                      {{"mean_speed_v", {50, 80, 110}}, {"pt_dbm", {23, 24, 25, 26}}}};
    }
    if (name == "fig4-scs") {
        return Preset{{"mcs_index=8", "mean_speed_v=110", "pt_dbm=23", "ici_enabled=true"},
                      {{"density_rho", {30, 50, 80, 100}}, {"scs_khz", {15, 30}}}};
    }
    return std::nullopt;
}

void print_sweep_summary(const SweepSummary& s, const fs::path& dir)
{
    std::cout << "points: " << s.manifest.size() << " (ran " << s.executed << ", resumed " << s.resumed
              << ", failed " << s.failed << ")\n";
    for (const auto& row : s.manifest) {
        if (row.status != "ok") {
            std::cerr << "point " << row.index << " [" << row.fingerprint << "]: " << row.status << '\n';
        }
    }
    std::cout << "outputs: " << dir.string() << '\n';
}

// ---- analytic ----

struct AnalyticArgs
{
    std::vector<double> prr{0.9};
    double v_kmh = 50.0;
    double pps = 10.0;
    double n = 1.0;
    double n_pkt = 1.0;
    double pt_dbm = 23.0;
    std::optional<double> l_bits;
    std::optional<double> rate_bps;
    int h_attempts = 3;
    bool grid = false;
    ScenarioArgs scenario;
};

int cmd_analytic(const AnalyticArgs& a)
{
    ScenarioConfig cfg = resolve_base(a.scenario);
    apply_user_overrides(cfg, a.scenario);
    const McsTable mcs = McsTable::for_config(cfg);
    const LinkProfile profile = make_link_profile(cfg, mcs);
    const double l_bits = a.l_bits.value_or(cfg.packet_bits());
    const double rate = a.rate_bps.value_or(profile.rate_bps);

    auto energy = [&](double prr, double pt_dbm) {
        return analytic::e_total({a.n_pkt, analytic::dbm_to_watts(pt_dbm), l_bits, rate, a.h_attempts, prr});
    };

    if (a.grid) {
        std::cout << "prr,pt_dbm,expected_attempts,e_total_j,d_comm_m\n";
        for (int i = 1; i <= 20; ++i) {
            const double prr = i / 20.0;
            for (double pt : {23.0, 24.0, 25.0, 26.0}) {
                std::cout << format_number(prr) << ',' << format_number(pt) << ','
                          << format_number(analytic::expected_attempts(prr, a.h_attempts)) << ','
                          << format_number(energy(prr, pt)) << ','
                          << format_number(analytic::d_comm({a.n, kmh_to_mps(a.v_kmh), a.pps, prr})) << '\n';
            }
        }
        return kOk;
    }

    std::cout << "l_bits=" << format_number(l_bits) << " rate_bps=" << format_number(rate)
              << " h_attempts=" << a.h_attempts << " pt_dbm=" << format_number(a.pt_dbm) << '\n';
    for (double prr : a.prr) {
        std::cout << "prr=" << format_number(prr)
                  << " d_comm_m=" << format_number(analytic::d_comm({a.n, kmh_to_mps(a.v_kmh), a.pps, prr}))
                  << " expected_attempts=" << format_number(analytic::expected_attempts(prr, a.h_attempts))
                  << " e_total_j=" << format_number(energy(prr, a.pt_dbm)) << '\n';
        for (const auto& e : mcs.entries()) {
            std::cout << "  mcs=" << e.index << " M=" << e.modulation_order << " required_ebn0_db=";
            try {
                std::cout << format_number(analytic::required_ebn0_for_prr(prr, l_bits, e.modulation_order));
            } catch (const std::domain_error& err) {
                std::cout << "infeasible (" << err.what() << ")";
            }
            std::cout << '\n';
        }
    }
    return kOk;
}

// ---- simulate / sweep ----

struct SweepArgs
{
    ScenarioArgs scenario;
    std::vector<std::string> axes;
    std::string preset;
    bool crn = false;
    bool no_resume = false;
    bool ledger = false;
    unsigned threads = 0;
};

unsigned thread_count(unsigned requested)
{
    return requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
}

int cmd_simulate(const SweepArgs& a)
{
    ScenarioConfig cfg = resolve_base(a.scenario);
    apply_user_overrides(cfg, a.scenario);
    const fs::path dir = output_dir(a.scenario.out_dir);
    const auto summary = run_sweep({cfg}, dir, SweepOptions{1, !a.no_resume, a.ledger});
    print_sweep_summary(summary, dir);
    return summary.failed == 0 ? kOk : kRuntime;
}

int cmd_sweep(const SweepArgs& a)
{
    ScenarioConfig cfg = resolve_base(a.scenario);
    std::vector<SweepAxis> axes;
    bool crn = a.crn;
    if (!a.preset.empty()) {
        const auto preset = find_preset(a.preset);
        if (!preset) {
            throw ValidationError("unknown preset '" + a.preset + "' (paper-grid, fig3-dcomm, fig4-scs)");
        }
        for (const auto& o : preset->base) {
            apply_override(cfg, o);
        }
        axes = preset->axes;
        crn = true;
    }
    apply_user_overrides(cfg, a.scenario);
    for (const auto& text : a.axes) {
        const SweepAxis axis = parse_axis(text);
        const auto same = std::find_if(axes.begin(), axes.end(), [&](const SweepAxis& x) { return x.field == axis.field; });
        if (same != axes.end()) {
            *same = axis;
        } else {
            axes.push_back(axis);
        }
    }
    const auto points = expand_sweep(cfg, axes, crn ? SeedPolicy::Shared : SeedPolicy::PerPoint);
    for (const auto& p : points) {
        validate(p);
    }
    const fs::path dir = output_dir(a.scenario.out_dir);
    const auto summary = run_sweep(points, dir, SweepOptions{thread_count(a.threads), !a.no_resume, a.ledger});
    print_sweep_summary(summary, dir);
    return summary.failed == 0 ? kOk : kRuntime;
}

// ---- report ----

struct ReportArgs
{
    std::vector<std::string> inputs;
    bool strict = false;
    bool allow_partial = false;
    std::string csv_path;
};

int cmd_report(const ReportArgs& a)
{
    std::vector<fs::path> dirs;
    for (const auto& in : a.inputs) {
        if (!fs::is_directory(in)) {
            throw ValidationError("report: '" + in + "' is not a directory");
        }
        dirs.emplace_back(in);
    }
    const auto outputs = report::load_outputs(dirs);
    const auto rows = report::run_checks(outputs);
    report::write_table(std::cout, rows);
    if (!a.csv_path.empty()) {
        std::ofstream f(a.csv_path);
        report::write_csv(f, rows);
    }
    const bool failed = std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.status == report::Status::Fail; });
    const bool skipped =
        std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.status == report::Status::Skipped; });
    if (a.strict && (failed || (skipped && !a.allow_partial))) {
        return kAcceptance;
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"nrv2x: NR sidelink connected-braking simulator"};
    app.require_subcommand(1);

    AnalyticArgs analytic_args;
    auto* analytic = app.add_subcommand("analytic", "closed-form D_comm, attempts, energy and required Eb/N0");
    analytic->add_option("--prr", analytic_args.prr, "packet reception ratio (repeatable)")->check(CLI::Range(0.0, 1.0));
    analytic->add_option("--v-kmh", analytic_args.v_kmh, "vehicle speed [km/h]");
    analytic->add_option("--pps", analytic_args.pps, "packets per second");
    analytic->add_option("--n", analytic_args.n, "delivered packets N for D_comm");
    analytic->add_option("--n-pkt", analytic_args.n_pkt, "packets for the energy total");
    analytic->add_option("--pt-dbm", analytic_args.pt_dbm, "transmit power [dBm]");
    analytic->add_option("--l-bits", analytic_args.l_bits, "packet length [bit] (default: from config)");
    analytic->add_option("--rate-bps", analytic_args.rate_bps, "data rate [bit/s] (default: from config)");
    analytic->add_option("--h-attempts", analytic_args.h_attempts, "max attempts H")->check(CLI::PositiveNumber);
    analytic->add_flag("--grid", analytic_args.grid, "CSV over PRR x Pt");
    analytic->add_option("-c,--config", analytic_args.scenario.config_path, "YAML scenario file");
    analytic->add_option("--set", analytic_args.scenario.overrides, "override a config key (key=value)");

    SweepArgs simulate_args;
    auto* simulate = app.add_subcommand("simulate", "run one scenario point");
    add_scenario_options(simulate, simulate_args.scenario);
    simulate->add_flag("--ledger", simulate_args.ledger, "also write the per-attempt ledger");
    simulate->add_flag("--no-resume", simulate_args.no_resume, "rerun even if outputs exist");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "run a grid of scenario points");
    add_scenario_options(sweep, sweep_args.scenario);
    sweep->add_option("--axis", sweep_args.axes, "sweep axis field=v1,v2,... (repeatable)");
    sweep->add_option("--preset", sweep_args.preset, "paper-grid | fig3-dcomm | fig4-scs");
    sweep->add_flag("--crn", sweep_args.crn, "common random numbers: every point uses the same seed");
    sweep->add_flag("--no-resume", sweep_args.no_resume, "rerun points already in the manifest");
    sweep->add_flag("--ledger", sweep_args.ledger, "also write per-point attempt ledgers");
    sweep->add_option("-j,--threads", sweep_args.threads, "worker threads (default: hardware)");

    ReportArgs report_args;
    auto* rep = app.add_subcommand("report", "trend checks over sweep outputs");
    rep->add_option("inputs", report_args.inputs, "sweep output directories")->required();
    rep->add_flag("--strict", report_args.strict, "exit 3 on any failed check");
    rep->add_flag("--allow-partial", report_args.allow_partial, "with --strict, tolerate SKIPPED rows");
    rep->add_option("--csv", report_args.csv_path, "also write the table as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (analytic->parsed()) {
            return cmd_analytic(analytic_args);
        }
        if (simulate->parsed()) {
            return cmd_simulate(simulate_args);
        }
        if (sweep->parsed()) {
            return cmd_sweep(sweep_args);
        }
        return cmd_report(report_args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kValidation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return kRuntime;
    }
}
