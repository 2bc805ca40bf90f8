#include "nrv2x/analytic.hpp"
#include "nrv2x/sim_engine.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace nrv2x;

namespace {

ScenarioConfig short_run()
{
    ScenarioConfig cfg;
    cfg.density_rho = 30;
    cfg.sim_duration_s = 3.0;
    cfg.warmup_s = 1.0;
    cfg.replications = 1;
    cfg.master_seed = 12345;
    return cfg;
}

bool same_metrics(const MetricsAccumulator& a, const MetricsAccumulator& b)
{
    if (a.total_attempts() != b.total_attempts() || a.delivered() != b.delivered() ||
        a.delays().size() != b.delays().size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.bins().size(); ++i) {
        if (a.bins()[i].receptions != b.bins()[i].receptions || a.bins()[i].successes != b.bins()[i].successes) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.delays().size(); ++i) {
        if (a.delays()[i].delay_slots != b.delays()[i].delay_slots ||
            a.delays()[i].speed_mps != b.delays()[i].speed_mps) {
            return false;
        }
    }
    return true;
}

std::filesystem::path fresh_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("nrv2x_engine_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("replications are deterministic and distinct")
{
    const auto cfg = short_run();
    const auto mcs = McsTable::builtin();
    const auto a = run_replication(cfg, 0, mcs);
    const auto b = run_replication(cfg, 0, mcs);
    const auto c = run_replication(cfg, 1, mcs);
    CHECK(same_metrics(a.metrics, b.metrics));
    CHECK_FALSE(same_metrics(a.metrics, c.metrics));
    CHECK(a.metrics.total_attempts() > 0);
}

TEST_CASE("zero duration yields nothing")
{
    auto cfg = short_run();
    cfg.sim_duration_s = 0.0;
    cfg.warmup_s = 0.0;
    const auto out = run_replication(cfg, 0, McsTable::builtin());
    CHECK(out.metrics.total_attempts() == 0);
    CHECK(out.metrics.delays().empty());
}

TEST_CASE("a lone nearby vehicle hears the RSU")
{
    ScenarioConfig cfg;
    cfg.road_length_m = 100.0;
    cfg.density_rho = 10.0; // one vehicle
    cfg.sim_duration_s = 20.0;
    cfg.warmup_s = 1.0;
    cfg.replications = 1;
    const auto out = run_replication(cfg, 0, McsTable::builtin(), {true});
    REQUIRE_FALSE(out.ledger.empty());
    std::size_t ok = 0;
    for (const auto& r : out.ledger) {
        CHECK(r.distance_m < 60.0);
        if (r.per < 1.0) {
            // not a half-duplex loss: the link budget is tens of dB above the cliff
            CHECK(r.success);
        }
        ok += r.success ? 1 : 0;
    }
    CHECK(ok > 0.95 * static_cast<double>(out.ledger.size()));
}

TEST_CASE("ledger reproduces metrics")
{
    auto cfg = short_run();
    cfg.density_rho = 50;
    const auto mcs = McsTable::builtin();
    const auto out = run_replication(cfg, 0, mcs, {true});
    const auto& m = out.metrics;
    CHECK(out.ledger.size() == m.total_attempts());

    std::vector<std::uint64_t> n(m.bins().size(), 0);
    std::vector<std::uint64_t> ok(m.bins().size(), 0);
    for (const auto& r : out.ledger) {
        const auto b = static_cast<std::size_t>(r.distance_m / cfg.prr_bin_width_m);
        ++n[b];
        ok[b] += r.success ? 1 : 0;
    }
    for (std::size_t b = 0; b < n.size(); ++b) {
        CHECK(n[b] == m.bins()[b].receptions);
        CHECK(ok[b] == m.bins()[b].successes);
    }

    // energy recomputed from the ledger row count
    const auto profile = make_link_profile(cfg, mcs);
    const auto e = summarize(cfg, mcs, m).energy;
    const double oracle = static_cast<double>(out.ledger.size()) * analytic::dbm_to_watts(cfg.pt_dbm) *
                          profile.packet_bits / profile.rate_bps;
    CHECK(e.total_joules == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("blind HARQ: H attempts per link in consecutive periods")
{
    auto cfg = short_run();
    const auto out = run_replication(cfg, 0, McsTable::builtin(), {true});
    std::map<std::pair<long long, int>, std::vector<LedgerRow>> links;
    for (const auto& r : out.ledger) {
        links[{r.packet_id, r.rx}].push_back(r);
    }
    REQUIRE_FALSE(links.empty());
    const int period = cfg.slots_per_period();
    int same_resource = 0;
    int gaps = 0;
    for (const auto& [key, rows] : links) {
        REQUIRE(rows.size() == 3);
        for (int k = 0; k < 3; ++k) {
            CHECK(rows[k].attempt == k + 1);
            if (k > 0) {
                // one period apart unless the RSU reselected its resource in between
                const auto gap = rows[k].slot - rows[k - 1].slot;
                CHECK(gap > 0);
                CHECK(gap < 2 * period);
                same_resource += gap == period ? 1 : 0;
                ++gaps;
            }
        }
    }
    CHECK(links.size() == out.metrics.delays().size());
    CHECK(same_resource > gaps / 2);
}

TEST_CASE("truncated HARQ stops at the first success")
{
    auto cfg = short_run();
    cfg.harq_mode = HarqMode::TruncatedStop;
    cfg.density_rho = 80;
    const auto out = run_replication(cfg, 0, McsTable::builtin(), {true});
    std::map<std::pair<long long, int>, std::vector<LedgerRow>> links;
    for (const auto& r : out.ledger) {
        links[{r.packet_id, r.rx}].push_back(r);
    }
    REQUIRE_FALSE(links.empty());
    std::size_t delivered = 0;
    for (const auto& [key, rows] : links) {
        CHECK(rows.size() <= 3);
        for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
            CHECK_FALSE(rows[k].success);
        }
        if (rows.back().success) {
            ++delivered;
        } else {
            CHECK(rows.size() == 3);
        }
    }
    CHECK(delivered == out.metrics.delivered());
    CHECK(out.metrics.total_attempts() < 3 * links.size());
}

TEST_CASE("replication merge is order independent")
{
    auto cfg = short_run();
    cfg.replications = 3;
    const auto mcs = McsTable::builtin();
    const auto merged = run_point(cfg, mcs).metrics;
    auto r0 = run_replication(cfg, 0, mcs).metrics;
    const auto r1 = run_replication(cfg, 1, mcs).metrics;
    const auto r2 = run_replication(cfg, 2, mcs).metrics;

    MetricsAccumulator rev = r2;
    rev.merge(r1);
    rev.merge(r0);
    CHECK(rev.total_attempts() == merged.total_attempts());
    CHECK(rev.delivered() == merged.delivered());
    for (std::size_t b = 0; b < merged.bins().size(); ++b) {
        CHECK(rev.bins()[b].receptions == merged.bins()[b].receptions);
        CHECK(rev.bins()[b].successes == merged.bins()[b].successes);
        CHECK(rev.bins()[b].receptions == r0.bins()[b].receptions + r1.bins()[b].receptions + r2.bins()[b].receptions);
    }
    CHECK(merged.replications() == 3);
    const auto s1 = summarize(cfg, mcs, merged);
    const auto s2 = summarize(cfg, mcs, rev);
    CHECK(s1.dcomm.quantile_m == s2.dcomm.quantile_m);
    CHECK(s1.energy.total_joules == s2.energy.total_joules);
}

TEST_CASE("energy scales with transmit power under common random numbers")
{
    auto cfg = short_run();
    const auto mcs = McsTable::builtin();
    auto hi = cfg;
    hi.pt_dbm = cfg.pt_dbm + 3.0;
    const auto a = summarize(cfg, mcs, run_point(cfg, mcs).metrics).energy;
    const auto b = summarize(hi, mcs, run_point(hi, mcs).metrics).energy;
    // blind HARQ: identical attempt counts, so the ratio is the power ratio
    CHECK(a.total_attempts == b.total_attempts);
    CHECK(b.total_joules / a.total_joules == doctest::Approx(std::pow(10.0, 0.3)).epsilon(1e-12));
}

TEST_CASE("sweep writes per-point outputs, resumes and records failures")
{
    auto base = short_run();
    base.sim_duration_s = 2.0;
    const auto points = expand_sweep(base, {{"pt_dbm", {23, 26}}, {"density_rho", {10, 30}}});
    const auto dir = fresh_dir("sweep");

    const auto first = run_sweep(points, dir, {2, true, false});
    CHECK(first.executed == 4);
    CHECK(first.failed == 0);
    const auto manifest = read_manifest(dir / "manifest.csv");
    REQUIRE(manifest.size() == 4);
    for (const auto& row : manifest) {
        CHECK(row.status == "ok");
        CHECK(std::filesystem::exists(dir / row.output_dir / "prr_by_distance.csv"));
        CHECK(std::filesystem::exists(dir / row.output_dir / "config.yaml"));
    }
    CHECK(manifest[1].rho == 30);
    CHECK(manifest[2].pt_dbm == 26);
    const auto merged = read_prr_csv(dir / "prr_by_distance.csv");
    std::size_t per_point = 0;
    for (const auto& row : manifest) {
        per_point += read_prr_csv(dir / row.output_dir / "prr_by_distance.csv").size();
    }
    CHECK(merged.size() == per_point);
    const auto before = slurp(dir / "prr_by_distance.csv");

    const auto second = run_sweep(points, dir, {1, true, false});
    CHECK(second.resumed == 4);
    CHECK(second.executed == 0);
    CHECK(slurp(dir / "prr_by_distance.csv") == before);

    // serial and parallel runs agree byte for byte
    const auto serial_dir = fresh_dir("sweep_serial");
    run_sweep(points, serial_dir, {1, false, false});
    CHECK(slurp(serial_dir / "prr_by_distance.csv") == before);
    CHECK(slurp(serial_dir / "energy.csv") == slurp(dir / "energy.csv"));
    CHECK(slurp(serial_dir / "dcomm.csv") == slurp(dir / "dcomm.csv"));

    auto broken = points;
    broken[3].mcs_table_path = "/nonexistent/mcs.txt";
    const auto bad_dir = fresh_dir("sweep_bad");
    const auto third = run_sweep(broken, bad_dir, {2, true, false});
    CHECK(third.failed == 1);
    const auto bad_manifest = read_manifest(bad_dir / "manifest.csv");
    CHECK(bad_manifest[3].status.rfind("failed", 0) == 0);
    CHECK(bad_manifest[0].status == "ok");
    CHECK(bad_manifest[2].status == "ok");
}

TEST_CASE("sweep ledger output")
{
    auto cfg = short_run();
    cfg.sim_duration_s = 2.0;
    const auto dir = fresh_dir("ledger");
    const auto s = run_sweep({cfg}, dir, {1, true, true});
    const auto ledger = read_ledger(dir / s.manifest[0].output_dir / "ledger.csv");
    const auto energy = read_energy_csv(dir / "energy.csv");
    REQUIRE(energy.size() == 1);
    CHECK(ledger.size() == energy[0].total_attempts);
}
