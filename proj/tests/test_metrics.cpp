#include "nrv2x/metrics.hpp"
#include "nrv2x/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nrv2x;

namespace {

std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "nrv2x_metrics_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

MetricsAccumulator sample_acc(int salt)
{
    MetricsAccumulator acc(25.0, 500.0);
    for (int i = 0; i < 40 + salt; ++i) {
        acc.record_reception((i * 37 + salt) % 520, (i + salt) % 3 != 0, 0.1 * (i % 4));
        acc.record_attempts(i % 3, 1 + i % 2);
        if (i % 5 == 0) {
            acc.record_undelivered(600, 20.0);
        } else {
            acc.record_delivery(i % 7 * 10.0, 15.0 + salt);
        }
    }
    return acc;
}

bool same(const MetricsAccumulator& a, const MetricsAccumulator& b)
{
    if (a.bins().size() != b.bins().size() || a.dropped() != b.dropped() || a.delivered() != b.delivered() ||
        a.attempts_by_tx() != b.attempts_by_tx() || a.delays().size() != b.delays().size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.bins().size(); ++i) {
        if (a.bins()[i].receptions != b.bins()[i].receptions || a.bins()[i].successes != b.bins()[i].successes ||
            std::fabs(a.bins()[i].per_sum - b.bins()[i].per_sum) > 1e-12) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("prr per bin")
{
    MetricsAccumulator acc(25.0, 500.0);
    CHECK(acc.bins().size() == 20);
    acc.record_reception(10, true, 0.0);
    acc.record_reception(12, true, 0.0);
    acc.record_reception(24.9, true, 0.0);
    acc.record_reception(0, false, 1.0);
    CHECK(*acc.prr(0) == 0.75);
    CHECK(*acc.mean_per(0) == 0.25);
    CHECK_FALSE(acc.prr(1).has_value());
    CHECK(acc.record_reception(25.0, true, 0.0));
    CHECK(*acc.prr(1) == 1.0);
    CHECK_FALSE(acc.record_reception(500.0, true, 0.0));
    CHECK_FALSE(acc.record_reception(-1.0, true, 0.0));
    CHECK(acc.dropped() == 2);
    CHECK_THROWS(acc.prr(20));
}

TEST_CASE("prr matches an independent recount of a ledger")
{
    Rng rng(17);
    MetricsAccumulator acc(25.0, 500.0);
    std::vector<LedgerRow> ledger;
    for (int i = 0; i < 5000; ++i) {
        LedgerRow r;
        r.packet_id = i / 4;
        r.rx = i % 4;
        r.distance_m = 520.0 * uniform01(rng);
        r.per = uniform01(rng);
        r.success = uniform01(rng) >= r.per;
        ledger.push_back(r);
        acc.record_reception(r.distance_m, r.success, r.per);
    }
    for (int b = 0; b < 20; ++b) {
        long n = 0;
        long ok = 0;
        for (const auto& r : ledger) {
            if (r.distance_m >= 25.0 * b && r.distance_m < 25.0 * (b + 1)) {
                ++n;
                ok += r.success ? 1 : 0;
            }
        }
        REQUIRE(n > 0);
        CHECK(*acc.prr(b) == doctest::Approx(double(ok) / double(n)).epsilon(1e-15));
        CHECK(acc.bins()[b].receptions == static_cast<std::uint64_t>(n));
    }
}

TEST_CASE("quantile type 7")
{
    CHECK(quantile({5.0}, 0.99) == 5.0);
    CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(quantile({4, 1, 3, 2}, 0.0) == 1.0);
    CHECK(quantile({4, 1, 3, 2}, 1.0) == 4.0);
    std::vector<double> v;
    for (int i = 0; i <= 100; ++i) {
        v.push_back(i);
    }
    CHECK(quantile(v, 0.99) == doctest::Approx(99.0));
    CHECK(quantile({0, 10}, 0.99) == doctest::Approx(9.9));
    CHECK_THROWS(quantile({}, 0.5));
}

TEST_CASE("measured critical distance")
{
    // a single 10-slot wait at 0.5 ms slots and 13.89 m/s
    const std::vector<double> one{10.0};
    const auto d = measured_d_comm(one, 13.89, 0.5e-3);
    CHECK(d.quantile_m == doctest::Approx(0.06945));
    CHECK(d.mean_m == doctest::Approx(0.06945));
    CHECK(d.samples == 1);

    const std::vector<double> many{0, 10, 20, 200, 400};
    const auto a = measured_d_comm(many, 10.0, 1e-3);
    const auto b = measured_d_comm(many, 20.0, 1e-3);
    CHECK(b.quantile_m == doctest::Approx(2 * a.quantile_m));
    CHECK(b.mean_m == doctest::Approx(2 * a.mean_m));

    std::vector<DelaySample> s{{100, 10.0, false}, {100, 30.0, true}};
    const auto m = measured_d_comm(s, 1e-3);
    CHECK(m.mean_m == doctest::Approx(2.0));
    CHECK(m.censored_fraction == 0.5);
    CHECK(m.quantile_m == doctest::Approx(1.0 + 0.99 * 2.0));

    CHECK_THROWS(measured_d_comm(std::vector<double>{}, 1.0, 1e-3));
}

TEST_CASE("energy from attempt counts")
{
    MetricsAccumulator acc(25.0, 500.0);
    acc.record_attempts(0, 7);
    acc.record_attempts(0, 3);
    acc.record_attempts(4, 5);
    acc.record_delivery(1, 1);
    acc.record_delivery(1, 1);
    CHECK(acc.total_attempts() == 15);
    const auto lo = energy_report(acc, 0.19952623149688797, 2.8e-5);
    const auto hi = energy_report(acc, 0.3981071705534972, 2.8e-5);
    CHECK(lo.total_joules == doctest::Approx(15 * 0.19952623149688797 * 2.8e-5));
    CHECK(lo.joules_per_delivered == doctest::Approx(lo.total_joules / 2));
    CHECK(hi.total_joules / lo.total_joules == doctest::Approx(1.9953).epsilon(1e-4));
    CHECK(std::isnan(energy_report(MetricsAccumulator(25, 500), 1.0, 1.0).joules_per_delivered));
}

TEST_CASE("merge is additive and associative")
{
    const auto a = sample_acc(1);
    const auto b = sample_acc(2);
    const auto c = sample_acc(3);

    MetricsAccumulator ab = a;
    ab.merge(b);
    for (std::size_t i = 0; i < ab.bins().size(); ++i) {
        CHECK(ab.bins()[i].receptions == a.bins()[i].receptions + b.bins()[i].receptions);
        CHECK(ab.bins()[i].successes == a.bins()[i].successes + b.bins()[i].successes);
    }
    CHECK(ab.total_attempts() == a.total_attempts() + b.total_attempts());
    CHECK(ab.delivered() == a.delivered() + b.delivered());
    CHECK(ab.replications() == 2);

    MetricsAccumulator left = ab;
    left.merge(c);
    MetricsAccumulator bc = b;
    bc.merge(c);
    MetricsAccumulator right = a;
    right.merge(bc);
    CHECK(same(left, right));

    MetricsAccumulator other_bins(10.0, 500.0);
    CHECK_THROWS(left.merge(other_bins));
}

TEST_CASE("csv outputs round trip")
{
    const auto acc = sample_acc(4);
    const PointMeta meta{"0123456789abcdef", 24, 30, 8, 50, 80};

    const auto prr_path = scratch("prr.csv");
    {
        std::ofstream out(prr_path);
        out << kPrrHeader << '\n';
        write_prr_rows(out, meta, acc);
    }
    const auto rows = read_prr_csv(prr_path);
    std::size_t populated = 0;
    for (std::size_t i = 0; i < acc.bins().size(); ++i) {
        populated += acc.bins()[i].receptions > 0 ? 1 : 0;
    }
    REQUIRE(rows.size() == populated);
    for (const auto& r : rows) {
        const auto bin = static_cast<std::size_t>(r.bin_low_m / 25.0);
        CHECK(r.bin_high_m == r.bin_low_m + 25.0);
        CHECK(r.receptions == acc.bins()[bin].receptions);
        CHECK(r.prr == doctest::Approx(*acc.prr(bin)).epsilon(1e-9));
        CHECK(r.meta.fingerprint == meta.fingerprint);
        CHECK(r.meta.mcs == 8);
        CHECK(r.meta.v_kmh == 80);
    }

    const auto d = measured_d_comm(acc.delays(), 0.5e-3);
    const auto dc_path = scratch("dcomm.csv");
    {
        std::ofstream out(dc_path);
        out << kDcommHeader << '\n';
        write_dcomm_row(out, meta, d);
    }
    const auto dc = read_dcomm_csv(dc_path);
    REQUIRE(dc.size() == 1);
    CHECK(dc[0].dcomm_p99_m == doctest::Approx(d.quantile_m).epsilon(1e-9));
    CHECK(dc[0].censored_fraction == doctest::Approx(d.censored_fraction).epsilon(1e-9));

    const auto e = energy_report(acc, 0.2, 1e-4);
    const auto en_path = scratch("energy.csv");
    {
        std::ofstream out(en_path);
        out << kEnergyHeader << '\n';
        write_energy_row(out, meta, e);
    }
    const auto en = read_energy_csv(en_path);
    REQUIRE(en.size() == 1);
    CHECK(en[0].total_attempts == e.total_attempts);
    CHECK(en[0].total_joules == doctest::Approx(e.total_joules).epsilon(1e-9));

    std::ofstream(scratch("bad.csv")) << "not,the,header\n";
    CHECK_THROWS(read_prr_csv(scratch("bad.csv")));
}

TEST_CASE("ledger round trip")
{
    std::vector<LedgerRow> rows{{0, 1, 400, 1, 1234, 2, 2, 7, 123.456789012345, true, 0.0125},
                                {3, 9, 400, 3, 1434, 0, 2, 8, 499.9, false, 1.0}};
    const auto path = scratch("ledger.csv");
    {
        std::ofstream out(path);
        write_ledger(out, rows);
    }
    const auto back = read_ledger(path);
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].replication == rows[i].replication);
        CHECK(back[i].packet_id == rows[i].packet_id);
        CHECK(back[i].attempt == rows[i].attempt);
        CHECK(back[i].slot == rows[i].slot);
        CHECK(back[i].rx == rows[i].rx);
        CHECK(back[i].distance_m == rows[i].distance_m);
        CHECK(back[i].success == rows[i].success);
        CHECK(back[i].per == doctest::Approx(rows[i].per));
    }
}

TEST_CASE("csv split")
{
    CHECK(split_csv_line("a,b,,c").size() == 4);
    CHECK(split_csv_line("").size() == 1);
    CHECK(split_csv_line("x")[0] == "x");
}
