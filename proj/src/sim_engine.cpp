#include "nrv2x/sim_engine.hpp"

#include "nrv2x/analytic.hpp"
#include "nrv2x/channel.hpp"
#include "nrv2x/mac_sps.hpp"
#include "nrv2x/mobility.hpp"
#include "nrv2x/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace nrv2x {

namespace {

/// Node positions, velocities and per-link shadowing of one replication.
/// Vehicles are nodes [0, N); the RSU is node N.
class World final : public LinkModel
{
  public:
    World(const ScenarioConfig& cfg, Rng& mobility_rng, Rng& shadowing_rng)
        : cfg_(cfg),
          vehicles_(spawn_traffic(cfg, mobility_rng)),
          rsu_(make_rsu(cfg)),
          shadowing_rng_(shadowing_rng),
          shadow_params_{cfg.shadowing_sigma_db, cfg.decorr_distance_m},
          scs_hz_(cfg.scs_khz * 1e3)
    {
        const auto n = static_cast<std::size_t>(node_count());
        positions_.resize(n);
        velocity_.assign(n, 0.0);
        links_.resize(n * n);
        refresh();
    }

    int node_count() const { return static_cast<int>(vehicles_.size()) + 1; }
    int rsu_id() const { return static_cast<int>(vehicles_.size()); }
    double speed(int id) const { return std::fabs(velocity_[static_cast<std::size_t>(id)]); }

    void step(double dt_s)
    {
        advance(vehicles_, dt_s, cfg_.road_length_m);
        refresh();
    }

    double distance_between(int a, int b) const
    {
        return distance(positions_[static_cast<std::size_t>(a)], positions_[static_cast<std::size_t>(b)]);
    }

    double rx_power_dbm(int tx, int rx) override
    {
        const double d = distance_between(tx, rx);
        auto& state = links_[static_cast<std::size_t>(tx) * positions_.size() + static_cast<std::size_t>(rx)];
        const double s = evolve_shadowing(state, d, shadow_params_, shadowing_rng_);
        return cfg_.pt_dbm + link_gain(d, cfg_.fc_ghz, cfg_.antenna_gain_tx_dbi, cfg_.antenna_gain_rx_dbi, s).gain_total_db;
    }

    double ici_ratio(int tx, int rx) override
    {
        if (!cfg_.ici_enabled) {
            return 0.0;
        }
        const double rel = velocity_[static_cast<std::size_t>(tx)] - velocity_[static_cast<std::size_t>(rx)];
        return nrv2x::ici_ratio(rel, cfg_.fc_ghz, scs_hz_);
    }

  private:
    void refresh()
    {
        for (const auto& v : vehicles_) {
            positions_[static_cast<std::size_t>(v.id)] = position_of(v, cfg_);
            velocity_[static_cast<std::size_t>(v.id)] = v.direction * v.speed_mps;
        }
        positions_.back() = position_of(rsu_);
    }

    const ScenarioConfig& cfg_;
    std::vector<Vehicle> vehicles_;
    Rsu rsu_;
    Rng& shadowing_rng_;
    ShadowingParams shadow_params_;
    double scs_hz_;
    std::vector<Position> positions_;
    std::vector<double> velocity_;
    std::vector<ShadowingState> links_;
};

struct RsuLink
{
    int rx = 0;
    bool delivered = false;
    long long success_slot = -1;
};

struct RsuPacket
{
    long long id = 0;
    long long generation_slot = 0;
    int attempts_done = 0;
    bool counted = false;
    std::vector<RsuLink> links;
    std::vector<LedgerRow> attempts; ///< one row per logical link attempt
};

} // namespace

ReplicationOutput run_replication(const ScenarioConfig& cfg, int replication, const McsTable& mcs,
                                  const EngineOptions& options)
{
    validate(cfg);
    auto streams = RngStreams::make(cfg.master_seed, static_cast<std::uint64_t>(replication));
    World world(cfg, streams.mobility, streams.shadowing);
    const SpsParams sps = SpsParams::from_config(cfg);
    const ResolveParams resolve{make_link_profile(cfg, mcs), cfg.interference_overlap, cfg.fixed_per};

    const int period = sps.slots_per_period;
    const int nodes = world.node_count();
    const int rsu = world.rsu_id();
    const int max_attempts = cfg.harq_max_attempts;
    const bool blind = cfg.harq_mode == HarqMode::BlindFixed;
    const double slot_s = cfg.slot_duration_s();
    const auto total_slots = static_cast<long long>(std::llround(cfg.sim_duration_s / slot_s));
    const auto warmup_slots = static_cast<long long>(std::llround(cfg.warmup_s / slot_s));
    const double horizon_slots = static_cast<double>(max_attempts) * period;

    std::vector<int> phase(static_cast<std::size_t>(nodes));
    for (auto& p : phase) {
        p = uniform_int(streams.sps, 0, period - 1);
    }
    std::vector<SpsAgent> agents(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i) {
        agents[static_cast<std::size_t>(i)].owner = i;
    }
    std::vector<long long> next_tx(static_cast<std::size_t>(nodes), -1);

    ResourceGrid grid(period, cfg.num_subchannels);
    ReplicationOutput out{MetricsAccumulator(cfg.prr_bin_width_m, cfg.max_eval_distance_m), {}};
    std::vector<RsuPacket> inflight;
    long long next_packet_id = 0;

    std::vector<SlotTransmission> slot_txs;
    std::vector<int> receivers;
    std::vector<ReceptionRequest> requests;

    auto commit = [&](RsuPacket& pkt) {
        if (!pkt.counted) {
            return;
        }
        for (const auto& row : pkt.attempts) {
            out.metrics.record_reception(row.distance_m, row.success, row.per);
        }
        out.metrics.record_attempts(rsu, pkt.attempts.size());
        for (const auto& link : pkt.links) {
            const double speed = world.speed(link.rx);
            if (link.delivered) {
                out.metrics.record_delivery(static_cast<double>(link.success_slot - pkt.generation_slot), speed);
            } else {
                out.metrics.record_undelivered(horizon_slots, speed);
            }
        }
        if (options.record_ledger) {
            out.ledger.insert(out.ledger.end(), pkt.attempts.begin(), pkt.attempts.end());
        }
    };

    for (long long n = 0; n < total_slots; ++n) {
        if (n > 0) {
            world.step(slot_s);
        }

        // packet generation and SPS reselection
        for (int i = 0; i < nodes; ++i) {
            if (n % period != phase[static_cast<std::size_t>(i)]) {
                continue;
            }
            auto& agent = agents[static_cast<std::size_t>(i)];
            agent = select_resources(
                agent, sps,
                [&] { return sense(grid, i, [&](int tx) { return dbm_to_mw(world.rx_power_dbm(tx, i)); }); },
                streams.sps);
            next_tx[static_cast<std::size_t>(i)] = next_transmission_slot(n, *agent.selection, period);
            if (i == rsu) {
                RsuPacket pkt;
                pkt.id = next_packet_id++;
                pkt.generation_slot = n;
                pkt.counted = n >= warmup_slots;
                for (int v = 0; v < rsu; ++v) {
                    if (world.distance_between(rsu, v) < cfg.max_eval_distance_m) {
                        pkt.links.push_back({v});
                    }
                }
                inflight.push_back(std::move(pkt));
            }
        }

        // registration
        grid.begin_slot(n);
        slot_txs.clear();
        std::size_t rsu_index = std::numeric_limits<std::size_t>::max();
        for (int i = 0; i < nodes; ++i) {
            if (next_tx[static_cast<std::size_t>(i)] != n) {
                continue;
            }
            auto& agent = agents[static_cast<std::size_t>(i)];
            grid.occupy(n, i, agent.selection->subchannel_start, cfg.subchannels_per_packet);
            on_transmission(agent);
            if (i == rsu) {
                rsu_index = slot_txs.size();
            }
            slot_txs.push_back({i, agent.selection->subchannel_start, cfg.subchannels_per_packet});
        }
        if (rsu_index == std::numeric_limits<std::size_t>::max() || inflight.empty()) {
            continue;
        }

        // one decode per receiver; every in-flight packet rides on this transmission
        receivers.clear();
        for (const auto& pkt : inflight) {
            for (const auto& link : pkt.links) {
                if (blind || !link.delivered) {
                    receivers.push_back(link.rx);
                }
            }
        }
        std::sort(receivers.begin(), receivers.end());
        receivers.erase(std::unique(receivers.begin(), receivers.end()), receivers.end());
        requests.clear();
        for (int rx : receivers) {
            requests.push_back({rsu_index, rx});
        }
        const auto receptions = resolve_slot(slot_txs, requests, world, resolve, streams.decode);

        const auto& wanted = slot_txs[rsu_index];
        for (auto& pkt : inflight) {
            const int k = pkt.attempts_done + 1;
            for (auto& link : pkt.links) {
                if (!blind && link.delivered) {
                    continue;
                }
                const auto pos = std::lower_bound(receivers.begin(), receivers.end(), link.rx) - receivers.begin();
                const auto& rec = receptions[static_cast<std::size_t>(pos)];
                pkt.attempts.push_back({replication, pkt.id, rsu, k, n, wanted.subchannel_start,
                                        wanted.subchannel_count, link.rx, world.distance_between(rsu, link.rx),
                                        rec.success, rec.per});
                if (rec.success && !link.delivered) {
                    link.delivered = true;
                    link.success_slot = n;
                }
            }
            pkt.attempts_done = k;
        }

        std::erase_if(inflight, [&](RsuPacket& pkt) {
            const bool done = pkt.attempts_done >= max_attempts ||
                              (!blind && std::all_of(pkt.links.begin(), pkt.links.end(),
                                                     [](const RsuLink& l) { return l.delivered; }));
            if (done) {
                commit(pkt);
            }
            return done;
        });
    }
    return out;
}

ReplicationOutput run_point(const ScenarioConfig& cfg, const McsTable& mcs, const EngineOptions& options)
{
    ReplicationOutput merged = run_replication(cfg, 0, mcs, options);
    for (int rep = 1; rep < cfg.replications; ++rep) {
        auto next = run_replication(cfg, rep, mcs, options);
        merged.metrics.merge(next.metrics);
        merged.ledger.insert(merged.ledger.end(), next.ledger.begin(), next.ledger.end());
    }
    return merged;
}

PointSummary summarize(const ScenarioConfig& cfg, const McsTable& mcs, const MetricsAccumulator& metrics)
{
    PointSummary s;
    s.meta = point_meta(cfg);
    if (!metrics.delays().empty()) {
        s.dcomm = measured_d_comm(metrics.delays(), cfg.slot_duration_s());
        s.has_dcomm = true;
    }
    const LinkProfile profile = make_link_profile(cfg, mcs);
    s.energy = energy_report(metrics, analytic::dbm_to_watts(cfg.pt_dbm), profile.packet_bits / profile.rate_bps);
    return s;
}

void write_point_outputs(const std::filesystem::path& dir, const ScenarioConfig& cfg, const McsTable& mcs,
                         const MetricsAccumulator& metrics)
{
    std::filesystem::create_directories(dir);
    const PointSummary s = summarize(cfg, mcs, metrics);
    {
        std::ofstream f(dir / "prr_by_distance.csv");
        f << kPrrHeader << '\n';
        write_prr_rows(f, s.meta, metrics);
    }
    {
        std::ofstream f(dir / "dcomm.csv");
        f << kDcommHeader << '\n';
        if (s.has_dcomm) {
            write_dcomm_row(f, s.meta, s.dcomm);
        }
    }
    {
        std::ofstream f(dir / "energy.csv");
        f << kEnergyHeader << '\n';
        write_energy_row(f, s.meta, s.energy);
    }
    std::ofstream(dir / "config.yaml") << to_yaml(cfg);
}

namespace {

std::string sanitize(std::string text)
{
    std::replace(text.begin(), text.end(), ',', ';');
    std::replace(text.begin(), text.end(), '\n', ' ');
    return text;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows)
{
    std::ofstream f(path);
    f << kManifestHeader << '\n';
    for (const auto& r : rows) {
        f << r.index << ',' << r.fingerprint << ',' << format_number(r.pt_dbm) << ',' << r.scs_khz << ',' << r.mcs
          << ',' << format_number(r.rho) << ',' << format_number(r.v_kmh) << ',' << r.seed << ',' << r.replications
          << ',' << r.harq_mode << ',' << sanitize(r.status) << ',' << r.output_dir << '\n';
    }
}

void append_body(std::ostream& out, const std::filesystem::path& file)
{
    std::ifstream in(file);
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (!line.empty()) {
            out << line << '\n';
        }
    }
}

bool outputs_present(const std::filesystem::path& dir)
{
    for (const char* name : {"prr_by_distance.csv", "dcomm.csv", "energy.csv"}) {
        if (!std::filesystem::exists(dir / name)) {
            return false;
        }
    }
    return true;
}

} // namespace

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != kManifestHeader) {
        throw std::runtime_error(path.string() + ": unexpected manifest header");
    }
    std::vector<ManifestRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 12) {
            throw std::runtime_error(path.string() + ": malformed manifest row");
        }
        ManifestRow r;
        r.index = std::stoull(f[0]);
        r.fingerprint = f[1];
        r.pt_dbm = std::stod(f[2]);
        r.scs_khz = std::stoi(f[3]);
        r.mcs = std::stoi(f[4]);
        r.rho = std::stod(f[5]);
        r.v_kmh = std::stod(f[6]);
        r.seed = std::stoull(f[7]);
        r.replications = std::stoi(f[8]);
        r.harq_mode = f[9];
        r.status = f[10];
        r.output_dir = f[11];
        rows.push_back(r);
    }
    return rows;
}

SweepSummary run_sweep(const std::vector<ScenarioConfig>& points, const std::filesystem::path& out_dir,
                       const SweepOptions& options)
{
    if (points.empty()) {
        throw std::invalid_argument("run_sweep: no sweep points");
    }
    std::filesystem::create_directories(out_dir);
    const auto manifest_path = out_dir / "manifest.csv";

    std::set<std::string> completed;
    if (options.resume && std::filesystem::exists(manifest_path)) {
        for (const auto& row : read_manifest(manifest_path)) {
            if (row.status == "ok" && outputs_present(out_dir / row.output_dir)) {
                completed.insert(row.fingerprint);
            }
        }
    }

    SweepSummary summary;
    summary.manifest.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& cfg = points[i];
        auto& row = summary.manifest[i];
        row.index = i;
        row.fingerprint = fingerprint(cfg);
        row.pt_dbm = cfg.pt_dbm;
        row.scs_khz = cfg.scs_khz;
        row.mcs = cfg.mcs_index;
        row.rho = cfg.density_rho;
        row.v_kmh = cfg.mean_speed_kmh;
        row.seed = cfg.master_seed;
        row.replications = cfg.replications;
        row.harq_mode = std::string(to_string(cfg.harq_mode));
        row.output_dir = "points/" + row.fingerprint;
    }

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (completed.count(summary.manifest[i].fingerprint) != 0) {
            summary.manifest[i].status = "ok";
            ++summary.resumed;
        } else {
            todo.push_back(i);
        }
    }

    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t t = cursor.fetch_add(1);
            if (t >= todo.size()) {
                return;
            }
            const std::size_t i = todo[t];
            auto& row = summary.manifest[i];
            try {
                const auto mcs = McsTable::for_config(points[i]);
                const auto result = run_point(points[i], mcs, EngineOptions{options.record_ledger});
                const auto dir = out_dir / row.output_dir;
                write_point_outputs(dir, points[i], mcs, result.metrics);
                if (options.record_ledger) {
                    std::ofstream f(dir / "ledger.csv");
                    write_ledger(f, result.ledger);
                }
                row.status = "ok";
            } catch (const std::exception& e) {
                row.status = std::string("failed: ") + e.what();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(todo.size())));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }

    {
        std::ofstream prr(out_dir / "prr_by_distance.csv");
        std::ofstream dcomm(out_dir / "dcomm.csv");
        std::ofstream energy(out_dir / "energy.csv");
        prr << kPrrHeader << '\n';
        dcomm << kDcommHeader << '\n';
        energy << kEnergyHeader << '\n';
        for (const auto& row : summary.manifest) {
            if (row.status != "ok") {
                ++summary.failed;
                continue;
            }
            const auto dir = out_dir / row.output_dir;
            append_body(prr, dir / "prr_by_distance.csv");
            append_body(dcomm, dir / "dcomm.csv");
            append_body(energy, dir / "energy.csv");
        }
    }
    write_manifest(manifest_path, summary.manifest);
    summary.executed = todo.size();
    return summary;
}

} // namespace nrv2x
