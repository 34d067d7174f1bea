#include <catch2/catch_amalgamated.hpp>

#include "mmwsim/run.hpp"

using namespace mmwsim;

namespace {

Environment make_env(const Box& room, const std::vector<Point3>& ap_pos,
                     const std::vector<Point3>& ues, int sectors,
                     int num_lps) {
  Environment env;
  env.room = room;
  for (std::size_t i = 0; i < ap_pos.size(); ++i) {
    ApNode ap;
    ap.id = static_cast<int>(i);
    ap.position = ap_pos[i];
    ap.num_sectors = sectors;
    ap.boresights = default_sector_layout(sectors);
    env.aps.push_back(ap);
  }
  env.learning_points = generate_lp_grid(room, num_lps);
  env.ues = ues;
  return env;
}

Scenario quiet_scenario(Environment env, double horizon, double load_bps) {
  Scenario sc;
  sc.env = std::move(env);
  sc.radio.measurement_noise = false;
  sc.horizon_s = horizon;
  sc.traffic.offered_load_bps = load_bps;
  sc.trace_enabled = true;
  sc.seed = 9;
  return sc;
}

bool rows_overlap(const TraceRow& a, const TraceRow& b) {
  return a.time < b.time + b.duration - 1e-12 &&
         b.time < a.time + a.duration - 1e-12;
}

}  // namespace

TEST_CASE("baseline: single quiet link delivers the offered load") {
  auto env = make_env({12, 6, 3}, {{6, 3, 3}}, {{5, 2, 1}}, 12, 24);
  Scenario sc = quiet_scenario(std::move(env), 0.1, 50e6);
  sc.use_fixed_phases = true;
  sc.fixed_phases = {0.9};  // first beacon lands after the horizon
  const auto res = BaselineSim(sc).run();

  CHECK(res.metrics.collision_count == 0);
  CHECK(res.metrics.dropped == 0);
  const auto s = compute_metrics(res.metrics);
  CHECK(s.throughput_gbps * 1e9 ==
        Catch::Approx(50e6).epsilon(0.05));  // boundary packets allowed
  REQUIRE(s.avg_delay_s.has_value());
  CHECK(*s.avg_delay_s < 1e-3);
}

TEST_CASE("baseline: co-located APs with aligned beacons collide") {
  auto env = make_env({12, 6, 3}, {{6, 3, 3}, {6, 3.01, 3}},
                      {{5, 2, 1}, {7, 4, 1}}, 12, 24);
  Scenario sc = quiet_scenario(std::move(env), 0.2, 200e6);
  sc.use_fixed_phases = true;
  sc.fixed_phases = {0.05, 0.05};  // sweeps overlap in time
  const auto res = BaselineSim(sc).run();
  CHECK(res.metrics.collision_count > 0);
}

TEST_CASE("baseline: throughput stays under the service capacity") {
  auto env = make_env({12, 6, 3}, {{3, 3, 3}, {9, 3, 3}},
                      {{3, 2, 1}, {9, 4, 1}, {5, 3, 1}}, 12, 24);
  Scenario sc = quiet_scenario(std::move(env), 0.1, 1e9);
  const auto res = BaselineSim(sc).run();
  const auto s = compute_metrics(res.metrics);
  const double top_rate =
      sc.radio.mcs.entries.back().phy_rate_mbps * 1e6 * sc.env.num_aps();
  CHECK(s.throughput_gbps * 1e9 < top_rate);
  res.metrics.check_conservation();
}

TEST_CASE("baseline: halving the load never increases delay") {
  auto env = make_env({12, 6, 3}, {{3, 3, 3}, {9, 3, 3}},
                      {{3, 2, 1}, {9, 4, 1}, {5, 3, 1}, {7, 2, 1}}, 12, 24);
  Scenario full = quiet_scenario(env, 0.05, 1e9);
  full.trace_enabled = false;
  Scenario half = full;
  half.traffic.offered_load_bps = 0.5e9;
  const auto rf = BaselineSim(full).run();
  const auto rh = BaselineSim(half).run();
  const auto sf = compute_metrics(rf.metrics);
  const auto sh = compute_metrics(rh.metrics);
  REQUIRE(sf.avg_delay_s.has_value());
  REQUIRE(sh.avg_delay_s.has_value());
  CHECK(*sh.avg_delay_s <= *sf.avg_delay_s + 1e-9);
}

TEST_CASE("rrh: beacon header interval is sequential and collision-free") {
  auto env = make_env({12, 6, 3}, {{3, 3, 3}, {9, 3, 3}},
                      {{2, 2, 1}, {6, 3, 1}, {10, 4, 1}}, 8, 24);
  Scenario sc = quiet_scenario(std::move(env), 0.02, 1e9);
  const auto res = RrhSim(sc).run();

  // two AP sweep phases plus three station phases
  std::set<std::string> sweep_srcs;
  double bhi_end = 0.0;
  for (const auto& r : res.trace.rows()) {
    if (r.kind == FrameKind::Ssw) {
      sweep_srcs.insert(r.src.str());
      bhi_end = std::max(bhi_end, r.time + r.duration);
    }
  }
  CHECK(sweep_srcs.size() == 5);

  std::vector<TraceRow> bhi_rows;
  for (const auto& r : res.trace.rows())
    if (r.band == Band::Mmw60 && r.time < bhi_end) bhi_rows.push_back(r);
  for (std::size_t i = 0; i < bhi_rows.size(); ++i)
    for (std::size_t j = i + 1; j < bhi_rows.size(); ++j)
      CHECK_FALSE(rows_overlap(bhi_rows[i], bhi_rows[j]));

  CHECK(res.metrics.bhi_overhead_fraction > 0.0);
  CHECK(res.metrics.delivered > 0);
}

TEST_CASE("rrh: links failing the SINR floor never transmit concurrently") {
  // both stations sit between the APs, so any concurrent best-sector pair
  // violates the floor
  auto env = make_env({12, 6, 3}, {{5.8, 3, 3}, {6.2, 3, 3}},
                      {{5.9, 3.05, 1}, {6.1, 2.95, 1}}, 8, 24);
  Scenario sc = quiet_scenario(std::move(env), 0.02, 1e9);
  const auto res = RrhSim(sc).run();
  std::vector<TraceRow> data;
  for (const auto& r : res.trace.rows())
    if (r.kind == FrameKind::Data) data.push_back(r);
  REQUIRE(!data.empty());
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = i + 1; j < data.size(); ++j)
      if (data[i].src.str() != data[j].src.str())
        CHECK_FALSE(rows_overlap(data[i], data[j]));
  CHECK(res.metrics.data_interference_losses == 0);
}

TEST_CASE("dualband: well-separated links transmit concurrently") {
  auto env = make_env({30, 6, 3}, {{4, 3, 3}, {26, 3, 3}},
                      {{3.5, 2.5, 1}, {25.5, 3.5, 1}}, 12, 60);
  Scenario sc = quiet_scenario(std::move(env), 0.02, 1e9);
  auto learned = build_learning(sc.env, sc.radio, sc.learn);
  const auto res =
      DualBandSim(sc, learned.dbs, std::move(learned.exemplars)).run();

  bool overlap_found = false;
  const auto& rows = res.trace.rows();
  for (std::size_t i = 0; i < rows.size() && !overlap_found; ++i) {
    if (rows[i].kind != FrameKind::Data) continue;
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      if (rows[j].kind != FrameKind::Data) continue;
      if (rows[i].src.str() != rows[j].src.str() &&
          rows_overlap(rows[i], rows[j])) {
        overlap_found = true;
        break;
      }
    }
  }
  CHECK(overlap_found);
  CHECK(res.metrics.delivered > 0);
}

TEST_CASE("dualband: a UE at a learning point is served on its offline beam") {
  Environment env = make_env({12, 6, 3}, {{3, 3, 3}, {9, 3, 3}}, {}, 36, 90);
  const Point3 lp = env.learning_points[30];
  env.ues = {lp};
  Scenario sc = quiet_scenario(std::move(env), 0.01, 1e9);
  auto learned = build_learning(sc.env, sc.radio, sc.learn);
  const auto dbs = learned.dbs;
  const auto res =
      DualBandSim(sc, learned.dbs, std::move(learned.exemplars)).run();

  int data_rows = 0;
  for (const auto& r : res.trace.rows()) {
    if (r.kind != FrameKind::Data) continue;
    ++data_rows;
    const int serving_ap = r.src.type == NodeRef::Ap ? r.src.idx : -1;
    REQUIRE(serving_ap >= 0);
    REQUIRE(dbs.has_phi(30, serving_ap));
    CHECK(r.sector == dbs.phi[30][serving_ap]);
  }
  CHECK(data_rows > 0);
  CHECK(res.metrics.brp_fallbacks == 0);
}

TEST_CASE("dualband: BRP bursts never overlap a foreign NAV window") {
  auto env = make_env({12, 6, 3}, {{3, 3, 3}, {9, 3, 3}},
                      {{2.5, 2.5, 1}, {9.5, 3.5, 1}, {5, 3, 1}, {7, 3, 1}},
                      12, 48);
  Scenario sc = quiet_scenario(std::move(env), 0.02, 1e9);
  auto learned = build_learning(sc.env, sc.radio, sc.learn);
  const auto res =
      DualBandSim(sc, learned.dbs, std::move(learned.exemplars)).run();

  REQUIRE(!res.nav_windows.empty());
  for (const auto& r : res.trace.rows()) {
    if (r.kind != FrameKind::Brp) continue;
    for (const auto& w : res.nav_windows) {
      if (r.src.str() == "ap" + std::to_string(w.ap)) continue;
      const bool inside =
          r.time < w.end - 1e-12 && w.start < r.time + r.duration - 1e-12;
      CHECK_FALSE(inside);
    }
  }
}

TEST_CASE("engines are deterministic given (config, seed)") {
  auto env = make_env({12, 6, 3}, {{3, 3, 3}, {9, 3, 3}},
                      {{2.5, 2.5, 1}, {9.5, 3.5, 1}, {5, 3, 1}}, 12, 48);
  Scenario sc = quiet_scenario(std::move(env), 0.02, 1e9);
  sc.radio.measurement_noise = true;

  for (const auto protocol :
       {Protocol::Baseline, Protocol::CentralizedRrh, Protocol::DualBand}) {
    const auto a = run_scenario(sc, protocol);
    const auto b = run_scenario(sc, protocol);
    CHECK(a.metrics.delivered == b.metrics.delivered);
    CHECK(a.metrics.delivered_bits == b.metrics.delivered_bits);
    CHECK(a.metrics.dropped == b.metrics.dropped);
    CHECK(a.metrics.collision_count == b.metrics.collision_count);
    CHECK(a.metrics.sum_delay_s == b.metrics.sum_delay_s);
    CHECK(a.trace.to_csv() == b.trace.to_csv());
  }
}

TEST_CASE("blockage interrupts service without breaking conservation") {
  auto env = make_env({12, 6, 3}, {{6, 3, 3}}, {{5, 2, 1}}, 12, 24);
  Scenario sc = quiet_scenario(std::move(env), 0.1, 200e6);
  sc.radio.blockage.enabled = true;
  sc.radio.blockage.mean_clear_s = 0.01;
  sc.radio.blockage.mean_blocked_s = 0.005;
  const auto res = BaselineSim(sc).run();
  CHECK(res.metrics.blocked_losses > 0);
  res.metrics.check_conservation();
}
