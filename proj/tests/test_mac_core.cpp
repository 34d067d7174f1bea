#include <catch2/catch_amalgamated.hpp>

#include "mmwsim/event_queue.hpp"
#include "mmwsim/medium.hpp"
#include "mmwsim/metrics.hpp"
#include "mmwsim/traffic.hpp"

using namespace mmwsim;

TEST_CASE("event queue ordering") {
  EventQueue q;
  std::vector<int> seen;
  q.schedule(2.0, EventKind::Timer, [&] { seen.push_back(2); });
  q.schedule(1.0, EventKind::Timer, [&] { seen.push_back(1); });
  q.schedule(3.0, EventKind::Timer, [&] { seen.push_back(3); });
  q.run_until(10.0);
  CHECK(seen == std::vector<int>{1, 2, 3});
  CHECK(q.now() == 10.0);

  SECTION("equal times preserve insertion order") {
    EventQueue q2;
    std::vector<int> order;
    for (int i = 0; i < 5; ++i)
      q2.schedule(1.0, EventKind::Timer, [&order, i] { order.push_back(i); });
    q2.run_until(1.0);
    CHECK(order == std::vector<int>{0, 1, 2, 3, 4});
  }

  SECTION("zero events leave counters empty") {
    EventQueue q3;
    q3.run_until(1.0);
    CHECK(q3.processed() == 0);
  }

  SECTION("scheduling in the past is a fault") {
    EventQueue q4;
    q4.schedule(1.0, EventKind::Timer, [&] {
      CHECK_THROWS_AS(q4.schedule(0.5, EventKind::Timer, [] {}), SimFault);
    });
    q4.run_until(2.0);
  }
}

TEST_CASE("poisson traffic") {
  const double rate = 1e9;
  const long long bits = 12000;

  SECTION("mean inter-arrival matches load over many samples") {
    PoissonSource src(rate, bits, 1 << 30, Rng(42, "arrivals", 0));
    const int n = 1000000;
    double t = 0.0;
    while (src.generated() < n) {
      t += 1e-3;
      src.sync(t);
    }
    const double mean = t / src.generated();
    CHECK(src.mean_interarrival_s() == Catch::Approx(12e-6));
    CHECK(mean == Catch::Approx(12e-6).epsilon(0.01));
  }

  SECTION("same seed, same stream") {
    PoissonSource a(rate, bits, 100, Rng(7, "arrivals", 3));
    PoissonSource b(rate, bits, 100, Rng(7, "arrivals", 3));
    for (int i = 0; i < 50; ++i) {
      a.sync(i * 1e-5);
      b.sync(i * 1e-5);
      REQUIRE(a.next_arrival_time() == b.next_arrival_time());
      REQUIRE(a.queue_len() == b.queue_len());
    }
  }

  SECTION("overflow counts against the cap") {
    PoissonSource src(rate, bits, 10, Rng(1, "arrivals", 0));
    src.sync(1.0);  // ~83k arrivals against a cap of 10
    CHECK(src.queue_len() == 10);
    CHECK(src.dropped_overflow() == src.generated() - 10);
  }
}

namespace {

PowerTables two_node_tables(double signal_dbm, double interferer_dbm) {
  // hand-built tables: node 0,1 = APs; node 2 = UE
  PowerTables pt;
  pt.num_aps = 2;
  pt.num_ues = 1;
  pt.max_sectors = 1;
  pt.ap_tx_mw.assign(2 * 1 * 3, 0.0);
  pt.ue_tx_mw.assign(1 * 3, 0.0);
  pt.ap_tx_mw[0 * 3 + 2] = dbm_to_mw(signal_dbm);      // ap0 -> ue
  pt.ap_tx_mw[1 * 3 + 2] = dbm_to_mw(interferer_dbm);  // ap1 -> ue
  pt.ap_tx_mw[1 * 3 + 0] = dbm_to_mw(-70.0);           // ap1 heard at ap0
  return pt;
}

}  // namespace

TEST_CASE("medium60 reception outcomes") {
  const double noise_mw = dbm_to_mw(-80.0);

  SECTION("clean frame above threshold succeeds") {
    auto pt = two_node_tables(-60.0, -70.0);
    Medium60 m(&pt, noise_mw, dbm_to_mw(-60.0));
    const long long tx = m.begin_tx(0.0, 1e-5, 0, 1);
    m.begin_rx(tx, 2, 10.0, false);
    m.end_tx(tx);
    const auto out = m.end_rx(tx, 2);
    CHECK(out.success);
    CHECK(out.worst_sinr_db == Catch::Approx(20.0));
  }

  SECTION("boresight interferer of equal power collides") {
    auto pt = two_node_tables(-60.0, -60.0);
    Medium60 m(&pt, noise_mw, dbm_to_mw(-60.0));
    const long long tx = m.begin_tx(0.0, 1e-5, 0, 1);
    m.begin_rx(tx, 2, 10.0, false);
    const long long jam = m.begin_tx(2e-6, 8e-6, 1, 1);
    m.end_tx(tx);
    const auto out = m.end_rx(tx, 2);
    m.end_tx(jam);
    CHECK_FALSE(out.success);
    CHECK(out.outcome == Outcome::Collision);
    CHECK(out.interference_decisive);
    CHECK(out.worst_sinr_db < 0.1);
  }

  SECTION("partial overlap uses the worst interval") {
    auto pt = two_node_tables(-60.0, -70.0);
    Medium60 m(&pt, noise_mw, dbm_to_mw(-60.0));
    const long long tx = m.begin_tx(0.0, 1e-5, 0, 1);
    m.begin_rx(tx, 2, 9.0, false);
    const long long jam = m.begin_tx(9e-6, 2e-5, 1, 1);  // tail overlap
    m.end_tx(tx);
    const auto out = m.end_rx(tx, 2);
    m.end_tx(jam);
    // SINR during the overlap: signal at -60 against interference plus noise
    const double expect =
        -60.0 - mw_to_dbm(dbm_to_mw(-70.0) + dbm_to_mw(-80.0));
    CHECK(out.worst_sinr_db == Catch::Approx(expect));
    CHECK(out.success == (expect >= 9.0));
  }

  SECTION("blocked link fails regardless of SINR") {
    auto pt = two_node_tables(-40.0, -120.0);
    Medium60 m(&pt, noise_mw, dbm_to_mw(-60.0));
    const long long tx = m.begin_tx(0.0, 1e-5, 0, 1);
    m.begin_rx(tx, 2, 1.0, true);
    m.end_tx(tx);
    const auto out = m.end_rx(tx, 2);
    CHECK(out.outcome == Outcome::Blocked);
  }

  SECTION("carrier sense sums active power") {
    auto pt = two_node_tables(-60.0, -70.0);
    Medium60 m(&pt, noise_mw, dbm_to_mw(-71.0));
    CHECK_FALSE(m.cs_busy(0));
    const long long tx = m.begin_tx(0.0, 1e-5, 1, 1);  // ap1 at -70 into ap0
    CHECK(m.cs_busy(0));
    CHECK_FALSE(m.cs_busy(1));  // own transmission excluded
    m.end_tx(tx);
    CHECK_FALSE(m.cs_busy(0));
  }
}

TEST_CASE("medium5 single collision domain") {
  Medium5 m;
  const long long a = m.begin_tx(0.0, 1e-4, 0);
  CHECK(m.busy());
  const long long b = m.begin_tx(5e-5, 2e-4, 1);
  CHECK_FALSE(m.end_tx(a));
  CHECK_FALSE(m.end_tx(b));
  const long long c = m.begin_tx(3e-4, 4e-4, 0);
  CHECK(m.end_tx(c));
  CHECK_FALSE(m.busy());
}

TEST_CASE("metrics") {
  SECTION("compute_metrics arithmetic") {
    MetricsRecord rec;
    rec.horizon_s = 1e-3;
    rec.delivered = 10;
    rec.delivered_bits = 10 * 12000;
    rec.generated = 10;
    const auto s = compute_metrics(rec);
    CHECK(s.throughput_gbps == Catch::Approx(0.12));

    MetricsRecord one;
    one.horizon_s = 1.0;
    one.delivered = 1;
    one.sum_delay_s = 5e-6;
    REQUIRE(compute_metrics(one).avg_delay_s.has_value());
    CHECK(*compute_metrics(one).avg_delay_s == Catch::Approx(5e-6));

    MetricsRecord none;
    none.horizon_s = 1.0;
    CHECK(compute_metrics(none).throughput_gbps == 0.0);
    CHECK_FALSE(compute_metrics(none).avg_delay_s.has_value());
  }

  SECTION("conservation check") {
    MetricsRecord rec;
    rec.generated = 5;
    rec.delivered = 3;
    rec.dropped = 1;
    rec.in_flight = 1;
    CHECK_NOTHROW(rec.check_conservation());
    rec.in_flight = 0;
    CHECK_THROWS_AS(rec.check_conservation(), SimFault);
  }

  SECTION("analytic throughput formula") {
    CHECK(analytic_rn(2, 0.05, 1.7) == Catch::Approx(3.06));
    CHECK(analytic_rn(4, 0.0, 1.0) == Catch::Approx(4.0));
    CHECK(analytic_rn(1, 0.1, 1.0) == Catch::Approx(0.9));
    CHECK_THROWS_AS(analytic_rn(10, 0.2, 1.0), std::domain_error);
  }
}
