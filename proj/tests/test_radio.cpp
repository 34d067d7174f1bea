#include <catch2/catch_amalgamated.hpp>

#include "mmwsim/radio.hpp"
#include "mmwsim/rng.hpp"

using namespace mmwsim;

TEST_CASE("antenna gain pattern") {
  AntennaPattern p;
  CHECK(antenna_gain(p, 0.0) == Catch::Approx(25.0));
  // -3 dB at half the beamwidth, by definition of HPBW
  CHECK(antenna_gain(p, p.hpbw_rad / 2) == Catch::Approx(22.0));
  CHECK(antenna_gain(p, kPi) == Catch::Approx(-10.0));

  SECTION("monotone non-increasing in offset") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      double a = rng.uniform(0, kPi), b = rng.uniform(0, kPi);
      if (a > b) std::swap(a, b);
      CHECK(antenna_gain(p, a) >= antenna_gain(p, b));
    }
  }
}

TEST_CASE("free-space path loss") {
  CHECK(path_loss_db(5.0, 60.48e9) == Catch::Approx(82.05).margin(0.05));
  CHECK(path_loss_db(10.0, 5.18e9) == Catch::Approx(66.7).margin(0.05));
  CHECK(path_loss_db(10.0, 60e9) - path_loss_db(1.0, 60e9) ==
        Catch::Approx(20.0));
  // degenerate distances clamp instead of diverging
  CHECK(path_loss_db(0.0, 60e9) == path_loss_db(0.1, 60e9));
}

TEST_CASE("received mmw power composes gain and loss") {
  ApNode ap;
  ap.id = 0;
  ap.position = {0, 0, 0};
  ap.num_sectors = 1;
  ap.boresights = {{1, 0, 0}};
  ap.tx_power_mmw_dbm = 10.0;
  AntennaPattern p;

  CHECK(rx_power_mmw(ap, 1, {5, 0, 0}, p) ==
        Catch::Approx(-47.05).margin(0.05));
  CHECK(rx_power_mmw(ap, 1, {-5, 0, 0}, p) ==
        Catch::Approx(-82.05).margin(0.05));
  CHECK(rx_power_mmw(ap, 1, {5, 0, 0}, p) -
            rx_power_mmw(ap, 1, {10, 0, 0}, p) ==
        Catch::Approx(6.02).margin(0.01));
}

TEST_CASE("noise power") {
  NoiseModel nm;
  CHECK(noise_power_dbm(nm) == Catch::Approx(-73.56).margin(0.05));
  CHECK(noise_power_dbm({0.0, 1.0}) == Catch::Approx(-174.0));
  NoiseModel shifted = nm;
  shifted.noise_figure_db += 3.0;
  CHECK(noise_power_dbm(shifted) - noise_power_dbm(nm) == Catch::Approx(3.0));
}

TEST_CASE("snr and sinr") {
  CHECK(snr_db(-60, -80) == Catch::Approx(20.0));
  CHECK(snr_db(-70, -70) == Catch::Approx(0.0));
  CHECK(snr_db(-47.05, -73.56) == Catch::Approx(26.51).margin(0.05));

  CHECK(sinr_db(-60, {}, -80) == Catch::Approx(snr_db(-60, -80)));
  // linear-domain brute force: 1e-6 / (1e-7 + 1e-8)
  const double expect = 10 * std::log10(1e-6 / (1e-7 + 1e-8));
  CHECK(sinr_db(-60, {-70}, -80) == Catch::Approx(expect).margin(1e-9));
  CHECK(sinr_db(-60, {-70}, -80) == Catch::Approx(9.59).margin(0.01));

  SECTION("sinr never exceeds snr, equality only without interferers") {
    Rng rng(11);
    for (int i = 0; i < 20000; ++i) {
      const double s = rng.uniform(-120, 0);
      const double n = rng.uniform(-120, 0);
      std::vector<double> ints;
      const int k = static_cast<int>(rng.uniform_int(4));
      for (int j = 0; j < k; ++j) ints.push_back(rng.uniform(-120, 0));
      const double v = sinr_db(s, ints, n);
      if (ints.empty()) {
        CHECK(v == Catch::Approx(snr_db(s, n)));
      } else {
        CHECK(v < snr_db(s, n));
      }
    }
  }
}

TEST_CASE("mcs selection") {
  const auto table = default_mcs_table();
  table.validate();

  auto m = mcs_for_snr(table, 16.0);
  REQUIRE(m.has_value());
  CHECK(*m == 9);
  CHECK(table.entry(*m).phy_rate_mbps == Catch::Approx(2502.5));

  CHECK_FALSE(mcs_for_snr(table, -50.0).has_value());

  m = mcs_for_snr(table, 1e9);
  REQUIRE(m.has_value());
  CHECK(*m == 12);
  CHECK(table.entry(*m).phy_rate_mbps == Catch::Approx(4620.0));

  SECTION("monotone in snr") {
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
      double a = rng.uniform(-10, 30), b = rng.uniform(-10, 30);
      if (a > b) std::swap(a, b);
      const auto ma = mcs_for_snr(table, a), mb = mcs_for_snr(table, b);
      const double ra = ma ? table.entry(*ma).phy_rate_mbps : 0.0;
      const double rb = mb ? table.entry(*mb).phy_rate_mbps : 0.0;
      CHECK(ra <= rb);
    }
  }
}

TEST_CASE("db/linear conversions round-trip") {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const double dbm = rng.uniform(-150, 30);
    CHECK(mw_to_dbm(dbm_to_mw(dbm)) == Catch::Approx(dbm).epsilon(1e-9));
  }
  CHECK(dbm_to_mw(kNegInfDb) == 0.0);
  CHECK(mw_to_dbm(0.0) == kNegInfDb);
}

TEST_CASE("wifi rss") {
  ApNode ap;
  ap.id = 0;
  ap.position = {0, 0, 0};
  ap.num_sectors = 1;
  ap.boresights = {{0, 0, -1}};
  ap.tx_power_wifi_dbm = 20.0;

  RadioConfig rc;
  rc.shadowing = false;
  CHECK(wifi_rss_dbm(ap, {10, 0, 0}, rc) == Catch::Approx(-46.7).margin(0.05));
  CHECK(wifi_rss_dbm(ap, {10, 0, 0}, rc) ==
        Catch::Approx(wifi_rss_dbm(ap, {0, 10, 0}, rc)));

  rc.shadowing = true;
  const double a = wifi_rss_dbm(ap, {3.25, 1.5, 1.0}, rc);
  const double b = wifi_rss_dbm(ap, {3.25, 1.5, 1.0}, rc);
  CHECK(a == b);
  // different positions see different shadowing
  CHECK(a != wifi_rss_dbm(ap, {3.25, 1.75, 1.0}, rc));
}
