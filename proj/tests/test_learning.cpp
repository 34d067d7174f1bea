#include <catch2/catch_amalgamated.hpp>

#include "mmwsim/db_io.hpp"
#include "mmwsim/learning.hpp"
#include "oracles.hpp"

using namespace mmwsim;

namespace {

Environment small_env(int num_aps, int num_lps, int sectors,
                      const Box& room = {12, 6, 3}) {
  Environment env;
  env.room = room;
  const auto pos = auto_ap_layout(room, num_aps);
  for (int n = 0; n < num_aps; ++n) {
    ApNode ap;
    ap.id = n;
    ap.position = pos[n];
    ap.num_sectors = sectors;
    ap.boresights = default_sector_layout(sectors);
    env.aps.push_back(ap);
  }
  env.learning_points = generate_lp_grid(room, num_lps);
  return env;
}

}  // namespace

TEST_CASE("build_databases computes the best-sector argmax") {
  RadioConfig rc;
  rc.shadowing = false;

  SECTION("AP directly above an LP with 36 sectors") {
    Environment env;
    env.room = {12, 6, 3};
    ApNode ap;
    ap.id = 0;
    ap.position = {6, 3, 3};
    ap.num_sectors = 36;
    ap.boresights = default_sector_layout(36);
    env.aps = {ap};
    env.learning_points = {{6, 3, 1}};

    const auto db = build_databases(env, rc);
    REQUIRE(db.has_phi(0, 0));
    CHECK(db.phi[0][0] == oracles::best_sector_brute(ap, {6, 3, 1}, rc));
    // steepest tilt row starts at id 25; ties break to the lowest id
    CHECK(db.phi[0][0] == 25);
  }

  SECTION("unreachable LP yields a null entry with zero power") {
    Environment env;
    env.room = {12000, 6, 3};
    ApNode ap;
    ap.id = 0;
    ap.position = {0.5, 3, 3};
    ap.num_sectors = 4;
    ap.boresights = default_sector_layout(4);
    env.aps = {ap};
    env.learning_points = {{0.5, 3, 1}, {11000, 3, 1}};

    const auto db = build_databases(env, rc);
    CHECK(db.has_phi(0, 0));
    CHECK_FALSE(db.has_phi(1, 0));
    CHECK(db.p_off[1][0] == kNegInfDb);
    CHECK(dbm_to_mw(db.p_off[1][0]) == 0.0);
  }

  SECTION("argmax picks the strongest sector") {
    Environment env;
    env.room = {12, 6, 3};
    ApNode ap;
    ap.id = 0;
    ap.position = {6, 3, 3};
    ap.num_sectors = 3;
    // sector 2 aimed straight at the LP below, 1 and 3 off to the sides
    ap.boresights = {Vec3{1, 0, -1}.normalized(), Vec3{0, 0, -1},
                     Vec3{0, 1, -1}.normalized()};
    env.aps = {ap};
    env.learning_points = {{6, 3, 1}};
    const auto db = build_databases(env, rc);
    CHECK(db.phi[0][0] == 2);
  }

  SECTION("brute-force argmax agreement and exact p_off on a full scenario") {
    auto env = small_env(3, 24, 12);
    const auto db = build_databases(env, rc);
    for (int l = 0; l < db.num_lps; ++l) {
      for (int n = 0; n < db.num_aps; ++n) {
        if (!db.has_phi(l, n)) continue;
        const auto& ap = env.aps[n];
        const int best =
            oracles::best_sector_brute(ap, env.learning_points[l], rc);
        CHECK(db.phi[l][n] == best);
        CHECK(db.p_off[l][n] ==
              rx_power_mmw(ap, db.phi[l][n], env.learning_points[l],
                           rc.pattern, rc.freq_mmw_hz, rc.rx_gain_dbi));
        for (int d = 1; d <= ap.num_sectors; ++d)
          CHECK(db.p_off[l][n] >=
                rx_power_mmw(ap, d, env.learning_points[l], rc.pattern,
                             rc.freq_mmw_hz, rc.rx_gain_dbi));
      }
    }
  }

  SECTION("pure function of its inputs") {
    auto env = small_env(2, 12, 9);
    const auto a = build_databases(env, rc);
    const auto b = build_databases(env, rc);
    CHECK(a.psi == b.psi);
    CHECK(a.phi == b.phi);
    CHECK(a.p_off == b.p_off);
  }
}

TEST_CASE("group_by_best_sector partitions the non-null rows") {
  FingerprintDatabases db;
  db.num_lps = 4;
  db.num_aps = 1;
  db.psi.assign(4, {0.0});
  db.phi = {{1}, {1}, {2}, {kNullSector}};
  db.p_off = {{-50.0}, {-51.0}, {-52.0}, {kNegInfDb}};

  const auto groups = group_by_best_sector(db, 0);
  REQUIRE(groups.size() == 2);
  CHECK(groups.at(1) == std::vector<int>{0, 1});
  CHECK(groups.at(2) == std::vector<int>{2});

  SECTION("all-null column gives an empty map") {
    FingerprintDatabases empty = db;
    empty.phi = {{kNullSector}, {kNullSector}, {kNullSector}, {kNullSector}};
    empty.p_off.assign(4, {kNegInfDb});
    CHECK(group_by_best_sector(empty, 0).empty());
  }

  SECTION("distinct sectors give singleton groups") {
    FingerprintDatabases singles = db;
    singles.phi = {{1}, {2}, {3}, {4}};
    singles.p_off.assign(4, {-50.0});
    const auto g = group_by_best_sector(singles, 0);
    CHECK(g.size() == 4);
    for (const auto& [sec, lps] : g) CHECK(lps.size() == 1);
  }
}

TEST_CASE("affinity propagation") {
  SECTION("two tight pairs yield one exemplar per pair") {
    const std::vector<double> pts = {0.0, 0.1, 10.0, 10.1};
    std::vector<std::vector<double>> sim(4, std::vector<double>(4, 0.0));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        sim[i][j] = -(pts[i] - pts[j]) * (pts[i] - pts[j]);

    const auto res = affinity_propagation(sim);
    REQUIRE(res.exemplars.size() == 2);
    CHECK(res.exemplars[0] <= 1);
    CHECK(res.exemplars[1] >= 2);
    CHECK(res.assignment[0] == res.assignment[1]);
    CHECK(res.assignment[2] == res.assignment[3]);
    CHECK(res.assignment[0] != res.assignment[2]);

    // agrees with exhaustive 2-medoid search up to within-pair choice
    const auto med = oracles::k_medoids_brute(
        {{0.0}, {0.1}, {10.0}, {10.1}}, 2);
    CHECK(((med[0] <= 1) == (res.exemplars[0] <= 1)));
  }

  SECTION("identical points collapse to a single exemplar") {
    std::vector<std::vector<double>> sim(5, std::vector<double>(5, 0.0));
    const auto res = affinity_propagation(sim);
    REQUIRE(res.exemplars.size() == 1);
    for (int a : res.assignment) CHECK(a == res.exemplars[0]);
  }

  SECTION("single point is its own exemplar") {
    const auto res = affinity_propagation({{0.0}});
    CHECK(res.exemplars == std::vector<int>{0});
    CHECK(res.assignment == std::vector<int>{0});
    CHECK(res.converged);
  }

  SECTION("non-square input is rejected") {
    CHECK_THROWS_AS(affinity_propagation({{0.0, 1.0}, {0.0}}), ConfigError);
  }

  SECTION("deterministic across calls") {
    std::vector<std::vector<double>> sim(6, std::vector<double>(6, 0.0));
    Rng rng(23);
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j)
        sim[i][j] = sim[j][i] = -rng.uniform(0, 50);
    const auto a = affinity_propagation(sim);
    const auto b = affinity_propagation(sim);
    CHECK(a.exemplars == b.exemplars);
    CHECK(a.assignment == b.assignment);
  }
}

TEST_CASE("build_exemplars") {
  RadioConfig rc;
  rc.shadowing = false;

  SECTION("singleton group keeps its own fingerprint") {
    Environment env;
    env.room = {12, 6, 3};
    ApNode ap;
    ap.id = 0;
    ap.position = {6, 3, 3};
    ap.num_sectors = 1;
    ap.boresights = default_sector_layout(1);
    env.aps = {ap};
    env.learning_points = {{6, 3, 1}};
    const auto db = build_databases(env, rc);
    const auto sets = build_exemplars(db, 0);
    REQUIRE(sets.size() == 1);
    REQUIRE(sets[0].exemplars.size() == 1);
    CHECK(sets[0].exemplars[0] == db.psi[0]);
  }

  SECTION("equal fingerprints in one group give one exemplar") {
    FingerprintDatabases db;
    db.num_lps = 3;
    db.num_aps = 1;
    db.psi.assign(3, {-40.0});
    db.phi.assign(3, {7});
    db.p_off.assign(3, {-50.0});
    const auto sets = build_exemplars(db, 0);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].sector_id == 7);
    CHECK(sets[0].exemplars.size() == 1);
  }

  SECTION("two separated fingerprint clouds give two exemplars") {
    FingerprintDatabases db;
    db.num_lps = 6;
    db.num_aps = 2;
    db.psi = {{-40.0, -80.0}, {-40.1, -80.1}, {-40.2, -79.9},
              {-80.0, -40.0}, {-80.1, -40.1}, {-79.9, -40.2}};
    db.phi.assign(6, {3, kNullSector});
    db.p_off.assign(6, {-55.0, kNegInfDb});
    const auto sets = build_exemplars(db, 0);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].exemplars.size() == 2);
    // every exemplar must be a dataset member, bit for bit
    for (const auto& ex : sets[0].exemplars) {
      bool found = false;
      for (const auto& row : db.psi) found = found || (row == ex);
      CHECK(found);
    }
  }

  SECTION("member sets partition the covered LPs") {
    auto env = small_env(2, 30, 12);
    const auto db = build_databases(env, rc);
    for (int n = 0; n < db.num_aps; ++n) {
      const auto sets = build_exemplars(db, n);
      std::vector<int> all;
      for (const auto& s : sets) {
        const auto members = s.all_members();
        all.insert(all.end(), members.begin(), members.end());
        CHECK(s.exemplars.size() == s.member_lps.size());
        for (std::size_t e = 0; e < s.exemplar_lps.size(); ++e)
          CHECK(db.psi[s.exemplar_lps[e]] == s.exemplars[e]);
      }
      std::sort(all.begin(), all.end());
      CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
      std::vector<int> covered;
      for (int l = 0; l < db.num_lps; ++l)
        if (db.has_phi(l, n)) covered.push_back(l);
      CHECK(all == covered);
    }
  }
}

TEST_CASE("database file round-trip") {
  RadioConfig rc;
  auto env = small_env(2, 20, 9);
  const auto db = build_databases(env, rc);
  const std::vector<int> sectors = {9, 9};

  const std::string text = serialize_databases(db, sectors);
  const auto loaded = deserialize_databases(text);
  CHECK(loaded.sectors_per_ap == sectors);
  CHECK(loaded.db.phi == db.phi);
  for (int l = 0; l < db.num_lps; ++l) {
    for (int n = 0; n < db.num_aps; ++n) {
      CHECK(loaded.db.psi[l][n] == Catch::Approx(db.psi[l][n]).margin(5e-7));
      if (db.p_off[l][n] == kNegInfDb) {
        CHECK(loaded.db.p_off[l][n] == kNegInfDb);
      } else {
        CHECK(loaded.db.p_off[l][n] ==
              Catch::Approx(db.p_off[l][n]).margin(5e-7));
      }
    }
  }
  // serialization is stable once quantized
  CHECK(serialize_databases(loaded.db, sectors) == text);
}
