#include <catch2/catch_amalgamated.hpp>

#include "mmwsim/geometry.hpp"
#include "mmwsim/rng.hpp"

using namespace mmwsim;

TEST_CASE("lp grid matches the hand-computed layouts") {
  SECTION("72 m^2 room with 90 points") {
    const auto lps = generate_lp_grid({12.0, 6.0, 3.0}, 90);
    REQUIRE(lps.size() == 90);
    for (const auto& p : lps) {
      CHECK(p.x > 0.0);
      CHECK(p.x < 12.0);
      CHECK(p.y > 0.0);
      CHECK(p.y < 6.0);
      CHECK(p.z == 1.0);
    }
  }
  SECTION("degenerate single point sits at the room center") {
    const auto lps = generate_lp_grid({1.0, 1.0, 3.0}, 1, 0.5);
    REQUIRE(lps.size() == 1);
    CHECK(lps[0].x == Catch::Approx(0.5));
    CHECK(lps[0].y == Catch::Approx(0.5));
  }
  SECTION("2 m x 1 m room with two points") {
    const auto lps = generate_lp_grid({2.0, 1.0, 3.0}, 2, 0.5);
    REQUIRE(lps.size() == 2);
    CHECK(lps[0].x == Catch::Approx(0.5));
    CHECK(lps[0].y == Catch::Approx(0.5));
    CHECK(lps[1].x == Catch::Approx(1.5));
    CHECK(lps[1].y == Catch::Approx(0.5));
  }
  SECTION("zero-area room is rejected") {
    CHECK_THROWS_AS(generate_lp_grid({0.0, 6.0, 3.0}, 4), ConfigError);
  }
  SECTION("deterministic") {
    const auto a = generate_lp_grid({12.0, 6.0, 3.0}, 90);
    const auto b = generate_lp_grid({12.0, 6.0, 3.0}, 90);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
}

TEST_CASE("angle offset basics") {
  ApNode ap;
  ap.position = {0, 0, 3};
  ap.num_sectors = 3;
  ap.boresights = {{1, 0, 0}, {0, 0, -1}, {0, 1, 0}};

  CHECK(angle_offset(ap, 1, {5, 0, 3}) == Catch::Approx(0.0).margin(1e-12));
  CHECK(angle_offset(ap, 1, {-5, 0, 3}) == Catch::Approx(kPi));
  CHECK(angle_offset(ap, 1, {0, 4, 3}) == Catch::Approx(kPi / 2));
  CHECK_THROWS_AS(angle_offset(ap, 1, ap.position), GeometryError);

  SECTION("rigid translation leaves the offset unchanged") {
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
      const Vec3 t{rng.uniform(-10, 10), rng.uniform(-10, 10),
                   rng.uniform(-10, 10)};
      const Point3 target{rng.uniform(1, 5), rng.uniform(1, 5),
                          rng.uniform(0, 2)};
      ApNode moved = ap;
      moved.position = ap.position + t;
      CHECK(angle_offset(ap, 2, target) ==
            Catch::Approx(angle_offset(moved, 2, target + t)).margin(1e-9));
    }
  }
}

TEST_CASE("default sector layout") {
  SECTION("36 sectors form 12 azimuths x 3 tilts") {
    const auto bs = default_sector_layout(36);
    REQUIRE(bs.size() == 36);
    for (const auto& b : bs) CHECK(b.norm() == Catch::Approx(1.0));
    double min_sep = kPi;
    for (std::size_t i = 0; i < bs.size(); ++i)
      for (std::size_t j = i + 1; j < bs.size(); ++j)
        min_sep = std::min(
            min_sep, std::acos(std::clamp(bs[i].dot(bs[j]), -1.0, 1.0)));
    CHECK(min_sep > 0.0);
    // three distinct tilt rows
    std::set<long long> zs;
    for (const auto& b : bs) zs.insert(llround(b.z * 1e9));
    CHECK(zs.size() == 3);
  }
  SECTION("single sector points straight down") {
    const auto bs = default_sector_layout(1);
    REQUIRE(bs.size() == 1);
    CHECK(bs[0].z == Catch::Approx(-1.0));
  }
  SECTION("4 sectors form one ring at the default tilt") {
    const auto bs = default_sector_layout(4);
    REQUIRE(bs.size() == 4);
    for (const auto& b : bs) CHECK(b.z == Catch::Approx(-std::sin(deg2rad(45))));
  }
  CHECK_THROWS_AS(default_sector_layout(0), ConfigError);
}

TEST_CASE("auto AP layout spreads over the ceiling") {
  const auto aps = auto_ap_layout({12.0, 6.0, 3.0}, 8);
  REQUIRE(aps.size() == 8);
  double min_d = 1e18;
  for (std::size_t i = 0; i < aps.size(); ++i) {
    CHECK(aps[i].z == 3.0);
    for (std::size_t j = i + 1; j < aps.size(); ++j)
      min_d = std::min(min_d, distance(aps[i], aps[j]));
  }
  CHECK(min_d >= 3.0);
}

TEST_CASE("environment validation") {
  Environment env;
  env.room = {12, 6, 3};
  ApNode ap;
  ap.id = 0;
  ap.position = {6, 3, 3};
  ap.num_sectors = 4;
  ap.boresights = default_sector_layout(4);
  env.aps = {ap};
  env.learning_points = generate_lp_grid(env.room, 10);
  env.ues = {{1, 1, 1}};
  CHECK_NOTHROW(env.validate());

  env.ues.push_back({99, 1, 1});
  CHECK_THROWS_AS(env.validate(), ConfigError);
}
