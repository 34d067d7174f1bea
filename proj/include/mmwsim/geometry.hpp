#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mmwsim/errors.hpp"

namespace mmwsim {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  bool operator==(const Vec3& o) const {
    return x == o.x && y == o.y && z == o.z;
  }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }

  Vec3 normalized() const {
    const double n = norm();
    if (n <= 0.0) throw GeometryError("cannot normalize zero vector");
    return {x / n, y / n, z / n};
  }

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

using Point3 = Vec3;

inline double distance(const Point3& a, const Point3& b) {
  return (a - b).norm();
}

// Room as an axis-aligned box anchored at the origin: [0,w] x [0,d] x [0,h].
struct Box {
  double w = 12.0;
  double d = 6.0;
  double h = 3.0;

  bool contains(const Point3& p) const {
    return p.x >= 0.0 && p.x <= w && p.y >= 0.0 && p.y <= d && p.z >= 0.0 &&
           p.z <= h;
  }
};

struct ApNode {
  int id = 0;  // contiguous, starting at 0
  Point3 position;
  int num_sectors = 1;
  std::vector<Vec3> boresights;  // unit vectors, one per sector, id 1..D
  double tx_power_mmw_dbm = 10.0;
  double tx_power_wifi_dbm = 20.0;

  const Vec3& boresight(int sector_id) const {
    if (sector_id < 1 || sector_id > num_sectors)
      throw GeometryError("sector id out of range: " +
                          std::to_string(sector_id));
    return boresights[static_cast<std::size_t>(sector_id - 1)];
  }
};

// Angle between the sector boresight and the AP->target direction, in [0,pi].
inline double angle_offset(const ApNode& ap, int sector_id,
                           const Point3& target) {
  const Vec3 to = target - ap.position;
  if (to.norm() <= 0.0)
    throw GeometryError("target coincides with AP position");
  const double c = ap.boresight(sector_id).dot(to.normalized());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

// Downward-fan sector layout: azimuths uniformly spaced over 360 degrees,
// elevation tilts below horizontal chosen by the row count. Ordering is
// azimuth-major within each tilt row.
inline std::vector<Vec3> default_sector_layout(int num_sectors) {
  if (num_sectors < 1)
    throw ConfigError("num_sectors must be >= 1, got " +
                      std::to_string(num_sectors));
  if (num_sectors == 1) return {{0.0, 0.0, -1.0}};

  std::vector<double> tilts_deg;
  int n_az;
  if (num_sectors % 3 == 0) {
    tilts_deg = {20.0, 45.0, 70.0};
    n_az = num_sectors / 3;
  } else {
    tilts_deg = {45.0};
    n_az = num_sectors;
  }

  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(num_sectors));
  for (double tilt_deg : tilts_deg) {
    const double tilt = deg2rad(tilt_deg);
    for (int a = 0; a < n_az; ++a) {
      const double az = 2.0 * kPi * a / n_az;
      out.push_back({std::cos(az) * std::cos(tilt),
                     std::sin(az) * std::cos(tilt), -std::sin(tilt)});
    }
  }
  return out;
}

// Near-square uniform grid of learning points at a fixed height, cell
// centered, row-major, truncated to `count`.
inline std::vector<Point3> generate_lp_grid(const Box& room, int count,
                                            double height = 1.0) {
  if (count < 1) throw ConfigError("lp count must be >= 1");
  if (room.w <= 0.0 || room.d <= 0.0)
    throw ConfigError("room has zero area");
  int n_x = static_cast<int>(std::llround(std::sqrt(count * room.w / room.d)));
  n_x = std::max(1, n_x);
  const int n_y = (count + n_x - 1) / n_x;
  std::vector<Point3> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < n_y && static_cast<int>(out.size()) < count; ++j) {
    for (int i = 0; i < n_x && static_cast<int>(out.size()) < count; ++i) {
      out.push_back(
          {(i + 0.5) * room.w / n_x, (j + 0.5) * room.d / n_y, height});
    }
  }
  return out;
}

// Ceiling grid for auto AP placement: among grids with gx*gy >= count, pick
// the one maximizing the spacing floor, preferring balanced shapes.
inline std::vector<Point3> auto_ap_layout(const Box& room, int count) {
  if (count < 1) throw ConfigError("ap count must be >= 1");
  int best_gx = 1, best_gy = count;
  double best_spacing = -1.0;
  for (int gx = 1; gx <= count; ++gx) {
    const int gy = (count + gx - 1) / gx;
    const double spacing = std::min(room.w / gx, room.d / gy);
    const bool better =
        spacing > best_spacing + 1e-12 ||
        (std::abs(spacing - best_spacing) <= 1e-12 &&
         std::abs(gx - gy) < std::abs(best_gx - best_gy));
    if (better) {
      best_gx = gx;
      best_gy = gy;
      best_spacing = spacing;
    }
  }
  std::vector<Point3> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < best_gy && static_cast<int>(out.size()) < count; ++j) {
    for (int i = 0; i < best_gx && static_cast<int>(out.size()) < count; ++i) {
      out.push_back({(i + 0.5) * room.w / best_gx,
                     (j + 0.5) * room.d / best_gy, room.h});
    }
  }
  return out;
}

struct Environment {
  Box room;
  std::vector<ApNode> aps;
  std::vector<Point3> learning_points;
  std::vector<Point3> ues;

  int num_aps() const { return static_cast<int>(aps.size()); }
  int num_lps() const { return static_cast<int>(learning_points.size()); }
  int num_ues() const { return static_cast<int>(ues.size()); }

  void validate() const {
    if (aps.empty()) throw ConfigError("environment needs at least one AP");
    if (learning_points.empty())
      throw ConfigError("environment needs at least one learning point");
    for (std::size_t i = 0; i < aps.size(); ++i) {
      const auto& ap = aps[i];
      if (ap.id != static_cast<int>(i))
        throw ConfigError("AP ids must be contiguous starting at 0");
      if (ap.num_sectors < 1 ||
          ap.boresights.size() != static_cast<std::size_t>(ap.num_sectors))
        throw ConfigError("AP " + std::to_string(ap.id) +
                          ": boresight list does not match num_sectors");
      for (const auto& b : ap.boresights)
        if (std::abs(b.norm() - 1.0) > 1e-9)
          throw ConfigError("AP " + std::to_string(ap.id) +
                            ": boresights must be unit length");
      if (!ap.position.finite() || !room.contains(ap.position))
        throw ConfigError("AP " + std::to_string(ap.id) + " outside room");
    }
    for (const auto& p : learning_points)
      if (!p.finite() || !room.contains(p))
        throw ConfigError("learning point outside room");
    for (const auto& p : ues)
      if (!p.finite() || !room.contains(p)) throw ConfigError("UE outside room");
  }
};

}  // namespace mmwsim
