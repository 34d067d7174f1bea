#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "mmwsim/errors.hpp"
#include "mmwsim/geometry.hpp"
#include "mmwsim/rng.hpp"

namespace mmwsim {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kThermalDensityDbmHz = -174.0;
inline constexpr double kNegInfDb = -std::numeric_limits<double>::infinity();

inline double dbm_to_mw(double dbm) {
  return dbm == kNegInfDb ? 0.0 : std::pow(10.0, dbm / 10.0);
}

inline double mw_to_dbm(double mw) {
  return mw <= 0.0 ? kNegInfDb : 10.0 * std::log10(mw);
}

// Gaussian main lobe over a constant sidelobe floor.
struct AntennaPattern {
  double peak_gain_dbi = 25.0;
  double hpbw_rad = deg2rad(30.0);
  double sidelobe_floor_dbi = -10.0;

  void validate() const {
    if (!(peak_gain_dbi > sidelobe_floor_dbi))
      throw ConfigError("antenna peak gain must exceed sidelobe floor");
    if (!(hpbw_rad > 0.0 && hpbw_rad < kPi))
      throw ConfigError("antenna hpbw must be in (0, pi)");
  }
};

inline double antenna_gain(const AntennaPattern& p, double offset_rad) {
  const double r = offset_rad / p.hpbw_rad;
  return std::max(p.peak_gain_dbi - 12.0 * r * r, p.sidelobe_floor_dbi);
}

struct McsEntry {
  int index = 0;
  double phy_rate_mbps = 0.0;
  double min_snr_db = 0.0;
};

struct McsTable {
  std::vector<McsEntry> entries;  // ordered by increasing rate

  void validate() const {
    if (entries.empty()) throw ConfigError("MCS table is empty");
    if (entries.front().index != 0)
      throw ConfigError("MCS table must start with control entry MCS 0");
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (!(entries[i].phy_rate_mbps > entries[i - 1].phy_rate_mbps))
        throw ConfigError("MCS rates must be strictly increasing");
      if (!(entries[i].min_snr_db > entries[i - 1].min_snr_db))
        throw ConfigError("MCS SNR thresholds must be strictly increasing");
    }
  }

  const McsEntry& entry(int mcs_index) const {
    for (const auto& e : entries)
      if (e.index == mcs_index) return e;
    throw ConfigError("unknown MCS index " + std::to_string(mcs_index));
  }

  double control_min_snr_db() const { return entries.front().min_snr_db; }
  double control_rate_mbps() const { return entries.front().phy_rate_mbps; }

  // Position in the table, -1 when infeasible; comparable rank for
  // "degrades by at least one step" checks.
  int rank_for_snr(double snr_db) const {
    int rank = -1;
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (snr_db >= entries[i].min_snr_db) rank = static_cast<int>(i);
    return rank;
  }
};

// SNR thresholds are artifact constants (config-overridable); the rates are
// the usual single-carrier control/data ladder.
inline McsTable default_mcs_table() {
  McsTable t;
  t.entries = {{0, 27.5, 1.0},     {1, 385.0, 5.0},   {4, 1155.0, 9.0},
               {5, 1251.25, 10.0}, {9, 2502.5, 15.0}, {12, 4620.0, 20.0}};
  return t;
}

inline std::optional<int> mcs_for_snr(const McsTable& table, double snr_db) {
  const int rank = table.rank_for_snr(snr_db);
  if (rank < 0) return std::nullopt;
  return table.entries[static_cast<std::size_t>(rank)].index;
}

struct NoiseModel {
  double noise_figure_db = 7.1;
  double bandwidth_hz = 2.16e9;

  void validate() const {
    if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth must be positive");
  }
};

inline double noise_power_dbm(const NoiseModel& nm) {
  return kThermalDensityDbmHz + 10.0 * std::log10(nm.bandwidth_hz) +
         nm.noise_figure_db;
}

struct LinkBudget {
  double rx_power_dbm = kNegInfDb;
  double snr_db = kNegInfDb;
  std::optional<int> mcs;
};

// Free-space loss; distances below 0.1 m are clamped to keep the formula
// finite for degenerate inputs.
inline double path_loss_db(double distance_m, double freq_hz) {
  const double d = std::max(distance_m, 0.1);
  return 20.0 * std::log10(4.0 * kPi * d * freq_hz / kSpeedOfLight);
}

inline double snr_db(double p_signal_dbm, double p_noise_dbm) {
  return p_signal_dbm - p_noise_dbm;
}

inline double sinr_db(double p_signal_dbm,
                      const std::vector<double>& interferer_powers_dbm,
                      double p_noise_dbm) {
  double denom_mw = dbm_to_mw(p_noise_dbm);
  for (double p : interferer_powers_dbm) denom_mw += dbm_to_mw(p);
  return mw_to_dbm(dbm_to_mw(p_signal_dbm)) - mw_to_dbm(denom_mw);
}

struct BlockageModel {
  bool enabled = false;
  double mean_blocked_s = 0.1;
  double mean_clear_s = 2.0;
  double attenuation_db = 30.0;
};

struct RadioConfig {
  AntennaPattern pattern;
  McsTable mcs = default_mcs_table();
  NoiseModel noise;
  double freq_mmw_hz = 60.48e9;
  double freq_wifi_hz = 5.18e9;
  double rx_gain_dbi = 0.0;  // quasi-omni receive reference
  double ue_tx_power_mmw_dbm = 10.0;  // cap; responses are power controlled
  bool ue_power_control = true;
  double ue_power_margin_db = 10.0;  // target above the control threshold

  bool shadowing = true;
  double shadowing_sigma_db = 2.0;
  double shadowing_corr_m = 1.0;  // grid pitch of the smooth field
  std::uint64_t shadow_seed = 1;

  bool measurement_noise = true;      // online Wi-Fi readings only
  double measurement_sigma_db = 1.0;

  BlockageModel blockage;

  // Energy-detect carrier sense levels.
  double cs_threshold_dbm_60 = -68.0;  // preamble-detection level
  double cs_threshold_dbm_5 = -82.0;

  void validate() const {
    pattern.validate();
    mcs.validate();
    noise.validate();
    if (!(freq_mmw_hz > 0.0) || !(freq_wifi_hz > 0.0))
      throw ConfigError("carrier frequencies must be positive");
  }
};

// Transmit-beamformed 60 GHz received power at a quasi-omni receiver.
inline double rx_power_mmw(const ApNode& ap, int sector_id,
                           const Point3& target, const AntennaPattern& pattern,
                           double freq_hz = 60.48e9, double rx_gain_dbi = 0.0) {
  const double off = angle_offset(ap, sector_id, target);
  return ap.tx_power_mmw_dbm + antenna_gain(pattern, off) + rx_gain_dbi -
         path_loss_db(distance(ap.position, target), freq_hz);
}

// Omni 60 GHz link (UE-side transmissions).
inline double rx_power_omni(double tx_power_dbm, const Point3& a,
                            const Point3& b, double freq_hz,
                            double rx_gain_dbi = 0.0) {
  return tx_power_dbm + rx_gain_dbi - path_loss_db(distance(a, b), freq_hz);
}

// Deterministic log-normal shadowing: a hash-seeded normal field on a
// coarse grid, interpolated bilinearly so nearby positions see correlated
// values. Offline and online readings at the same position agree exactly.
inline double shadowing_db(const RadioConfig& rc, const Point3& target,
                           int ap_id) {
  if (!rc.shadowing || rc.shadowing_sigma_db <= 0.0) return 0.0;
  const double cell = rc.shadowing_corr_m > 0.0 ? rc.shadowing_corr_m : 1.0;
  const double fx = target.x / cell;
  const double fy = target.y / cell;
  const long long x0 = static_cast<long long>(std::floor(fx));
  const long long y0 = static_cast<long long>(std::floor(fy));
  const double wx = fx - x0;
  const double wy = fy - y0;
  const std::uint64_t zq = static_cast<std::uint64_t>(
      static_cast<std::int64_t>(std::llround(target.z * 1000.0)));
  const auto node = [&](long long gx, long long gy) {
    std::uint64_t key = rc.shadow_seed;
    key = hash_combine(key, static_cast<std::uint64_t>(gx));
    key = hash_combine(key, static_cast<std::uint64_t>(gy));
    key = hash_combine(key, zq);
    key = hash_combine(key, static_cast<std::uint64_t>(ap_id));
    return hashed_normal(key);
  };
  const double w00 = (1 - wx) * (1 - wy);
  const double w10 = wx * (1 - wy);
  const double w01 = (1 - wx) * wy;
  const double w11 = wx * wy;
  const double v = w00 * node(x0, y0) + w10 * node(x0 + 1, y0) +
                   w01 * node(x0, y0 + 1) + w11 * node(x0 + 1, y0 + 1);
  // normalize to keep the marginal deviation at sigma everywhere
  const double norm =
      std::sqrt(w00 * w00 + w10 * w10 + w01 * w01 + w11 * w11);
  return rc.shadowing_sigma_db * v / norm;
}

// Mean (noiseless) Wi-Fi RSS; omni antennas on both ends.
inline double wifi_rss_dbm(const ApNode& ap, const Point3& target,
                           const RadioConfig& rc) {
  if (distance(ap.position, target) <= 0.0)
    throw GeometryError("target coincides with AP position");
  return ap.tx_power_wifi_dbm - path_loss_db(distance(ap.position, target),
                                             rc.freq_wifi_hz) +
         shadowing_db(rc, target, ap.id);
}

}  // namespace mmwsim
