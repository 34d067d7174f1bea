#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmwsim/coordination.hpp"
#include "mmwsim/errors.hpp"
#include "mmwsim/geometry.hpp"
#include "mmwsim/learning.hpp"
#include "mmwsim/medium.hpp"
#include "mmwsim/radio.hpp"
#include "mmwsim/rng.hpp"

namespace mmwsim {

// MAC timing constants; microseconds in the config, converted once here.
struct MacTimings {
  double sifs60_us = 3.0;
  double slot60_us = 5.0;
  double sifs5_us = 16.0;
  double slot5_us = 9.0;
  int cwmin = 16;
  int cwmax = 1024;
  double ctrl60_us = 15.0;
  double ctrl5_us = 40.0;
  double preamble_us = 2.0;
  double brp_slot_us = 10.0;
  double sweep_gap_us = 1.0;
  double wire_latency_us = 1.0;
  double beacon_interval_s = 1.0;
  int max_retx = 10;
  int abft_slots = 8;
  int queue_limit_packets = 1000;
  double service_quantum_ms = 10.0;
  int session_abort_failures = 4;
  double assoc_min_snr_db = 1.0;        // association floor over noise
  double min_required_sinr_db = 10.0;   // concurrent-combination floor
  double min_serving_snr_db = 9.0;      // admission floor after refinement
  double nav_margin_us = 10.0;

  double sifs60() const { return sifs60_us * 1e-6; }
  double slot60() const { return slot60_us * 1e-6; }
  double sifs5() const { return sifs5_us * 1e-6; }
  double slot5() const { return slot5_us * 1e-6; }
  double difs60() const { return sifs60() + 2 * slot60(); }
  double difs5() const { return sifs5() + 2 * slot5(); }
  double ctrl60() const { return ctrl60_us * 1e-6; }
  double ctrl5() const { return ctrl5_us * 1e-6; }
  double preamble() const { return preamble_us * 1e-6; }
  double brp_slot() const { return brp_slot_us * 1e-6; }
  double sweep_gap() const { return sweep_gap_us * 1e-6; }
  double wire_latency() const { return wire_latency_us * 1e-6; }
  double quantum() const { return service_quantum_ms * 1e-3; }

  void validate() const {
    if (max_retx < 0) throw ConfigError("max_retx must be >= 0");
    if (cwmin < 1 || cwmax < cwmin)
      throw ConfigError("contention window bounds out of order");
    if (queue_limit_packets < 1)
      throw ConfigError("queue_limit_packets must be >= 1");
    if (beacon_interval_s <= 0.0)
      throw ConfigError("beacon_interval_s must be positive");
  }
};

struct TrafficConfig {
  double offered_load_bps = 1e9;  // per UE
  long long packet_bits = 12000;  // 1500 octets

  void validate() const {
    if (!(offered_load_bps > 0.0))
      throw ConfigError("offered_load_bps must be positive");
    if (packet_bits < 1) throw ConfigError("packet_bits must be >= 1");
  }
};

struct LearningConfig {
  AffinityPropagationParams ap_params;
  int x_best_beams = 6;
  double ap_select_gate_sq_db = 100.0;
  // Controller-side protection built on the full per-sector offline power
  // map: veto entering beams that would degrade an active link at its
  // matched location and cap the entering rate by the predicted SINR.
  bool apc_map_guard = true;
  double interference_reserve_db = 10.0;  // rate backoff kept for entrants

  void validate() const {
    if (x_best_beams < 1) throw ConfigError("x_best_beams must be >= 1");
  }
};

enum class Protocol { Baseline, CentralizedRrh, DualBand };

inline const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::Baseline: return "baseline";
    case Protocol::CentralizedRrh: return "rrh";
    case Protocol::DualBand: return "dualband";
  }
  return "?";
}

// Everything one protocol run needs; built by the sweep driver or directly
// by tests.
struct Scenario {
  Environment env;
  RadioConfig radio;
  MacTimings mac;
  TrafficConfig traffic;
  LearningConfig learn;
  std::uint64_t seed = 1;
  double horizon_s = 2.0;
  bool trace_enabled = false;
  bool use_fixed_phases = false;  // pin baseline beacon phases (tests)
  std::vector<double> fixed_phases;

  double noise_dbm() const { return noise_power_dbm(radio.noise); }
};

// Online Wi-Fi reading at an arbitrary position: the offline map value plus
// optional per-reading measurement noise.
inline std::vector<double> measure_fingerprint(const Environment& env,
                                               const RadioConfig& rc,
                                               const Point3& pos, Rng* noise) {
  std::vector<double> rss(env.aps.size());
  for (std::size_t n = 0; n < env.aps.size(); ++n) {
    rss[n] = wifi_rss_dbm(env.aps[n], pos, rc);
    if (rc.measurement_noise && noise)
      rss[n] += noise->normal(0.0, rc.measurement_sigma_db);
  }
  return rss;
}

}  // namespace mmwsim
