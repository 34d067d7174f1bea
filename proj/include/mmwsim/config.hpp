#pragma once

#include <cctype>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mmwsim/errors.hpp"
#include "mmwsim/scenario.hpp"

namespace mmwsim {

struct EnvironmentConfig {
  double room_w = 12.0;
  double room_d = 6.0;
  double room_h = 3.0;
  int num_aps = 8;
  int num_ues = 24;
  int num_lps = 90;
  int num_sectors = 36;
  double ue_height = 1.0;
  double lp_height = 1.0;
  bool ues_at_lps = false;
  std::vector<Point3> ap_positions;  // optional; empty = auto layout
  std::vector<Point3> ue_positions;  // optional; empty = seeded uniform
  double tx_power_mmw_dbm = 10.0;
  double tx_power_wifi_dbm = 20.0;
};

struct RunSection {
  std::vector<Protocol> protocols = {Protocol::Baseline, Protocol::DualBand};
  std::vector<int> ap_counts = {2, 4, 6, 8};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  double horizon_s = 2.0;
  std::string out_dir = "out";
  bool trace = false;
};

struct RunConfig {
  EnvironmentConfig env;
  RadioConfig radio;
  LearningConfig learn;
  MacTimings mac;
  TrafficConfig traffic;
  RunSection run;

  void validate() const {
    radio.validate();
    mac.validate();
    traffic.validate();
    learn.validate();
    if (env.num_aps < 1 || env.num_ues < 1 || env.num_lps < 1)
      throw ConfigError("num_aps, num_ues and num_lps must be >= 1");
    if (env.num_sectors < 1) throw ConfigError("num_sectors must be >= 1");
    if (!env.ap_positions.empty() &&
        static_cast<int>(env.ap_positions.size()) != env.num_aps)
      throw ConfigError("ap_positions length must match num_aps");
    if (!env.ue_positions.empty() &&
        static_cast<int>(env.ue_positions.size()) != env.num_ues)
      throw ConfigError("ue_positions length must match num_ues");
    if (run.protocols.empty() || run.ap_counts.empty() || run.seeds.empty())
      throw ConfigError("run section needs protocols, ap_counts and seeds");
    if (!(run.horizon_s > 0.0)) throw ConfigError("horizon_s must be > 0");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

struct KeyCtx {
  std::string section, key;
  int line;
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                      "' in [" + section + "]: " + what);
  }
};

inline double as_double(const KeyCtx& ctx, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') ctx.fail("expected a number");
  return d;
}

inline long long as_int(const KeyCtx& ctx, const std::string& v) {
  char* end = nullptr;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') ctx.fail("expected an integer");
  return i;
}

inline bool as_bool(const KeyCtx& ctx, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  ctx.fail("expected true or false");
}

inline std::vector<Point3> as_points(const KeyCtx& ctx,
                                     const std::string& v) {
  std::vector<Point3> out;
  for (const auto& part : split(v, ';')) {
    if (part.empty()) continue;
    const auto nums = split(part, ',');
    if (nums.size() != 3) ctx.fail("positions need x,y,z triples");
    out.push_back({as_double(ctx, nums[0]), as_double(ctx, nums[1]),
                   as_double(ctx, nums[2])});
  }
  return out;
}

inline Protocol as_protocol(const KeyCtx& ctx, const std::string& v) {
  if (v == "baseline") return Protocol::Baseline;
  if (v == "rrh") return Protocol::CentralizedRrh;
  if (v == "dualband") return Protocol::DualBand;
  ctx.fail("unknown protocol '" + v + "' (baseline, rrh, dualband)");
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Line-oriented key = value with bracketed section headers. Unknown keys and
// sections are rejected with the key name and line number.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  bool mcs_overridden = false;

  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("line " + std::to_string(line) +
                          ": malformed section header");
      section = s.substr(1, s.size() - 2);
      if (section != "environment" && section != "radio" &&
          section != "mcs" && section != "learning" && section != "mac" &&
          section != "traffic" && section != "run")
        throw ConfigError("line " + std::to_string(line) +
                          ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) +
                        ": expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string val = detail::trim(s.substr(eq + 1));
    const detail::KeyCtx ctx{section, key, line};
    if (section.empty()) ctx.fail("key outside any section");

    auto d = [&] { return detail::as_double(ctx, val); };
    auto i = [&] { return detail::as_int(ctx, val); };
    auto b = [&] { return detail::as_bool(ctx, val); };

    if (section == "environment") {
      if (key == "room_w") cfg.env.room_w = d();
      else if (key == "room_d") cfg.env.room_d = d();
      else if (key == "room_h") cfg.env.room_h = d();
      else if (key == "num_aps") cfg.env.num_aps = static_cast<int>(i());
      else if (key == "num_ues") cfg.env.num_ues = static_cast<int>(i());
      else if (key == "num_lps") cfg.env.num_lps = static_cast<int>(i());
      else if (key == "num_sectors") cfg.env.num_sectors = static_cast<int>(i());
      else if (key == "ue_height") cfg.env.ue_height = d();
      else if (key == "lp_height") cfg.env.lp_height = d();
      else if (key == "ues_at_lps") cfg.env.ues_at_lps = b();
      else if (key == "ap_positions") cfg.env.ap_positions = detail::as_points(ctx, val);
      else if (key == "ue_positions") cfg.env.ue_positions = detail::as_points(ctx, val);
      else if (key == "tx_power_mmw_dbm") cfg.env.tx_power_mmw_dbm = d();
      else if (key == "tx_power_wifi_dbm") cfg.env.tx_power_wifi_dbm = d();
      else ctx.fail("unknown key");
    } else if (section == "radio") {
      if (key == "peak_gain_dbi") cfg.radio.pattern.peak_gain_dbi = d();
      else if (key == "hpbw_deg") cfg.radio.pattern.hpbw_rad = deg2rad(d());
      else if (key == "sidelobe_floor_dbi") cfg.radio.pattern.sidelobe_floor_dbi = d();
      else if (key == "freq_mmw_hz") cfg.radio.freq_mmw_hz = d();
      else if (key == "freq_wifi_hz") cfg.radio.freq_wifi_hz = d();
      else if (key == "rx_gain_dbi") cfg.radio.rx_gain_dbi = d();
      else if (key == "ue_tx_power_mmw_dbm") cfg.radio.ue_tx_power_mmw_dbm = d();
      else if (key == "ue_power_control") cfg.radio.ue_power_control = b();
      else if (key == "ue_power_margin_db") cfg.radio.ue_power_margin_db = d();
      else if (key == "noise_figure_db") cfg.radio.noise.noise_figure_db = d();
      else if (key == "bandwidth_hz") cfg.radio.noise.bandwidth_hz = d();
      else if (key == "shadowing") cfg.radio.shadowing = b();
      else if (key == "shadowing_sigma_db") cfg.radio.shadowing_sigma_db = d();
      else if (key == "shadow_seed") cfg.radio.shadow_seed = static_cast<std::uint64_t>(i());
      else if (key == "measurement_noise") cfg.radio.measurement_noise = b();
      else if (key == "measurement_sigma_db") cfg.radio.measurement_sigma_db = d();
      else if (key == "blockage") cfg.radio.blockage.enabled = b();
      else if (key == "blockage_mean_blocked_s") cfg.radio.blockage.mean_blocked_s = d();
      else if (key == "blockage_mean_clear_s") cfg.radio.blockage.mean_clear_s = d();
      else if (key == "blockage_attenuation_db") cfg.radio.blockage.attenuation_db = d();
      else if (key == "cs_threshold_dbm_60") cfg.radio.cs_threshold_dbm_60 = d();
      else if (key == "cs_threshold_dbm_5") cfg.radio.cs_threshold_dbm_5 = d();
      else ctx.fail("unknown key");
    } else if (section == "mcs") {
      if (key == "entries") {
        McsTable table;
        for (const auto& part : detail::split(val, ',')) {
          const auto f = detail::split(part, ':');
          if (f.size() != 3)
            ctx.fail("entries are index:rate_mbps:min_snr_db triples");
          table.entries.push_back(
              {static_cast<int>(detail::as_int(ctx, f[0])),
               detail::as_double(ctx, f[1]), detail::as_double(ctx, f[2])});
        }
        table.validate();
        cfg.radio.mcs = table;
        mcs_overridden = true;
      } else {
        ctx.fail("unknown key");
      }
    } else if (section == "learning") {
      if (key == "damping") cfg.learn.ap_params.damping = d();
      else if (key == "max_iter") cfg.learn.ap_params.max_iter = static_cast<int>(i());
      else if (key == "convergence_window") cfg.learn.ap_params.convergence_window = static_cast<int>(i());
      else if (key == "x_best_beams") cfg.learn.x_best_beams = static_cast<int>(i());
      else if (key == "ap_select_gate_sq_db") cfg.learn.ap_select_gate_sq_db = d();
      else if (key == "apc_map_guard") cfg.learn.apc_map_guard = b();
      else if (key == "interference_reserve_db") cfg.learn.interference_reserve_db = d();
      else ctx.fail("unknown key");
    } else if (section == "mac") {
      if (key == "sifs60_us") cfg.mac.sifs60_us = d();
      else if (key == "slot60_us") cfg.mac.slot60_us = d();
      else if (key == "sifs5_us") cfg.mac.sifs5_us = d();
      else if (key == "slot5_us") cfg.mac.slot5_us = d();
      else if (key == "cwmin") cfg.mac.cwmin = static_cast<int>(i());
      else if (key == "cwmax") cfg.mac.cwmax = static_cast<int>(i());
      else if (key == "ctrl60_us") cfg.mac.ctrl60_us = d();
      else if (key == "ctrl5_us") cfg.mac.ctrl5_us = d();
      else if (key == "preamble_us") cfg.mac.preamble_us = d();
      else if (key == "brp_slot_us") cfg.mac.brp_slot_us = d();
      else if (key == "sweep_gap_us") cfg.mac.sweep_gap_us = d();
      else if (key == "wire_latency_us") cfg.mac.wire_latency_us = d();
      else if (key == "beacon_interval_s") cfg.mac.beacon_interval_s = d();
      else if (key == "max_retx") {
        const long long v = i();
        if (v < 0) ctx.fail("must be >= 0");
        cfg.mac.max_retx = static_cast<int>(v);
      }
      else if (key == "abft_slots") cfg.mac.abft_slots = static_cast<int>(i());
      else if (key == "queue_limit_packets") cfg.mac.queue_limit_packets = static_cast<int>(i());
      else if (key == "service_quantum_ms") cfg.mac.service_quantum_ms = d();
      else if (key == "session_abort_failures") cfg.mac.session_abort_failures = static_cast<int>(i());
      else if (key == "assoc_min_snr_db") cfg.mac.assoc_min_snr_db = d();
      else if (key == "min_required_sinr_db") cfg.mac.min_required_sinr_db = d();
      else if (key == "min_serving_snr_db") cfg.mac.min_serving_snr_db = d();
      else if (key == "nav_margin_us") cfg.mac.nav_margin_us = d();
      else ctx.fail("unknown key");
    } else if (section == "traffic") {
      if (key == "offered_load_bps") cfg.traffic.offered_load_bps = d();
      else if (key == "packet_bits") cfg.traffic.packet_bits = i();
      else ctx.fail("unknown key");
    } else if (section == "run") {
      if (key == "protocols") {
        cfg.run.protocols.clear();
        for (const auto& p : detail::split(val, ','))
          cfg.run.protocols.push_back(detail::as_protocol(ctx, p));
      } else if (key == "ap_counts") {
        cfg.run.ap_counts.clear();
        for (const auto& p : detail::split(val, ','))
          cfg.run.ap_counts.push_back(
              static_cast<int>(detail::as_int(ctx, p)));
      } else if (key == "seeds") {
        cfg.run.seeds.clear();
        for (const auto& p : detail::split(val, ','))
          cfg.run.seeds.push_back(
              static_cast<std::uint64_t>(detail::as_int(ctx, p)));
      } else if (key == "horizon_s") {
        cfg.run.horizon_s = d();
      } else if (key == "out_dir") {
        cfg.run.out_dir = val;
      } else if (key == "trace") {
        cfg.run.trace = b();
      } else {
        ctx.fail("unknown key");
      }
    }
  }
  (void)mcs_overridden;
  cfg.validate();
  return cfg;
}

// Canonical rendering of the fully resolved configuration; parsing it back
// reproduces the same configuration.
inline std::string serialize_config(const RunConfig& cfg) {
  using detail::fmt;
  std::ostringstream o;
  o << "[environment]\n";
  o << "room_w = " << fmt(cfg.env.room_w) << '\n';
  o << "room_d = " << fmt(cfg.env.room_d) << '\n';
  o << "room_h = " << fmt(cfg.env.room_h) << '\n';
  o << "num_aps = " << cfg.env.num_aps << '\n';
  o << "num_ues = " << cfg.env.num_ues << '\n';
  o << "num_lps = " << cfg.env.num_lps << '\n';
  o << "num_sectors = " << cfg.env.num_sectors << '\n';
  o << "ue_height = " << fmt(cfg.env.ue_height) << '\n';
  o << "lp_height = " << fmt(cfg.env.lp_height) << '\n';
  o << "ues_at_lps = " << (cfg.env.ues_at_lps ? "true" : "false") << '\n';
  auto points = [&](const std::vector<Point3>& ps) {
    std::string s;
    for (std::size_t k = 0; k < ps.size(); ++k) {
      if (k) s += "; ";
      s += fmt(ps[k].x) + "," + fmt(ps[k].y) + "," + fmt(ps[k].z);
    }
    return s;
  };
  if (!cfg.env.ap_positions.empty())
    o << "ap_positions = " << points(cfg.env.ap_positions) << '\n';
  if (!cfg.env.ue_positions.empty())
    o << "ue_positions = " << points(cfg.env.ue_positions) << '\n';
  o << "tx_power_mmw_dbm = " << fmt(cfg.env.tx_power_mmw_dbm) << '\n';
  o << "tx_power_wifi_dbm = " << fmt(cfg.env.tx_power_wifi_dbm) << '\n';

  o << "\n[radio]\n";
  o << "peak_gain_dbi = " << fmt(cfg.radio.pattern.peak_gain_dbi) << '\n';
  o << "hpbw_deg = " << fmt(rad2deg(cfg.radio.pattern.hpbw_rad)) << '\n';
  o << "sidelobe_floor_dbi = " << fmt(cfg.radio.pattern.sidelobe_floor_dbi)
    << '\n';
  o << "freq_mmw_hz = " << fmt(cfg.radio.freq_mmw_hz) << '\n';
  o << "freq_wifi_hz = " << fmt(cfg.radio.freq_wifi_hz) << '\n';
  o << "rx_gain_dbi = " << fmt(cfg.radio.rx_gain_dbi) << '\n';
  o << "ue_tx_power_mmw_dbm = " << fmt(cfg.radio.ue_tx_power_mmw_dbm) << '\n';
  o << "ue_power_control = "
    << (cfg.radio.ue_power_control ? "true" : "false") << '\n';
  o << "ue_power_margin_db = " << fmt(cfg.radio.ue_power_margin_db) << '\n';
  o << "noise_figure_db = " << fmt(cfg.radio.noise.noise_figure_db) << '\n';
  o << "bandwidth_hz = " << fmt(cfg.radio.noise.bandwidth_hz) << '\n';
  o << "shadowing = " << (cfg.radio.shadowing ? "true" : "false") << '\n';
  o << "shadowing_sigma_db = " << fmt(cfg.radio.shadowing_sigma_db) << '\n';
  o << "shadow_seed = " << cfg.radio.shadow_seed << '\n';
  o << "measurement_noise = "
    << (cfg.radio.measurement_noise ? "true" : "false") << '\n';
  o << "measurement_sigma_db = " << fmt(cfg.radio.measurement_sigma_db)
    << '\n';
  o << "blockage = " << (cfg.radio.blockage.enabled ? "true" : "false")
    << '\n';
  o << "blockage_mean_blocked_s = " << fmt(cfg.radio.blockage.mean_blocked_s)
    << '\n';
  o << "blockage_mean_clear_s = " << fmt(cfg.radio.blockage.mean_clear_s)
    << '\n';
  o << "blockage_attenuation_db = " << fmt(cfg.radio.blockage.attenuation_db)
    << '\n';
  o << "cs_threshold_dbm_60 = " << fmt(cfg.radio.cs_threshold_dbm_60) << '\n';
  o << "cs_threshold_dbm_5 = " << fmt(cfg.radio.cs_threshold_dbm_5) << '\n';

  o << "\n[mcs]\n";
  o << "entries = ";
  for (std::size_t k = 0; k < cfg.radio.mcs.entries.size(); ++k) {
    const auto& e = cfg.radio.mcs.entries[k];
    if (k) o << ", ";
    o << e.index << ':' << fmt(e.phy_rate_mbps) << ':' << fmt(e.min_snr_db);
  }
  o << '\n';

  o << "\n[learning]\n";
  o << "damping = " << fmt(cfg.learn.ap_params.damping) << '\n';
  o << "max_iter = " << cfg.learn.ap_params.max_iter << '\n';
  o << "convergence_window = " << cfg.learn.ap_params.convergence_window
    << '\n';
  o << "x_best_beams = " << cfg.learn.x_best_beams << '\n';
  o << "ap_select_gate_sq_db = " << fmt(cfg.learn.ap_select_gate_sq_db)
    << '\n';
  o << "apc_map_guard = " << (cfg.learn.apc_map_guard ? "true" : "false")
    << '\n';
  o << "interference_reserve_db = " << fmt(cfg.learn.interference_reserve_db)
    << '\n';

  o << "\n[mac]\n";
  o << "sifs60_us = " << fmt(cfg.mac.sifs60_us) << '\n';
  o << "slot60_us = " << fmt(cfg.mac.slot60_us) << '\n';
  o << "sifs5_us = " << fmt(cfg.mac.sifs5_us) << '\n';
  o << "slot5_us = " << fmt(cfg.mac.slot5_us) << '\n';
  o << "cwmin = " << cfg.mac.cwmin << '\n';
  o << "cwmax = " << cfg.mac.cwmax << '\n';
  o << "ctrl60_us = " << fmt(cfg.mac.ctrl60_us) << '\n';
  o << "ctrl5_us = " << fmt(cfg.mac.ctrl5_us) << '\n';
  o << "preamble_us = " << fmt(cfg.mac.preamble_us) << '\n';
  o << "brp_slot_us = " << fmt(cfg.mac.brp_slot_us) << '\n';
  o << "sweep_gap_us = " << fmt(cfg.mac.sweep_gap_us) << '\n';
  o << "wire_latency_us = " << fmt(cfg.mac.wire_latency_us) << '\n';
  o << "beacon_interval_s = " << fmt(cfg.mac.beacon_interval_s) << '\n';
  o << "max_retx = " << cfg.mac.max_retx << '\n';
  o << "abft_slots = " << cfg.mac.abft_slots << '\n';
  o << "queue_limit_packets = " << cfg.mac.queue_limit_packets << '\n';
  o << "service_quantum_ms = " << fmt(cfg.mac.service_quantum_ms) << '\n';
  o << "session_abort_failures = " << cfg.mac.session_abort_failures << '\n';
  o << "assoc_min_snr_db = " << fmt(cfg.mac.assoc_min_snr_db) << '\n';
  o << "min_required_sinr_db = " << fmt(cfg.mac.min_required_sinr_db) << '\n';
  o << "min_serving_snr_db = " << fmt(cfg.mac.min_serving_snr_db) << '\n';
  o << "nav_margin_us = " << fmt(cfg.mac.nav_margin_us) << '\n';

  o << "\n[traffic]\n";
  o << "offered_load_bps = " << fmt(cfg.traffic.offered_load_bps) << '\n';
  o << "packet_bits = " << cfg.traffic.packet_bits << '\n';

  o << "\n[run]\n";
  o << "protocols = ";
  for (std::size_t k = 0; k < cfg.run.protocols.size(); ++k)
    o << (k ? ", " : "") << to_string(cfg.run.protocols[k]);
  o << '\n';
  o << "ap_counts = ";
  for (std::size_t k = 0; k < cfg.run.ap_counts.size(); ++k)
    o << (k ? ", " : "") << cfg.run.ap_counts[k];
  o << '\n';
  o << "seeds = ";
  for (std::size_t k = 0; k < cfg.run.seeds.size(); ++k)
    o << (k ? ", " : "") << cfg.run.seeds[k];
  o << '\n';
  o << "horizon_s = " << fmt(cfg.run.horizon_s) << '\n';
  o << "out_dir = " << cfg.run.out_dir << '\n';
  o << "trace = " << (cfg.run.trace ? "true" : "false") << '\n';
  return o.str();
}

// Scenario assembly for one sweep point.
inline Scenario build_scenario(const RunConfig& cfg, int ap_count,
                               std::uint64_t seed, Protocol protocol) {
  Scenario sc;
  sc.radio = cfg.radio;
  sc.mac = cfg.mac;
  sc.traffic = cfg.traffic;
  sc.learn = cfg.learn;
  sc.seed = seed;
  sc.horizon_s = cfg.run.horizon_s;
  sc.trace_enabled = cfg.run.trace;

  Environment env;
  env.room = {cfg.env.room_w, cfg.env.room_d, cfg.env.room_h};
  std::vector<Point3> ap_pos;
  if (!cfg.env.ap_positions.empty()) {
    if (static_cast<int>(cfg.env.ap_positions.size()) != ap_count)
      throw ConfigError("ap_positions given for " +
                        std::to_string(cfg.env.ap_positions.size()) +
                        " APs but this run uses " + std::to_string(ap_count));
    ap_pos = cfg.env.ap_positions;
  } else {
    ap_pos = auto_ap_layout(env.room, ap_count);
  }
  for (int a = 0; a < ap_count; ++a) {
    ApNode ap;
    ap.id = a;
    ap.position = ap_pos[a];
    ap.num_sectors = cfg.env.num_sectors;
    ap.boresights = default_sector_layout(cfg.env.num_sectors);
    ap.tx_power_mmw_dbm = cfg.env.tx_power_mmw_dbm;
    ap.tx_power_wifi_dbm = cfg.env.tx_power_wifi_dbm;
    env.aps.push_back(ap);
  }
  env.learning_points =
      generate_lp_grid(env.room, cfg.env.num_lps, cfg.env.lp_height);

  if (!cfg.env.ue_positions.empty()) {
    env.ues = cfg.env.ue_positions;
  } else if (cfg.env.ues_at_lps) {
    for (int u = 0; u < cfg.env.num_ues; ++u) {
      const int l = static_cast<int>(
          static_cast<long long>(u) * cfg.env.num_lps / cfg.env.num_ues);
      env.ues.push_back(env.learning_points[l]);
    }
  } else {
    Rng rng(seed, "placement");
    const double margin = 0.2;
    for (int u = 0; u < cfg.env.num_ues; ++u)
      env.ues.push_back({rng.uniform(margin, env.room.w - margin),
                         rng.uniform(margin, env.room.d - margin),
                         cfg.env.ue_height});
  }
  env.validate();
  sc.env = std::move(env);
  (void)protocol;
  return sc;
}

}  // namespace mmwsim
