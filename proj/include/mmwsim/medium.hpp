#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "mmwsim/errors.hpp"
#include "mmwsim/frames.hpp"
#include "mmwsim/geometry.hpp"
#include "mmwsim/radio.hpp"

namespace mmwsim {

// Static link budget tables in linear milliwatts. Node indices run over APs
// first, then UEs.
struct PowerTables {
  int num_aps = 0;
  int num_ues = 0;
  int max_sectors = 0;
  std::vector<double> ap_tx_mw;  // [ap][sector-1][node]
  std::vector<double> ue_tx_mw;  // [ue][node]

  int nodes() const { return num_aps + num_ues; }
  int ap_node(int ap) const { return ap; }
  int ue_node(int ue) const { return num_aps + ue; }
  bool is_ap_node(int node) const { return node < num_aps; }

  double from_ap(int ap, int sector, int node) const {
    return ap_tx_mw[(static_cast<std::size_t>(ap) * max_sectors +
                     (sector - 1)) *
                        nodes() +
                    node];
  }
  double from_ue(int ue, int node) const {
    return ue_tx_mw[static_cast<std::size_t>(ue) * nodes() + node];
  }

  // Power seen at `node` when `src_node` transmits (sector applies to APs).
  double from_node(int src_node, int sector, int node) const {
    if (src_node == node) return 0.0;
    return is_ap_node(src_node) ? from_ap(src_node, sector, node)
                                : from_ue(src_node - num_aps, node);
  }

  // Linear receive-gain factor of an AP listening with a trained sector
  // toward `src_node`; 1.0 is the quasi-omni reference.
  double rx_fac(int rx_node, int rx_sector, int src_node) const {
    if (rx_sector < 0 || !is_ap_node(rx_node)) return 1.0;
    return rx_gain_fac[(static_cast<std::size_t>(rx_node) * max_sectors +
                        (rx_sector - 1)) *
                           nodes() +
                       src_node];
  }

  std::vector<double> rx_gain_fac;  // [ap][sector-1][node], linear

  static PowerTables build(const Environment& env, const RadioConfig& rc) {
    PowerTables pt;
    pt.num_aps = env.num_aps();
    pt.num_ues = env.num_ues();
    for (const auto& ap : env.aps)
      pt.max_sectors = std::max(pt.max_sectors, ap.num_sectors);
    const int nodes = pt.nodes();
    pt.ap_tx_mw.assign(
        static_cast<std::size_t>(pt.num_aps) * pt.max_sectors * nodes, 0.0);
    pt.ue_tx_mw.assign(static_cast<std::size_t>(pt.num_ues) * nodes, 0.0);
    pt.rx_gain_fac.assign(
        static_cast<std::size_t>(pt.num_aps) * pt.max_sectors * nodes, 1.0);

    const auto node_pos = [&](int node) -> const Point3& {
      return node < pt.num_aps ? env.aps[node].position
                               : env.ues[node - pt.num_aps];
    };
    for (int a = 0; a < pt.num_aps; ++a) {
      const auto& ap = env.aps[a];
      for (int d = 1; d <= ap.num_sectors; ++d) {
        for (int node = 0; node < nodes; ++node) {
          if (node == a) continue;
          const double dbm = rx_power_mmw(ap, d, node_pos(node), rc.pattern,
                                          rc.freq_mmw_hz, rc.rx_gain_dbi);
          const std::size_t at =
              (static_cast<std::size_t>(a) * pt.max_sectors + (d - 1)) *
                  nodes +
              node;
          pt.ap_tx_mw[at] = dbm_to_mw(dbm);
          pt.rx_gain_fac[at] = dbm_to_mw(
              antenna_gain(rc.pattern, angle_offset(ap, d, node_pos(node))));
        }
      }
    }
    for (int u = 0; u < pt.num_ues; ++u) {
      for (int node = 0; node < nodes; ++node) {
        if (node == pt.ue_node(u)) continue;
        const double dbm =
            rx_power_omni(rc.ue_tx_power_mmw_dbm, env.ues[u], node_pos(node),
                          rc.freq_mmw_hz, rc.rx_gain_dbi);
        pt.ue_tx_mw[static_cast<std::size_t>(u) * nodes + node] =
            dbm_to_mw(dbm);
      }
    }
    return pt;
  }
};

// 60 GHz channel state: active beamformed transmissions, reception outcomes
// with piecewise-worst SINR over the frame, and energy-detect carrier sense.
class Medium60 {
 public:
  struct RxOutcome {
    bool success = false;
    Outcome outcome = Outcome::Ok;
    double worst_sinr_db = 0.0;
    double end_sinr_db = 0.0;  // trailing sub-interval; link-quality estimate
    double signal_dbm = kNegInfDb;
    bool interference_decisive = false;  // would have passed without it
  };

  Medium60(const PowerTables* pt, double noise_mw, double cs_threshold_mw)
      : pt_(pt), noise_mw_(noise_mw), cs_threshold_mw_(cs_threshold_mw) {}

  // `tx_scale`: linear output-power factor relative to the table reference
  // (uplink power control on response frames).
  long long begin_tx(double now, double end, int src_node, int sector,
                     double tx_scale = 1.0) {
    const long long id = next_id_++;
    active_.emplace(id, Tx{src_node, sector, now, end, tx_scale});
    // fold this transmission into every reception already in flight
    for (auto& [key, rx] : rx_) {
      if (key.first == id || rx.tx_src == src_node) continue;
      const double t0 = std::max(now, rx.start);
      const double t1 = std::min(end, rx.end);
      if (t0 < t1)
        rx.interf.push_back(
            {t0, t1,
             tx_scale * pt_->from_node(src_node, sector, rx.node) *
                 pt_->rx_fac(rx.node, rx.rx_sector, src_node)});
    }
    notify();
    return id;
  }

  void end_tx(long long id) {
    active_.erase(id);
    notify();
  }

  // `rx_sector`: trained receive sector for response frames at an AP, or -1
  // for the quasi-omni pattern used during training and measurement.
  void begin_rx(long long tx_id, int rx_node, double min_sinr_db,
                bool blocked_now, int rx_sector = -1) {
    const auto it = active_.find(tx_id);
    if (it == active_.end()) throw SimFault("begin_rx on unknown tx");
    const Tx& tx = it->second;
    Rx rx;
    rx.node = rx_node;
    rx.rx_sector = rx_sector;
    rx.tx_src = tx.src_node;
    rx.start = tx.start;
    rx.end = tx.end;
    rx.min_sinr_db = min_sinr_db;
    rx.blocked = blocked_now;
    rx.signal_mw = tx.scale * pt_->from_node(tx.src_node, tx.sector, rx_node) *
                   pt_->rx_fac(rx_node, rx_sector, tx.src_node);
    for (const auto& [oid, other] : active_) {
      if (oid == tx_id || other.src_node == rx_node) continue;
      const double t0 = std::max(other.start, rx.start);
      const double t1 = std::min(other.end, rx.end);
      if (t0 < t1)
        rx.interf.push_back(
            {t0, t1,
             other.scale * pt_->from_node(other.src_node, other.sector, rx_node) *
                 pt_->rx_fac(rx_node, rx_sector, other.src_node)});
    }
    rx_.emplace(std::make_pair(tx_id, rx_node), std::move(rx));
  }

  // Blockage toggled on the (src, dst) link while a frame is in flight.
  void mark_blocked(int src_node, int rx_node) {
    for (auto& [key, rx] : rx_)
      if (rx.tx_src == src_node && rx.node == rx_node) rx.blocked = true;
  }

  RxOutcome end_rx(long long tx_id, int rx_node) {
    const auto it = rx_.find(std::make_pair(tx_id, rx_node));
    if (it == rx_.end()) throw SimFault("end_rx without begin_rx");
    const Rx rx = std::move(it->second);
    rx_.erase(it);

    RxOutcome out;
    out.signal_dbm = mw_to_dbm(rx.signal_mw);

    // worst-interval SINR across interference boundaries
    std::vector<double> cuts = {rx.start};
    for (const auto& seg : rx.interf) {
      cuts.push_back(seg[0]);
      cuts.push_back(seg[1]);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double worst = std::numeric_limits<double>::infinity();
    double last = 0.0;
    for (double t : cuts) {
      if (t >= rx.end) continue;
      double denom = noise_mw_;
      for (const auto& seg : rx.interf)
        if (seg[0] <= t && t < seg[1]) denom += seg[2];
      last = mw_to_dbm(rx.signal_mw) - mw_to_dbm(denom);
      worst = std::min(worst, last);
    }
    out.worst_sinr_db = worst;
    out.end_sinr_db = last;

    const double snr = mw_to_dbm(rx.signal_mw) - mw_to_dbm(noise_mw_);
    if (rx.blocked) {
      out.outcome = Outcome::Blocked;
    } else if (worst >= rx.min_sinr_db) {
      out.success = true;
      out.outcome = Outcome::Ok;
    } else if (snr >= rx.min_sinr_db) {
      out.outcome = Outcome::Collision;
      out.interference_decisive = true;
    } else {
      out.outcome = Outcome::Lost;
    }
    return out;
  }

  // Energy detect at a node, excluding its own transmissions.
  bool cs_busy(int node) const {
    double sum = 0.0;
    for (const auto& [id, tx] : active_) {
      if (tx.src_node == node) continue;
      sum += tx.scale * pt_->from_node(tx.src_node, tx.sector, node);
      if (sum >= cs_threshold_mw_) return true;
    }
    return false;
  }

  // Start time of the earliest audible transmission at a node, or +inf when
  // the medium is clear; drives the clear-channel-assessment lag.
  double busy_since(int node) const {
    double since = std::numeric_limits<double>::infinity();
    for (const auto& [id, tx] : active_) {
      if (tx.src_node == node) continue;
      if (tx.scale * pt_->from_node(tx.src_node, tx.sector, node) >=
          cs_threshold_mw_)
        since = std::min(since, tx.start);
    }
    return since;
  }

  bool idle() const { return active_.empty(); }

  void add_listener(std::function<void()> fn) {
    listeners_.push_back(std::move(fn));
  }

 private:
  struct Tx {
    int src_node;
    int sector;
    double start, end;
    double scale = 1.0;
  };
  struct Rx {
    int node = -1;
    int rx_sector = -1;
    int tx_src = -1;
    double start = 0, end = 0;
    double signal_mw = 0;
    double min_sinr_db = 0;
    bool blocked = false;
    std::vector<std::array<double, 3>> interf;  // [t0, t1, power_mw]
  };

  void notify() {
    for (const auto& fn : listeners_) fn();
  }

  const PowerTables* pt_;
  double noise_mw_;
  double cs_threshold_mw_;
  long long next_id_ = 1;
  std::map<long long, Tx> active_;
  std::map<std::pair<long long, int>, Rx> rx_;
  std::vector<std::function<void()>> listeners_;
};

// 5 GHz control channel: one collision domain, any temporal overlap corrupts
// every overlapping frame.
class Medium5 {
 public:
  long long begin_tx(double now, double end, int src_node) {
    const long long id = next_id_++;
    if (!active_.empty()) {
      corrupted_.insert(id);
      for (const auto& [oid, tx] : active_) corrupted_.insert(oid);
    }
    active_.emplace(id, TxInfo{src_node, now, end});
    busy_until_ = std::max(busy_until_, end);
    notify();
    return id;
  }

  // Returns true when the frame survived.
  bool end_tx(long long id) {
    active_.erase(id);
    const bool ok = corrupted_.find(id) == corrupted_.end();
    corrupted_.erase(id);
    notify();
    return ok;
  }

  bool busy() const { return !active_.empty(); }
  double busy_until() const { return busy_until_; }

  void add_listener(std::function<void()> fn) {
    listeners_.push_back(std::move(fn));
  }

 private:
  struct TxInfo {
    int src_node;
    double start, end;
  };
  void notify() {
    for (const auto& fn : listeners_) fn();
  }

  long long next_id_ = 1;
  std::map<long long, TxInfo> active_;
  std::set<long long> corrupted_;
  double busy_until_ = 0.0;
  std::vector<std::function<void()>> listeners_;
};

}  // namespace mmwsim
