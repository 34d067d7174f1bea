#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmwsim/event_queue.hpp"
#include "mmwsim/frames.hpp"
#include "mmwsim/medium.hpp"
#include "mmwsim/metrics.hpp"
#include "mmwsim/scenario.hpp"
#include "mmwsim/traffic.hpp"

namespace mmwsim {

struct NavWindow {
  int ap = -1;
  double start = 0.0;
  double end = 0.0;
};

struct RunResult {
  MetricsRecord metrics;
  Trace trace{false};
  std::vector<NavWindow> nav_windows;  // dual-band BF reservation windows
  std::map<std::string, long long> counters;  // engine diagnostics
};

// In-service packet token; queued packets are just arrival timestamps.
struct Packet {
  long long id = 0;
  int ue_id = -1;
  long long size_bits = 0;
  double arrival_time = 0.0;
  int retx_count = 0;
};

// State and helpers shared by the three protocol engines.
class EngineBase {
 public:
  EngineBase(const Scenario& sc, Protocol protocol)
      : sc_(sc),
        pt_(PowerTables::build(sc.env, sc.radio)),
        noise_mw_(dbm_to_mw(noise_power_dbm(sc.radio.noise))),
        m60_(&pt_, noise_mw_, dbm_to_mw(sc.radio.cs_threshold_dbm_60)),
        trace_(sc.trace_enabled) {
    sc_.env.validate();
    sc_.radio.validate();
    sc_.mac.validate();
    sc_.traffic.validate();
    metrics_.protocol = to_string(protocol);
    metrics_.horizon_s = sc.horizon_s;
    for (int u = 0; u < sc_.env.num_ues(); ++u)
      sources_.emplace_back(sc_.traffic.offered_load_bps,
                            sc_.traffic.packet_bits,
                            sc_.mac.queue_limit_packets,
                            Rng(sc_.seed, "arrivals", u));
    if (sc_.radio.blockage.enabled) {
      blocked_.assign(
          static_cast<std::size_t>(sc_.env.num_aps()) * sc_.env.num_ues(), 0);
    }
  }

  virtual ~EngineBase() = default;

 protected:
  double noise_dbm() const { return mw_to_dbm(noise_mw_); }

  double data_duration(int mcs_index) const {
    const double rate_bps =
        sc_.radio.mcs.entry(mcs_index).phy_rate_mbps * 1e6;
    return sc_.mac.preamble() + sc_.traffic.packet_bits / rate_bps;
  }

  double min_snr_for(int mcs_index) const {
    return sc_.radio.mcs.entry(mcs_index).min_snr_db;
  }

  double control_snr() const { return sc_.radio.mcs.control_min_snr_db(); }

  void trace_frame(double start, FrameKind kind, Band band, NodeRef src,
                   NodeRef dst, int sector, double duration, Outcome out) {
    trace_.add(TraceRow{start, kind, band, src, dst, sector, duration, out});
  }

  // Tally a failed reception into the loss counters.
  // Closed-loop output scale for a UE response frame toward an AP that
  // listens with `rx_sector`; capped at the configured maximum power.
  double ue_response_scale(int ue, int ap, int rx_sector) const {
    if (!sc_.radio.ue_power_control) return 1.0;
    const double path =
        pt_.from_ue(ue, pt_.ap_node(ap)) *
        pt_.rx_fac(pt_.ap_node(ap), rx_sector, pt_.ue_node(ue));
    if (path <= 0.0) return 1.0;
    const double want_mw =
        dbm_to_mw(mw_to_dbm(noise_mw_) + sc_.radio.mcs.control_min_snr_db() +
                  sc_.radio.ue_power_margin_db);
    return std::min(1.0, want_mw / path);
  }

  void count_loss(const Medium60::RxOutcome& out, bool is_data) {
    if (out.outcome == Outcome::Collision) {
      ++metrics_.collision_count;
      if (is_data) ++metrics_.data_interference_losses;
    } else if (out.outcome == Outcome::Blocked) {
      ++metrics_.blocked_losses;
    }
  }

  void deliver(const Packet& pkt, double delivery_time) {
    ++metrics_.delivered;
    metrics_.delivered_bits += pkt.size_bits;
    metrics_.sum_delay_s += delivery_time - pkt.arrival_time;
  }

  void drop_retx(const Packet&) {
    ++metrics_.dropped_retx;
  }

  // Blockage helpers ---------------------------------------------------

  bool link_blocked(int ap, int ue) const {
    if (blocked_.empty()) return false;
    return blocked_[static_cast<std::size_t>(ap) * sc_.env.num_ues() + ue] !=
           0;
  }

  // Exponential on/off renewal process per (AP, UE) 60 GHz link.
  void start_blockage_processes() {
    if (!sc_.radio.blockage.enabled) return;
    for (int a = 0; a < sc_.env.num_aps(); ++a)
      for (int u = 0; u < sc_.env.num_ues(); ++u) {
        auto rng = std::make_shared<Rng>(
            sc_.seed, "blockage",
            static_cast<std::uint64_t>(a) * 4096 + u);
        schedule_blockage_toggle(a, u, rng);
      }
  }

  void finalize_metrics() {
    for (auto& src : sources_) src.sync(sc_.horizon_s);
    metrics_.generated = 0;
    metrics_.in_flight = in_service_count_;
    for (auto& src : sources_) {
      metrics_.generated += src.generated();
      metrics_.dropped_overflow += src.dropped_overflow();
      metrics_.in_flight += src.queue_len();
    }
    metrics_.dropped = metrics_.dropped_overflow + metrics_.dropped_retx;
    metrics_.check_conservation();
  }

  const Scenario sc_;
  PowerTables pt_;
  double noise_mw_;
  Medium60 m60_;
  Trace trace_;
  EventQueue q_;
  MetricsRecord metrics_;
  std::vector<PoissonSource> sources_;
  long long next_packet_id_ = 1;
  long long in_service_count_ = 0;  // packets held by a transmitter

 private:
  void schedule_blockage_toggle(int a, int u, std::shared_ptr<Rng> rng) {
    const auto& bl = sc_.radio.blockage;
    const std::size_t at =
        static_cast<std::size_t>(a) * sc_.env.num_ues() + u;
    const bool now_blocked = blocked_[at] != 0;
    const double dwell =
        rng->exponential(now_blocked ? bl.mean_blocked_s : bl.mean_clear_s);
    q_.schedule_in(dwell, EventKind::BlockageToggle, [this, a, u, rng] {
      const std::size_t idx =
          static_cast<std::size_t>(a) * sc_.env.num_ues() + u;
      blocked_[idx] = blocked_[idx] ? 0 : 1;
      if (blocked_[idx]) {
        m60_.mark_blocked(pt_.ap_node(a), pt_.ue_node(u));
        m60_.mark_blocked(pt_.ue_node(u), pt_.ap_node(a));
      }
      schedule_blockage_toggle(a, u, rng);
    });
  }

  std::vector<char> blocked_;
};

}  // namespace mmwsim
