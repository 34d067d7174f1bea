#pragma once

#include <algorithm>
#include <vector>

#include "mmwsim/engine_common.hpp"

namespace mmwsim {

// Un-coordinated IEEE 802.11ad-style WLAN: every AP independently runs
// beacon intervals (exhaustive sector sweep, fixed A-BFT, then CSMA/CA data
// transfer). APs are not synchronized, so sweeps and DATA from different
// APs interfere; stations associate with the strongest measured AP.
class BaselineSim : public EngineBase {
 public:
  explicit BaselineSim(const Scenario& sc)
      : EngineBase(sc, Protocol::Baseline) {
    const int a_count = sc_.env.num_aps();
    const int u_count = sc_.env.num_ues();
    aps_.resize(a_count);
    ues_.resize(u_count);
    Rng phase_rng(sc_.seed, "phases");
    for (int a = 0; a < a_count; ++a) {
      aps_[a].next_beacon =
          sc_.use_fixed_phases && a < static_cast<int>(sc_.fixed_phases.size())
              ? sc_.fixed_phases[a]
              : phase_rng.uniform(0.0, sc_.mac.beacon_interval_s);
      aps_[a].cw = sc_.mac.cwmin;
      aps_[a].backoff = std::make_unique<Rng>(sc_.seed, "backoff", a);
    }
    for (auto& ue : ues_) ue.meas.assign(a_count, SectorMeasure{});
  }

  RunResult run() {
    bootstrap_associations();
    for (int a = 0; a < sc_.env.num_aps(); ++a) {
      q_.schedule(aps_[a].next_beacon, EventKind::Timer,
                  [this, a] { beacon_event(a); });
      service_next(a);
    }
    m60_.add_listener([this] {
      for (int a = 0; a < sc_.env.num_aps(); ++a) handle_medium_change(a);
    });
    start_blockage_processes();
    q_.run_until(sc_.horizon_s);

    double bhi_total = 0.0;
    for (const auto& ap : aps_) bhi_total += ap.bhi_time;
    metrics_.bhi_overhead_fraction =
        bhi_total / (sc_.env.num_aps() * sc_.horizon_s);
    finalize_metrics();
    RunResult res;
    res.metrics = metrics_;
    res.trace = std::move(trace_);
    return res;
  }

 private:
  struct SectorMeasure {
    int best_sector = -1;
    double best_dbm = kNegInfDb;
  };

  struct ApState {
    double next_beacon = 0.0;
    bool in_bhi = false;
    bool bhi_pending = false;
    double bhi_started = 0.0;
    double bhi_time = 0.0;

    bool serving = false;  // holds an in-service packet
    Packet hol;
    int hol_sector = -1;
    int hol_mcs = -1;
    int cw = 16;
    int backoff_slots = -1;
    double countdown_start = -1.0;  // <0: frozen or not counting
    std::uint64_t access_gen = 0;
    std::uint64_t wake_gen = 0;
    bool tx_busy = false;
    std::vector<int> assigned;  // associated UE ids
    std::unique_ptr<Rng> backoff;
  };

  struct UeState {
    std::vector<SectorMeasure> meas;  // latest sweep result per AP
    int assoc_ap = -1;
    int assoc_sector = -1;
    int assoc_mcs = -1;
  };

  // The very first sector sweeps happen on an idle network, so boot-time
  // associations come out clean; later beacon intervals refresh them under
  // live traffic.
  void bootstrap_associations() {
    for (int u = 0; u < sc_.env.num_ues(); ++u) {
      for (int a = 0; a < sc_.env.num_aps(); ++a) {
        const auto& ap = sc_.env.aps[a];
        SectorMeasure m;
        for (int d = 1; d <= ap.num_sectors; ++d) {
          const double p = mw_to_dbm(pt_.from_ap(a, d, pt_.ue_node(u)));
          if (p > m.best_dbm) {
            m.best_dbm = p;
            m.best_sector = d;
          }
        }
        ues_[u].meas[a] = m;
      }
      try_associate(u);
    }
  }

  void try_associate(int u) {
    auto& ue = ues_[u];
    int best_ap = -1;
    double best_dbm = kNegInfDb;
    for (int a = 0; a < sc_.env.num_aps(); ++a) {
      if (ue.meas[a].best_sector < 0) continue;
      if (ue.meas[a].best_dbm > best_dbm) {
        best_dbm = ue.meas[a].best_dbm;
        best_ap = a;
      }
    }
    if (best_ap < 0) return;
    const auto mcs = mcs_for_snr(sc_.radio.mcs, best_dbm - noise_dbm());
    if (!mcs) return;
    associate(u, best_ap, ue.meas[best_ap].best_sector, *mcs);
  }

  void associate(int u, int a, int sector, int mcs) {
    auto& ue = ues_[u];
    if (ue.assoc_ap == a) {
      ue.assoc_sector = sector;
      ue.assoc_mcs = mcs;
      return;
    }
    if (ue.assoc_ap >= 0) {
      auto& old_list = aps_[ue.assoc_ap].assigned;
      old_list.erase(std::remove(old_list.begin(), old_list.end(), u),
                     old_list.end());
    }
    ue.assoc_ap = a;
    ue.assoc_sector = sector;
    ue.assoc_mcs = mcs;
    aps_[a].assigned.push_back(u);
    std::sort(aps_[a].assigned.begin(), aps_[a].assigned.end());
    if (!aps_[a].in_bhi && !aps_[a].serving) service_next(a);
  }

  // ---- data service (CSMA/CA over the shared 60 GHz medium) ----

  void service_next(int a) {
    auto& ap = aps_[a];
    if (ap.in_bhi || ap.serving) return;
    int pick = -1;
    double pick_arrival = 0.0;
    for (int u : ap.assigned) {
      sources_[u].sync(q_.now());
      if (!sources_[u].has_backlog()) continue;
      if (pick < 0 || sources_[u].head_arrival() < pick_arrival) {
        pick = u;
        pick_arrival = sources_[u].head_arrival();
      }
    }
    if (pick < 0) {
      // sleep until the next arrival for any assigned UE
      double wake = std::numeric_limits<double>::infinity();
      for (int u : ap.assigned)
        wake = std::min(wake, sources_[u].next_arrival_time());
      if (!std::isfinite(wake) || wake > sc_.horizon_s) return;
      const std::uint64_t gen = ++ap.wake_gen;
      q_.schedule(wake, EventKind::PacketArrival, [this, a, gen] {
        if (aps_[a].wake_gen == gen) service_next(a);
      });
      return;
    }
    auto& ue = ues_[pick];
    ap.hol = Packet{next_packet_id_++, pick, sc_.traffic.packet_bits,
                    sources_[pick].pop_head(), 0};
    ++in_service_count_;
    ap.hol_sector = ue.assoc_sector;
    ap.hol_mcs = ue.assoc_mcs;
    ap.serving = true;
    ap.cw = sc_.mac.cwmin;
    begin_access(a);
  }

  void begin_access(int a) {
    auto& ap = aps_[a];
    ap.backoff_slots =
        static_cast<int>(ap.backoff->uniform_int(static_cast<std::uint64_t>(ap.cw)));
    ap.countdown_start = -1.0;
    resume_access(a);
  }

  void resume_access(int a) {
    auto& ap = aps_[a];
    if (ap.in_bhi || !ap.serving || ap.tx_busy) return;
    if (m60_.cs_busy(pt_.ap_node(a))) {
      ap.countdown_start = -1.0;
      return;  // medium listener resumes us
    }
    if (ap.countdown_start >= 0.0) return;  // already counting
    ap.countdown_start = q_.now();
    const double fire_at = q_.now() + sc_.mac.difs60() +
                           ap.backoff_slots * sc_.mac.slot60();
    const std::uint64_t gen = ++ap.access_gen;
    q_.schedule(fire_at, EventKind::BackoffExpiry, [this, a, gen] {
      if (aps_[a].access_gen == gen) attempt_tx(a);
    });
  }

  void handle_medium_change(int a) {
    auto& ap = aps_[a];
    if (!ap.serving || ap.tx_busy || ap.in_bhi) return;
    const bool busy = m60_.cs_busy(pt_.ap_node(a));
    if (busy && ap.countdown_start >= 0.0) {
      const double elapsed = q_.now() - ap.countdown_start - sc_.mac.difs60();
      const int done =
          elapsed > 0.0 ? static_cast<int>(elapsed / sc_.mac.slot60()) : 0;
      if (done >= ap.backoff_slots) {
        // our final slot boundary passed before CCA could flag the medium;
        // transmit into the vulnerable window
        ap.countdown_start = -1.0;
        ++ap.access_gen;
        attempt_tx(a);
        return;
      }
      ap.backoff_slots -= done;
      ap.countdown_start = -1.0;
      ++ap.access_gen;  // invalidate the pending timer
    } else if (!busy && ap.countdown_start < 0.0) {
      resume_access(a);
    }
  }

  void attempt_tx(int a) {
    auto& ap = aps_[a];
    if (ap.in_bhi || !ap.serving || ap.tx_busy) return;
    // CCA only sees energy that has been on the air for at least a slot
    if (m60_.busy_since(pt_.ap_node(a)) <= q_.now() - sc_.mac.slot60()) {
      ap.countdown_start = -1.0;
      return;
    }
    const double data_dur = data_duration(ap.hol_mcs);
    const double exchange = data_dur + sc_.mac.sifs60() + sc_.mac.ctrl60() +
                            sc_.mac.sifs60() + sc_.mac.slot60();
    if (q_.now() + exchange > ap.next_beacon) {
      // the exchange no longer fits before our own beacon; park until after
      ap.countdown_start = -1.0;
      ++ap.access_gen;
      return;
    }
    ap.tx_busy = true;
    const int u = ap.hol.ue_id;
    const double start = q_.now();
    const double end = start + data_dur;
    const long long tx =
        m60_.begin_tx(start, end, pt_.ap_node(a), ap.hol_sector);
    m60_.begin_rx(tx, pt_.ue_node(u), min_snr_for(ap.hol_mcs),
                  link_blocked(a, u));
    q_.schedule(end, EventKind::FrameEnd, [this, a, u, tx, start, data_dur] {
      m60_.end_tx(tx);
      const auto out = m60_.end_rx(tx, pt_.ue_node(u));
      trace_frame(start, FrameKind::Data, Band::Mmw60, NodeRef::ap(a),
                  NodeRef::ue(u), aps_[a].hol_sector, data_dur, out.outcome);
      count_loss(out, true);
      if (out.success) {
        send_ack(a, u, q_.now());
      } else {
        q_.schedule_in(sc_.mac.sifs60() + sc_.mac.ctrl60() + sc_.mac.slot60(),
                       EventKind::Timer,
                       [this, a] { decision(a, false, 0.0); });
      }
    });
  }

  void send_ack(int a, int u, double data_end) {
    const double start = data_end + sc_.mac.sifs60();
    const double end = start + sc_.mac.ctrl60();
    q_.schedule(start, EventKind::FrameStart, [this, a, u, start, end,
                                               data_end] {
      // legacy behavior on both ends: the station has no closed-loop power
      // control and the AP keeps its quasi-omni receive pattern
      const long long tx = m60_.begin_tx(start, end, pt_.ue_node(u), -1);
      m60_.begin_rx(tx, pt_.ap_node(a), control_snr(), link_blocked(a, u));
      q_.schedule(end, EventKind::FrameEnd, [this, a, u, tx, start, data_end] {
        m60_.end_tx(tx);
        const auto out = m60_.end_rx(tx, pt_.ap_node(a));
        trace_frame(start, FrameKind::Ack, Band::Mmw60, NodeRef::ue(u),
                    NodeRef::ap(a), -1, sc_.mac.ctrl60(), out.outcome);
        count_loss(out, false);
        decision(a, out.success, data_end);
      });
    });
  }

  void decision(int a, bool ok, double delivery_time) {
    auto& ap = aps_[a];
    ap.tx_busy = false;
    if (ok) {
      deliver(ap.hol, delivery_time);
      --in_service_count_;
      ap.serving = false;
      ap.cw = sc_.mac.cwmin;
    } else {
      ++ap.hol.retx_count;
      if (ap.hol.retx_count > sc_.mac.max_retx) {
        drop_retx(ap.hol);
        --in_service_count_;
        ap.serving = false;
        ap.cw = sc_.mac.cwmin;
      } else {
        ap.cw = std::min(2 * ap.cw, sc_.mac.cwmax);
      }
    }
    if (ap.bhi_pending) {
      ap.bhi_pending = false;
      start_bhi(a);
      return;
    }
    if (ap.serving)
      begin_access(a);
    else
      service_next(a);
  }

  // ---- beacon header interval: sweep + A-BFT ----

  void beacon_event(int a) {
    auto& ap = aps_[a];
    if (ap.tx_busy) {
      ap.bhi_pending = true;  // finish the exchange first
      return;
    }
    start_bhi(a);
  }

  void start_bhi(int a) {
    auto& ap = aps_[a];
    ap.in_bhi = true;
    ap.bhi_started = q_.now();
    ++ap.access_gen;
    ++ap.wake_gen;
    ap.countdown_start = -1.0;
    for (auto& ue : ues_) ue.meas[a] = SectorMeasure{};
    send_sweep(a, 1);
  }

  void send_sweep(int a, int d) {
    const double start = q_.now();
    const double end = start + sc_.mac.ctrl60();
    const long long tx = m60_.begin_tx(start, end, pt_.ap_node(a), d);
    for (int u = 0; u < sc_.env.num_ues(); ++u)
      m60_.begin_rx(tx, pt_.ue_node(u), control_snr(), link_blocked(a, u));
    q_.schedule(end, EventKind::FrameEnd, [this, a, d, tx, start] {
      m60_.end_tx(tx);
      for (int u = 0; u < sc_.env.num_ues(); ++u) {
        const auto out = m60_.end_rx(tx, pt_.ue_node(u));
        if (out.success) {
          auto& m = ues_[u].meas[a];
          if (out.signal_dbm > m.best_dbm) {
            m.best_dbm = out.signal_dbm;
            m.best_sector = d;
          }
        } else {
          count_loss(out, false);
        }
      }
      trace_frame(start, FrameKind::Ssw, Band::Mmw60, NodeRef::ap(a),
                  NodeRef::broadcast(), d, sc_.mac.ctrl60(), Outcome::Sent);
      if (d < sc_.env.aps[a].num_sectors) {
        q_.schedule_in(sc_.mac.sweep_gap(), EventKind::FrameStart,
                       [this, a, d] { send_sweep(a, d + 1); });
      } else {
        q_.schedule_in(sc_.mac.sifs60(), EventKind::Timer,
                       [this, a] { start_abft(a); });
      }
    });
  }

  void start_abft(int a) {
    // fixed-length responder phase, slots assigned by UE id order
    std::vector<int> responders;
    for (int u = 0; u < sc_.env.num_ues(); ++u) {
      if (ues_[u].meas[a].best_sector < 0) continue;
      int best_ap = -1;
      double best_dbm = kNegInfDb;
      for (int n = 0; n < sc_.env.num_aps(); ++n) {
        if (ues_[u].meas[n].best_sector < 0) continue;
        if (ues_[u].meas[n].best_dbm > best_dbm) {
          best_dbm = ues_[u].meas[n].best_dbm;
          best_ap = n;
        }
      }
      if (best_ap == a) responders.push_back(u);
      if (static_cast<int>(responders.size()) >= sc_.mac.abft_slots) break;
    }
    const double slot_len = sc_.mac.ctrl60() + sc_.mac.sifs60();
    const double t0 = q_.now();
    for (std::size_t s = 0; s < responders.size(); ++s) {
      const int u = responders[s];
      const double start = t0 + s * slot_len;
      q_.schedule(start, EventKind::FrameStart,
                  [this, a, u, start] { send_abft_feedback(a, u, start); });
    }
    const double bhi_end = t0 + sc_.mac.abft_slots * slot_len;
    q_.schedule(bhi_end, EventKind::Timer, [this, a] { end_bhi(a); });
  }

  void send_abft_feedback(int a, int u, double start) {
    const double end = start + sc_.mac.ctrl60();
    const long long tx = m60_.begin_tx(start, end, pt_.ue_node(u), -1);
    m60_.begin_rx(tx, pt_.ap_node(a), control_snr(), link_blocked(a, u));
    q_.schedule(end, EventKind::FrameEnd, [this, a, u, tx, start] {
      m60_.end_tx(tx);
      const auto out = m60_.end_rx(tx, pt_.ap_node(a));
      trace_frame(start, FrameKind::SswFeedback, Band::Mmw60, NodeRef::ue(u),
                  NodeRef::ap(a), -1, sc_.mac.ctrl60(), out.outcome);
      if (out.success) {
        const auto& m = ues_[u].meas[a];
        const auto mcs = mcs_for_snr(sc_.radio.mcs, m.best_dbm - noise_dbm());
        if (mcs) associate(u, a, m.best_sector, *mcs);
      } else {
        count_loss(out, false);
      }
    });
  }

  void end_bhi(int a) {
    auto& ap = aps_[a];
    ap.in_bhi = false;
    ap.bhi_time += q_.now() - ap.bhi_started;
    ap.next_beacon += sc_.mac.beacon_interval_s;
    if (ap.next_beacon <= sc_.horizon_s)
      q_.schedule(ap.next_beacon, EventKind::Timer,
                  [this, a] { beacon_event(a); });
    if (ap.serving)
      begin_access(a);
    else
      service_next(a);
  }

  std::vector<ApState> aps_;
  std::vector<UeState> ues_;
};

}  // namespace mmwsim
