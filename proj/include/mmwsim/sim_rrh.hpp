#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <vector>

#include "mmwsim/engine_common.hpp"

namespace mmwsim {

// Centralized coordination: radio heads driven over a lossless fronthaul by
// one baseband unit. Per beacon interval the BBU triggers a sequential,
// silent sector sweep (APs, then stations), collects the measurements,
// filters candidate links, verifies them with grouped RTS/CTS, and then
// schedules concurrent DATA rounds with grouped acknowledgements.
class RrhSim : public EngineBase {
 public:
  explicit RrhSim(const Scenario& sc)
      : EngineBase(sc, Protocol::CentralizedRrh) {
    const int a_count = sc_.env.num_aps();
    const int u_count = sc_.env.num_ues();
    meas_mw_.assign(static_cast<std::size_t>(u_count) * a_count *
                        pt_.max_sectors,
                    0.0);
    rev_mw_.assign(static_cast<std::size_t>(u_count) * a_count, 0.0);
    best_sector_.assign(static_cast<std::size_t>(u_count) * a_count, -1);
    candidate_.assign(static_cast<std::size_t>(u_count) * a_count, 0);
    blocked_flag_.assign(static_cast<std::size_t>(u_count) * a_count, 0);
    last_served_.assign(u_count, -1.0);
    retry_.resize(u_count);
  }

  RunResult run() {
    q_.schedule(0.0, EventKind::Timer, [this] { begin_bhi(); });
    start_blockage_processes();
    q_.run_until(sc_.horizon_s);
    metrics_.bhi_overhead_fraction = bhi_time_ / sc_.horizon_s;
    finalize_metrics();
    RunResult res;
    res.metrics = metrics_;
    res.trace = std::move(trace_);
    return res;
  }

 private:
  struct RetrySlot {
    bool has = false;
    Packet pkt;
  };

  double& meas(int u, int a, int d) {
    return meas_mw_[(static_cast<std::size_t>(u) * sc_.env.num_aps() + a) *
                        pt_.max_sectors +
                    (d - 1)];
  }
  double& rev(int u, int a) {
    return rev_mw_[static_cast<std::size_t>(u) * sc_.env.num_aps() + a];
  }
  int& best_sector(int u, int a) {
    return best_sector_[static_cast<std::size_t>(u) * sc_.env.num_aps() + a];
  }
  bool is_candidate(int u, int a) const {
    return candidate_[static_cast<std::size_t>(u) * sc_.env.num_aps() + a] &&
           !blocked_flag_[static_cast<std::size_t>(u) * sc_.env.num_aps() + a];
  }

  void trace_wire(double t, FrameKind kind, NodeRef src, NodeRef dst) {
    trace_frame(t, kind, Band::Wire, src, dst, -1, sc_.mac.wire_latency(),
                Outcome::Sent);
  }

  // ---- beacon header interval ----

  void begin_bhi() {
    bhi_start_ = q_.now();
    std::fill(meas_mw_.begin(), meas_mw_.end(), 0.0);
    std::fill(rev_mw_.begin(), rev_mw_.end(), 0.0);
    std::fill(best_sector_.begin(), best_sector_.end(), -1);
    std::fill(candidate_.begin(), candidate_.end(), 0);
    std::fill(blocked_flag_.begin(), blocked_flag_.end(), 0);
    trace_wire(q_.now(), FrameKind::TriggerSweep, NodeRef::controller(),
               NodeRef::broadcast());
    q_.schedule_in(sc_.mac.wire_latency(), EventKind::Timer,
                   [this] { ap_sweep(0, 1); });
  }

  void ap_sweep(int a, int d) {
    if (a >= sc_.env.num_aps()) {
      sta_phase(0);
      return;
    }
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
          meas(u, a, d) = dbm_to_mw(out.signal_dbm);
        } else {
          count_loss(out, false);
        }
      }
      trace_frame(start, FrameKind::Ssw, Band::Mmw60, NodeRef::ap(a),
                  NodeRef::broadcast(), d, sc_.mac.ctrl60(), Outcome::Sent);
      const int next_d = d + 1;
      q_.schedule_in(sc_.mac.sweep_gap(), EventKind::FrameStart, [this, a,
                                                                  next_d] {
        if (next_d <= sc_.env.aps[a].num_sectors)
          ap_sweep(a, next_d);
        else
          ap_sweep(a + 1, 1);
      });
    });
  }

  void sta_phase(int u) {
    if (u >= sc_.env.num_ues()) {
      collect_feedback();
      return;
    }
    const double start = q_.now();
    const double end = start + sc_.mac.ctrl60();
    const long long tx = m60_.begin_tx(start, end, pt_.ue_node(u), -1);
    for (int a = 0; a < sc_.env.num_aps(); ++a)
      m60_.begin_rx(tx, pt_.ap_node(a), control_snr(), link_blocked(a, u));
    q_.schedule(end, EventKind::FrameEnd, [this, u, tx, start] {
      m60_.end_tx(tx);
      for (int a = 0; a < sc_.env.num_aps(); ++a) {
        const auto out = m60_.end_rx(tx, pt_.ap_node(a));
        if (out.success)
          rev(u, a) = dbm_to_mw(out.signal_dbm);
        else
          count_loss(out, false);
      }
      trace_frame(start, FrameKind::Ssw, Band::Mmw60, NodeRef::ue(u),
                  NodeRef::broadcast(), -1, sc_.mac.ctrl60(), Outcome::Sent);
      // per-AP sector sweep feedback replies, sequential and silent
      double t = q_.now() + sc_.mac.sifs60();
      for (int a = 0; a < sc_.env.num_aps(); ++a) {
        int best = -1;
        double best_mw = 0.0;
        for (int d = 1; d <= sc_.env.aps[a].num_sectors; ++d) {
          if (meas(u, a, d) > best_mw) {
            best_mw = meas(u, a, d);
            best = d;
          }
        }
        if (best < 0) continue;
        best_sector(u, a) = best;
        const double fb_start = t;
        const int sector = best;
        q_.schedule(fb_start, EventKind::FrameStart, [this, a, u, sector,
                                                      fb_start] {
          const double fe = fb_start + sc_.mac.ctrl60();
          const long long ftx =
              m60_.begin_tx(fb_start, fe, pt_.ap_node(a), sector);
          m60_.begin_rx(ftx, pt_.ue_node(u), control_snr(),
                        link_blocked(a, u));
          q_.schedule(fe, EventKind::FrameEnd, [this, a, u, ftx, fb_start,
                                                sector] {
            m60_.end_tx(ftx);
            const auto out = m60_.end_rx(ftx, pt_.ue_node(u));
            trace_frame(fb_start, FrameKind::SswFeedback, Band::Mmw60,
                        NodeRef::ap(a), NodeRef::ue(u), sector,
                        sc_.mac.ctrl60(), out.outcome);
          });
        });
        t += sc_.mac.ctrl60() + sc_.mac.sifs60();
      }
      q_.schedule(t, EventKind::Timer, [this, u] { sta_phase(u + 1); });
    });
  }

  void collect_feedback() {
    double t = q_.now();
    for (int a = 0; a < sc_.env.num_aps(); ++a) {
      trace_wire(t, FrameKind::RssiFeedback, NodeRef::ap(a),
                 NodeRef::controller());
      t += sc_.mac.wire_latency();
    }
    q_.schedule(t, EventKind::Timer, [this] { send_cli(); });
  }

  void send_cli() {
    // candidate links: association floor on the measured best-sector SNR
    for (int u = 0; u < sc_.env.num_ues(); ++u) {
      for (int a = 0; a < sc_.env.num_aps(); ++a) {
        const int d = best_sector(u, a);
        if (d < 0) continue;
        const double snr = mw_to_dbm(meas(u, a, d)) - noise_dbm();
        if (snr >= sc_.mac.assoc_min_snr_db)
          candidate_[static_cast<std::size_t>(u) * sc_.env.num_aps() + a] = 1;
      }
    }
    trace_wire(q_.now(), FrameKind::Cli, NodeRef::controller(),
               NodeRef::broadcast());
    bhi_time_ += q_.now() + sc_.mac.wire_latency() - bhi_start_;
    q_.schedule_in(sc_.mac.wire_latency(), EventKind::Timer,
                   [this] { start_rts_cts(); });
  }

  // ---- RTS/CTS verification, grouped to minimize duration ----

  struct LinkRef {
    int ap, ue;
  };

  // Predicted SINR of every link in `group` when all transmit at once.
  // `forward` checks AP->STA beams, otherwise the omni CTS/ACK direction.
  bool group_feasible(const std::vector<LinkRef>& group, bool forward,
                      double floor_db) const {
    for (const auto& me : group) {
      double denom = noise_mw_;
      double sig;
      if (forward) {
        sig = meas_c(me.ue, me.ap, best_sector_c(me.ue, me.ap));
        for (const auto& other : group) {
          if (other.ap == me.ap) continue;
          denom += meas_c(me.ue, other.ap, best_sector_c(other.ue, other.ap));
        }
      } else {
        // station-to-AP frames; the AP listens with its trained sector and
        // stations run closed-loop power control
        const int d = best_sector_c(me.ue, me.ap);
        sig = ue_response_scale(me.ue, me.ap, d) * rev_c(me.ue, me.ap) *
              pt_.rx_fac(pt_.ap_node(me.ap), d, pt_.ue_node(me.ue));
        for (const auto& other : group) {
          if (other.ue == me.ue) continue;
          const int od = best_sector_c(other.ue, other.ap);
          denom += ue_response_scale(other.ue, other.ap, od) *
                   pt_.from_ue(other.ue, pt_.ap_node(me.ap)) *
                   pt_.rx_fac(pt_.ap_node(me.ap), d, pt_.ue_node(other.ue));
        }
      }
      if (sig <= 0.0) return false;
      if (mw_to_dbm(sig) - mw_to_dbm(denom) < floor_db) return false;
    }
    return true;
  }

  double meas_c(int u, int a, int d) const {
    if (d < 0) return 0.0;
    return meas_mw_[(static_cast<std::size_t>(u) * sc_.env.num_aps() + a) *
                        pt_.max_sectors +
                    (d - 1)];
  }
  double rev_c(int u, int a) const {
    return rev_mw_[static_cast<std::size_t>(u) * sc_.env.num_aps() + a];
  }
  int best_sector_c(int u, int a) const {
    return best_sector_[static_cast<std::size_t>(u) * sc_.env.num_aps() + a];
  }

  bool rts_group_ok(const std::vector<LinkRef>& group) const {
    for (std::size_t i = 0; i < group.size(); ++i)
      for (std::size_t j = i + 1; j < group.size(); ++j)
        if (group[i].ap == group[j].ap || group[i].ue == group[j].ue)
          return false;
    return group_feasible(group, true, control_snr()) &&
           group_feasible(group, false, control_snr());
  }

  // Partition links into concurrent slots: exhaustive for small counts,
  // otherwise greedy with the most-constrained link placed first.
  std::vector<std::vector<LinkRef>> partition_links(
      std::vector<LinkRef> links) const {
    std::vector<std::vector<LinkRef>> best;
    if (links.size() <= 4) {
      std::vector<std::vector<LinkRef>> cur;
      std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (!best.empty() && cur.size() >= best.size()) return;
        if (i == links.size()) {
          best = cur;
          return;
        }
        for (auto& g : cur) {
          g.push_back(links[i]);
          if (rts_group_ok(g)) rec(i + 1);
          g.pop_back();
        }
        cur.push_back({links[i]});
        rec(i + 1);
        cur.pop_back();
      };
      rec(0);
      return best;
    }
    // most-constrained first: fewest pairwise-compatible partners
    std::vector<int> compat(links.size(), 0);
    for (std::size_t i = 0; i < links.size(); ++i)
      for (std::size_t j = 0; j < links.size(); ++j)
        if (i != j && rts_group_ok({links[i], links[j]})) ++compat[i];
    std::vector<std::size_t> order(links.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) {
                       return compat[x] < compat[y];
                     });
    for (std::size_t idx : order) {
      bool placed = false;
      for (auto& g : best) {
        g.push_back(links[idx]);
        if (rts_group_ok(g)) {
          placed = true;
          break;
        }
        g.pop_back();
      }
      if (!placed) best.push_back({links[idx]});
    }
    return best;
  }

  void start_rts_cts() {
    std::vector<LinkRef> links;
    for (int u = 0; u < sc_.env.num_ues(); ++u)
      for (int a = 0; a < sc_.env.num_aps(); ++a)
        if (is_candidate(u, a)) links.push_back({a, u});
    const auto groups = partition_links(std::move(links));
    run_rts_group(groups, 0);
  }

  void run_rts_group(std::vector<std::vector<LinkRef>> groups,
                     std::size_t gi) {
    if (gi >= groups.size()) {
      q_.schedule_in(sc_.mac.sifs60(), EventKind::Timer,
                     [this] { dti_round(); });
      return;
    }
    const auto& group = groups[gi];
    const double rts_start = q_.now();
    const double rts_end = rts_start + sc_.mac.ctrl60();
    std::vector<long long> txs;
    for (const auto& l : group) {
      const long long tx = m60_.begin_tx(rts_start, rts_end,
                                         pt_.ap_node(l.ap),
                                         best_sector_c(l.ue, l.ap));
      m60_.begin_rx(tx, pt_.ue_node(l.ue), control_snr(),
                    link_blocked(l.ap, l.ue));
      txs.push_back(tx);
    }
    q_.schedule(rts_end, EventKind::FrameEnd, [this, groups, gi, group, txs,
                                               rts_start] {
      std::vector<char> rts_ok(group.size(), 0);
      for (std::size_t i = 0; i < group.size(); ++i) {
        m60_.end_tx(txs[i]);
        const auto out = m60_.end_rx(txs[i], pt_.ue_node(group[i].ue));
        rts_ok[i] = out.success;
        if (!out.success) count_loss(out, false);
        trace_frame(rts_start, FrameKind::Rts, Band::Mmw60,
                    NodeRef::ap(group[i].ap), NodeRef::ue(group[i].ue),
                    best_sector_c(group[i].ue, group[i].ap), sc_.mac.ctrl60(),
                    out.outcome);
      }
      const double cts_start = q_.now() + sc_.mac.sifs60();
      const double cts_end = cts_start + sc_.mac.ctrl60();
      q_.schedule(cts_start, EventKind::FrameStart, [this, groups, gi, group,
                                                     rts_ok, cts_start,
                                                     cts_end] {
        std::vector<long long> ctxs(group.size(), -1);
        for (std::size_t i = 0; i < group.size(); ++i) {
          if (!rts_ok[i]) continue;  // no RTS, no CTS
          ctxs[i] = m60_.begin_tx(
              cts_start, cts_end, pt_.ue_node(group[i].ue), -1,
              ue_response_scale(group[i].ue, group[i].ap,
                                best_sector_c(group[i].ue, group[i].ap)));
          m60_.begin_rx(ctxs[i], pt_.ap_node(group[i].ap), control_snr(),
                        link_blocked(group[i].ap, group[i].ue),
                        best_sector_c(group[i].ue, group[i].ap));
        }
        q_.schedule(cts_end, EventKind::FrameEnd, [this, groups, gi, group,
                                                   ctxs, cts_start] {
          for (std::size_t i = 0; i < group.size(); ++i) {
            bool ok = false;
            if (ctxs[i] >= 0) {
              m60_.end_tx(ctxs[i]);
              const auto out =
                  m60_.end_rx(ctxs[i], pt_.ap_node(group[i].ap));
              ok = out.success;
              if (!out.success) count_loss(out, false);
              trace_frame(cts_start, FrameKind::Cts, Band::Mmw60,
                          NodeRef::ue(group[i].ue),
                          NodeRef::ap(group[i].ap), -1, sc_.mac.ctrl60(),
                          out.outcome);
            }
            if (!ok) {
              // missing CTS: report the dead link, drop it this interval
              blocked_flag_[static_cast<std::size_t>(group[i].ue) *
                                sc_.env.num_aps() +
                            group[i].ap] = 1;
              trace_wire(q_.now(), FrameKind::Bli, NodeRef::ap(group[i].ap),
                         NodeRef::controller());
            }
          }
          q_.schedule_in(sc_.mac.sifs60(), EventKind::Timer,
                         [this, groups, gi] { run_rts_group(groups, gi + 1); });
        });
      });
    });
  }

  // ---- concurrent DATA rounds ----

  void dti_round() {
    const double next_beacon =
        (std::floor(q_.now() / sc_.mac.beacon_interval_s) + 1.0) *
        sc_.mac.beacon_interval_s;
    for (auto& src : sources_) src.sync(q_.now());

    // per-AP proposals, least recently served station first
    std::vector<std::vector<int>> proposals(sc_.env.num_aps());
    for (int a = 0; a < sc_.env.num_aps(); ++a) {
      std::vector<int> stas;
      for (int u = 0; u < sc_.env.num_ues(); ++u)
        if (is_candidate(u, a) &&
            (retry_[u].has || sources_[u].has_backlog()))
          stas.push_back(u);
      std::stable_sort(stas.begin(), stas.end(), [this](int x, int y) {
        if (last_served_[x] != last_served_[y])
          return last_served_[x] < last_served_[y];
        return x < y;
      });
      proposals[a] = std::move(stas);
    }

    // greedy max-min-SINR packing, one link per AP, one per station
    std::vector<LinkRef> selected;
    std::vector<char> ap_used(sc_.env.num_aps(), 0);
    std::vector<char> ue_used(sc_.env.num_ues(), 0);
    while (true) {
      double best_score = -std::numeric_limits<double>::infinity();
      int best_ap = -1, best_ue = -1;
      double best_age = std::numeric_limits<double>::infinity();
      for (int a = 0; a < sc_.env.num_aps(); ++a) {
        if (ap_used[a]) continue;
        for (int u : proposals[a]) {
          if (ue_used[u]) continue;
          auto group = selected;
          group.push_back({a, u});
          double min_sinr = std::numeric_limits<double>::infinity();
          bool ok = true;
          for (const auto& me : group) {
            double denom = noise_mw_;
            for (const auto& other : group)
              if (other.ap != me.ap)
                denom +=
                    meas_c(me.ue, other.ap, best_sector_c(other.ue, other.ap));
            const double sig = meas_c(me.ue, me.ap, best_sector_c(me.ue, me.ap));
            if (sig <= 0.0) {
              ok = false;
              break;
            }
            min_sinr = std::min(min_sinr, mw_to_dbm(sig) - mw_to_dbm(denom));
          }
          if (!ok || min_sinr < sc_.mac.min_required_sinr_db) continue;
          const double age = retry_[u].has ? retry_[u].pkt.arrival_time
                                           : sources_[u].head_arrival();
          if (min_sinr > best_score + 1e-12 ||
              (std::abs(min_sinr - best_score) <= 1e-12 && age < best_age)) {
            best_score = min_sinr;
            best_ap = a;
            best_ue = u;
            best_age = age;
          }
          break;  // only the first (least recently served) viable proposal
        }
      }
      if (best_ap < 0) break;
      selected.push_back({best_ap, best_ue});
      ap_used[best_ap] = 1;
      ue_used[best_ue] = 1;
    }

    if (selected.empty()) {
      double wake = std::numeric_limits<double>::infinity();
      for (int u = 0; u < sc_.env.num_ues(); ++u)
        wake = std::min(wake, sources_[u].next_arrival_time());
      wake = std::max(wake, q_.now());
      const double target = std::min(wake, next_beacon);
      if (target <= sc_.horizon_s)
        q_.schedule(target, EventKind::Timer, [this, next_beacon, target] {
          if (target >= next_beacon)
            begin_bhi();
          else
            dti_round();
        });
      return;
    }

    // MCS per link from the predicted SINR of the full selection
    std::vector<int> mcs(selected.size());
    std::vector<double> dur(selected.size());
    double max_dur = 0.0;
    for (std::size_t i = 0; i < selected.size(); ++i) {
      const auto& l = selected[i];
      double denom = noise_mw_;
      for (const auto& other : selected)
        if (other.ap != l.ap)
          denom += meas_c(l.ue, other.ap, best_sector_c(other.ue, other.ap));
      const double sinr =
          mw_to_dbm(meas_c(l.ue, l.ap, best_sector_c(l.ue, l.ap))) -
          mw_to_dbm(denom);
      const auto m = mcs_for_snr(sc_.radio.mcs, sinr);
      mcs[i] = m ? *m : 0;
      dur[i] = data_duration(mcs[i]);
      max_dur = std::max(max_dur, dur[i]);
    }

    // grouped acknowledgements after the longest DATA frame
    std::vector<std::vector<std::size_t>> ack_groups;
    for (std::size_t i = 0; i < selected.size(); ++i) {
      bool placed = false;
      for (auto& g : ack_groups) {
        g.push_back(i);
        std::vector<LinkRef> links;
        for (std::size_t k : g) links.push_back(selected[k]);
        if (group_feasible(links, false, control_snr())) {
          placed = true;
          break;
        }
        g.pop_back();
      }
      if (!placed) ack_groups.push_back({i});
    }

    const double t_api = q_.now();
    const double t_data = t_api + sc_.mac.wire_latency();
    const double t_ack0 = t_data + max_dur + sc_.mac.sifs60();
    const double round_end =
        t_ack0 + ack_groups.size() * (sc_.mac.ctrl60() + sc_.mac.sifs60());
    if (round_end > next_beacon - sc_.mac.sifs60()) {
      // does not fit before the next beacon; resume after the next BHI
      if (next_beacon <= sc_.horizon_s)
        q_.schedule(next_beacon, EventKind::Timer, [this] { begin_bhi(); });
      return;
    }
    trace_wire(t_api, FrameKind::Api, NodeRef::controller(),
               NodeRef::broadcast());

    // pull packets
    auto pkts = std::make_shared<std::vector<Packet>>(selected.size());
    for (std::size_t i = 0; i < selected.size(); ++i) {
      const int u = selected[i].ue;
      if (retry_[u].has) {
        (*pkts)[i] = retry_[u].pkt;
        retry_[u].has = false;
      } else {
        (*pkts)[i] = Packet{next_packet_id_++, u, sc_.traffic.packet_bits,
                            sources_[u].pop_head(), 0};
        ++in_service_count_;
      }
      last_served_[u] = q_.now();
    }

    auto data_ok = std::make_shared<std::vector<char>>(selected.size(), 0);
    auto ack_ok = std::make_shared<std::vector<char>>(selected.size(), 0);
    auto data_end_t = std::make_shared<std::vector<double>>(selected.size());

    q_.schedule(t_data, EventKind::FrameStart, [this, selected, mcs, dur,
                                                t_data, data_ok, data_end_t] {
      for (std::size_t i = 0; i < selected.size(); ++i) {
        const auto& l = selected[i];
        const double end = t_data + dur[i];
        (*data_end_t)[i] = end;
        const long long tx = m60_.begin_tx(t_data, end, pt_.ap_node(l.ap),
                                           best_sector_c(l.ue, l.ap));
        m60_.begin_rx(tx, pt_.ue_node(l.ue), min_snr_for(mcs[i]),
                      link_blocked(l.ap, l.ue));
        q_.schedule(end, EventKind::FrameEnd, [this, tx, l, i, t_data, dur,
                                               mcs, data_ok] {
          m60_.end_tx(tx);
          const auto out = m60_.end_rx(tx, pt_.ue_node(l.ue));
          (*data_ok)[i] = out.success;
          if (!out.success) count_loss(out, true);
          trace_frame(t_data, FrameKind::Data, Band::Mmw60, NodeRef::ap(l.ap),
                      NodeRef::ue(l.ue), best_sector_c(l.ue, l.ap), dur[i],
                      out.outcome);
        });
      }
    });

    for (std::size_t g = 0; g < ack_groups.size(); ++g) {
      const double ack_start =
          t_ack0 + g * (sc_.mac.ctrl60() + sc_.mac.sifs60());
      const auto group = ack_groups[g];
      q_.schedule(ack_start, EventKind::FrameStart, [this, group, selected,
                                                     ack_start, data_ok,
                                                     ack_ok] {
        const double end = ack_start + sc_.mac.ctrl60();
        std::vector<std::pair<std::size_t, long long>> txs;
        for (std::size_t i : group) {
          if (!(*data_ok)[i]) continue;
          const auto& l = selected[i];
          const long long tx = m60_.begin_tx(
              ack_start, end, pt_.ue_node(l.ue), -1,
              ue_response_scale(l.ue, l.ap, best_sector_c(l.ue, l.ap)));
          m60_.begin_rx(tx, pt_.ap_node(l.ap), control_snr(),
                        link_blocked(l.ap, l.ue),
                        best_sector_c(l.ue, l.ap));
          txs.emplace_back(i, tx);
        }
        q_.schedule(end, EventKind::FrameEnd, [this, txs, selected, ack_start,
                                               ack_ok] {
          for (const auto& [i, tx] : txs) {
            const auto& l = selected[i];
            m60_.end_tx(tx);
            const auto out = m60_.end_rx(tx, pt_.ap_node(l.ap));
            (*ack_ok)[i] = out.success;
            if (!out.success) count_loss(out, false);
            trace_frame(ack_start, FrameKind::Ack, Band::Mmw60,
                        NodeRef::ue(l.ue), NodeRef::ap(l.ap), -1,
                        sc_.mac.ctrl60(), out.outcome);
          }
        });
      });
    }

    q_.schedule(round_end, EventKind::Timer, [this, selected, pkts, data_ok,
                                              ack_ok, data_end_t] {
      for (std::size_t i = 0; i < selected.size(); ++i) {
        const auto& l = selected[i];
        Packet& pkt = (*pkts)[i];
        if ((*data_ok)[i] && (*ack_ok)[i]) {
          deliver(pkt, (*data_end_t)[i]);
          --in_service_count_;
          continue;
        }
        // missing ACK: report and let the BBU re-coordinate
        trace_wire(q_.now(), FrameKind::Bli, NodeRef::ap(l.ap),
                   NodeRef::controller());
        blocked_flag_[static_cast<std::size_t>(l.ue) * sc_.env.num_aps() +
                      l.ap] = 1;
        ++pkt.retx_count;
        if (pkt.retx_count > sc_.mac.max_retx) {
          drop_retx(pkt);
          --in_service_count_;
        } else {
          retry_[l.ue].has = true;
          retry_[l.ue].pkt = pkt;
        }
      }
      dti_round();
    });
  }

  std::vector<double> meas_mw_;     // [ue][ap][sector]
  std::vector<double> rev_mw_;      // [ue][ap] station-to-AP
  std::vector<int> best_sector_;    // [ue][ap]
  std::vector<char> candidate_;     // [ue][ap]
  std::vector<char> blocked_flag_;  // [ue][ap], until next BHI
  std::vector<double> last_served_;
  std::vector<RetrySlot> retry_;
  double bhi_start_ = 0.0;
  double bhi_time_ = 0.0;
};

}  // namespace mmwsim
