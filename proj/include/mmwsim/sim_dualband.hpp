#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "mmwsim/coordination.hpp"
#include "mmwsim/engine_common.hpp"

namespace mmwsim {

// Wi-Fi-assisted coordination: control frames ride the shared 5 GHz channel
// (CSMA/CA, one collision domain) while data rides 60 GHz beams picked from
// the offline fingerprint databases. The controller hands out one beam
// refinement grant at a time, so BRP bursts never race a foreign NAV
// reservation, and relays refined bad-beam sets over the backhaul.
class DualBandSim : public EngineBase {
 public:
  DualBandSim(const Scenario& sc, const FingerprintDatabases& dbs,
              std::vector<std::vector<ExemplarSet>> exemplars)
      : EngineBase(sc, Protocol::DualBand),
        dbs_(dbs),
        exemplars_(std::move(exemplars)),
        meas_rng_(sc.seed, "meas"),
        chain_rng_(sc.seed, "chain") {
    const int a_count = sc_.env.num_aps();
    wifi_.resize(a_count);
    for (int a = 0; a < a_count; ++a)
      wifi_[a].rng = std::make_unique<Rng>(sc_.seed, "wifi-backoff", a);
    ue_mmw_on_.assign(sc_.env.num_ues(), 0);
    ue_session_.assign(sc_.env.num_ues(), -1);
    chain_attempts_.assign(sc_.env.num_ues(), 0);
    ue_lp_cache_.assign(sc_.env.num_ues(), -1);
    chain_cw_.assign(sc_.env.num_ues(), sc_.mac.cwmin);
    cooldown_until_.assign(sc_.env.num_ues(), 0.0);
    session_rng_.resize(a_count);
    for (int a = 0; a < a_count; ++a)
      session_rng_[a] = std::make_unique<Rng>(sc_.seed, "backoff60", a);
    if (sc_.learn.apc_map_guard) build_power_map();
  }

  RunResult run() {
    m5_.add_listener([this] {
      for (int a = 0; a < sc_.env.num_aps(); ++a) wifi_medium_change(a);
    });
    start_blockage_processes();
    q_.schedule(0.0, EventKind::Timer, [this] { kick(); });
    q_.run_until(sc_.horizon_s);
    finalize_metrics();
    RunResult res;
    res.metrics = metrics_;
    res.trace = std::move(trace_);
    res.nav_windows = nav_windows_;
    res.counters = counters_;
    res.counters["guard_declines"] = guard_declines_;
    return res;
  }

 private:
  // ---- 5 GHz CSMA layer: APs contend, UEs send SIFS-spaced responses ----

  struct WifiJob {
    FrameKind kind = FrameKind::WifiMReq;
    NodeRef dst;
    std::function<void(bool ok, double end_time)> done;
  };

  struct WifiNode {
    std::deque<WifiJob> jobs;
    bool txing = false;
    int slots = -1;
    double countdown_start = -1.0;
    std::uint64_t gen = 0;
    std::unique_ptr<Rng> rng;
  };

  void wifi_submit(int ap, WifiJob job) {
    wifi_[ap].jobs.push_back(std::move(job));
    wifi_pump(ap);
  }

  void wifi_pump(int ap) {
    auto& node = wifi_[ap];
    if (node.txing || node.jobs.empty()) return;
    if (node.slots < 0)
      node.slots = static_cast<int>(
          node.rng->uniform_int(static_cast<std::uint64_t>(sc_.mac.cwmin)));
    if (m5_.busy()) {
      node.countdown_start = -1.0;
      return;
    }
    if (node.countdown_start >= 0.0) return;
    node.countdown_start = q_.now();
    const double fire =
        q_.now() + sc_.mac.difs5() + node.slots * sc_.mac.slot5();
    const std::uint64_t gen = ++node.gen;
    q_.schedule(fire, EventKind::BackoffExpiry, [this, ap, gen] {
      if (wifi_[ap].gen == gen) wifi_transmit(ap);
    });
  }

  void wifi_medium_change(int ap) {
    auto& node = wifi_[ap];
    if (node.txing || node.jobs.empty()) return;
    if (m5_.busy() && node.countdown_start >= 0.0) {
      const double elapsed = q_.now() - node.countdown_start - sc_.mac.difs5();
      if (elapsed > 0.0) {
        node.slots -= static_cast<int>(elapsed / sc_.mac.slot5());
        if (node.slots < 0) node.slots = 0;
      }
      node.countdown_start = -1.0;
      ++node.gen;
    } else if (!m5_.busy() && node.countdown_start < 0.0) {
      wifi_pump(ap);
    }
  }

  void wifi_transmit(int ap) {
    auto& node = wifi_[ap];
    if (node.txing || node.jobs.empty()) return;
    if (m5_.busy()) {
      node.countdown_start = -1.0;
      return;
    }
    node.txing = true;
    WifiJob job = std::move(node.jobs.front());
    node.jobs.pop_front();
    const double start = q_.now();
    const double end = start + sc_.mac.ctrl5();
    const long long tx = m5_.begin_tx(start, end, pt_.ap_node(ap));
    q_.schedule(end, EventKind::FrameEnd,
                [this, ap, tx, start, job = std::move(job)] {
                  const bool ok = m5_.end_tx(tx);
                  if (!ok) ++metrics_.collision_count;
                  trace_frame(start, job.kind, Band::Wifi5, NodeRef::ap(ap),
                              job.dst, -1, sc_.mac.ctrl5(),
                              ok ? Outcome::Ok : Outcome::Collision);
                  auto& n = wifi_[ap];
                  n.txing = false;
                  n.slots = -1;
                  n.countdown_start = -1.0;
                  if (job.done) job.done(ok, q_.now());
                  wifi_pump(ap);
                });
  }

  void wifi_respond(int ue, FrameKind kind, double at,
                    std::function<void(bool, double)> done) {
    q_.schedule(at, EventKind::FrameStart, [this, ue, kind, at,
                                            done = std::move(done)] {
      const double end = at + sc_.mac.ctrl5();
      const long long tx = m5_.begin_tx(at, end, pt_.ue_node(ue));
      q_.schedule(end, EventKind::FrameEnd, [this, ue, kind, tx, at,
                                             done = std::move(done)] {
        const bool ok = m5_.end_tx(tx);
        if (!ok) ++metrics_.collision_count;
        trace_frame(at, kind, Band::Wifi5, NodeRef::ue(ue),
                    NodeRef::broadcast(), -1, sc_.mac.ctrl5(),
                    ok ? Outcome::Ok : Outcome::Collision);
        if (done) done(ok, q_.now());
      });
    });
  }

  // ---- controller radio-map guard ----

  // Full offline per-sector received power at every learning point; the
  // offline sweep measures all of these while finding the argmax.
  void build_power_map() {
    const int L = sc_.env.num_lps();
    const int A = sc_.env.num_aps();
    const int D = pt_.max_sectors;
    p_all_mw_.assign(static_cast<std::size_t>(L) * A * D, 0.0);
    for (int l = 0; l < L; ++l)
      for (int a = 0; a < A; ++a)
        for (int d = 1; d <= sc_.env.aps[a].num_sectors; ++d)
          p_all_mw_[(static_cast<std::size_t>(l) * A + a) * D + (d - 1)] =
              dbm_to_mw(rx_power_mmw(sc_.env.aps[a], d,
                                     sc_.env.learning_points[l],
                                     sc_.radio.pattern, sc_.radio.freq_mmw_hz,
                                     sc_.radio.rx_gain_dbi));
  }

  double p_all(int lp, int ap, int sector) const {
    return p_all_mw_[(static_cast<std::size_t>(lp) * sc_.env.num_aps() + ap) *
                         pt_.max_sectors +
                     (sector - 1)];
  }

  // Any free AP predicted to clear the admission bar for this location?
  bool any_viable_ap(int lp) const {
    const double bar =
        sc_.mac.min_serving_snr_db + sc_.learn.interference_reserve_db;
    for (int a = 0; a < sc_.env.num_aps(); ++a) {
      if (busy_.count(a) || reserved_.count(a)) continue;
      for (int d = 1; d <= sc_.env.aps[a].num_sectors; ++d)
        if (predicted_sinr_db(lp, a, d) >= bar) return true;
    }
    return false;
  }

  // Fingerprint localization against the raw table.
  int match_lp(const std::vector<double>& psi_r) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int l = 0; l < dbs_.num_lps; ++l) {
      const double d = sq_distance(psi_r, dbs_.psi[l]);
      if (d < best_d) {
        best_d = d;
        best = l;
      }
    }
    return best;
  }

  struct ActiveBeam {
    int ap = -1;
    int beam = -1;
    int lp = -1;       // matched location of the served station
    double min_snr_db = 0.0;  // serving MCS threshold
  };

  std::vector<ActiveBeam> active_beams(int except_ap = -1) const {
    std::vector<ActiveBeam> out;
    for (const auto& [ap, s] : sessions_)
      if (ap != except_ap)
        out.push_back({ap, s.beam, s.matched_lp, min_snr_for(s.mcs)});
    for (const auto& [ue, c] : chains_)
      if (c->stage >= 7 && c->chosen != except_ap)
        out.push_back({c->chosen, c->confirmed_beam, c->matched_lp,
                       min_snr_for(c->confirmed_mcs)});
    return out;
  }

  // Would adding beam b_m at AP m push the victim below its serving MCS
  // threshold at its matched location? Evaluated against the full active
  // beam set plus the entrant, with a small allowance for power-controlled
  // response traffic.
  bool breaks_victim(const ActiveBeam& victim, int m, int b_m) const {
    const double sig = p_all(victim.lp, victim.ap, victim.beam);
    double denom = noise_mw_ + p_all(victim.lp, m, b_m);
    for (const auto& v : active_beams(victim.ap))
      if (v.ap != m) denom += p_all(victim.lp, v.ap, v.beam);
    const double sinr = mw_to_dbm(sig) - mw_to_dbm(denom);
    return sinr < victim.min_snr_db + kGuardMarginDb;
  }

  static constexpr double kGuardMarginDb = 3.0;

  // Predicted SINR of (ap, beam) serving a station matched to `lp`, with
  // every active beam as interference.
  double predicted_sinr_db(int lp, int ap, int beam) const {
    double denom = noise_mw_;
    for (const auto& v : active_beams(ap)) denom += p_all(lp, v.ap, v.beam);
    return mw_to_dbm(p_all(lp, ap, beam)) - mw_to_dbm(denom);
  }

  // ---- association / beam-plan chain, keyed by UE ----

  struct Chain {
    int ue = -1;
    int initiator = -1;
    int chosen = -1;
    int stage = 0;
    std::vector<double> psi;
    BeamPlan plan;
    std::vector<int> candidates;  // shortlist after elimination
    std::map<int, double> probe_power_dbm;
    std::map<int, double> probe_sinr_db;
    double nav_end = 0.0;
    int matched_lp = -1;
    int confirmed_beam = -1;
    int confirmed_mcs = 0;
    bool holds_token = false;
    bool nav_announced = false;
    std::uint64_t grant_id = 0;
    std::uint64_t deadline_gen = 0;
  };

  Chain* chain_of(int ue) {
    const auto it = chains_.find(ue);
    return it == chains_.end() ? nullptr : it->second.get();
  }

  void kick() {
    while (true) {
      std::vector<std::pair<double, int>> pending;
      for (int u = 0; u < sc_.env.num_ues(); ++u) {
        if (ue_session_[u] >= 0 || chains_.count(u)) continue;
        if (cooldown_until_[u] > q_.now()) continue;
        sources_[u].sync(q_.now());
        if (!sources_[u].has_backlog()) continue;
        if (sc_.learn.apc_map_guard && ue_lp_cache_[u] >= 0 &&
            !any_viable_ap(ue_lp_cache_[u]))
          continue;  // re-examined whenever a session ends
        pending.emplace_back(sources_[u].head_arrival(), u);
      }
      if (pending.empty()) break;
      int initiator = -1;
      for (int a = 0; a < sc_.env.num_aps(); ++a) {
        if (!busy_.count(a) && !reserved_.count(a) && !initiating_.count(a)) {
          initiator = a;
          break;
        }
      }
      if (initiator < 0) break;
      std::sort(pending.begin(), pending.end());
      start_chain(pending.front().second, initiator);
    }
    schedule_wake();
  }

  void schedule_wake() {
    bool idle_ap = false;
    for (int a = 0; a < sc_.env.num_aps(); ++a)
      if (!busy_.count(a) && !reserved_.count(a) && !initiating_.count(a))
        idle_ap = true;
    if (!idle_ap) return;
    double wake = std::numeric_limits<double>::infinity();
    for (int u = 0; u < sc_.env.num_ues(); ++u) {
      if (ue_session_[u] >= 0 || chains_.count(u)) continue;
      const double t = sources_[u].has_backlog()
                           ? cooldown_until_[u]
                           : std::max(cooldown_until_[u],
                                      sources_[u].next_arrival_time());
      if (t <= q_.now()) continue;
      wake = std::min(wake, t);
    }
    if (!std::isfinite(wake) || wake > sc_.horizon_s) return;
    const std::uint64_t gen = ++wake_gen_;
    q_.schedule(wake, EventKind::PacketArrival, [this, gen] {
      if (wake_gen_ == gen) kick();
    });
  }

  void start_chain(int ue, int initiator) {
    auto chain = std::make_unique<Chain>();
    chain->ue = ue;
    chain->initiator = initiator;
    chain->stage = 1;
    initiating_.insert(initiator);
    chains_[ue] = std::move(chain);
    wifi_submit(initiator,
                WifiJob{FrameKind::WifiMReq, NodeRef::ue(ue),
                        [this, ue](bool ok, double end) {
                          Chain* c = chain_of(ue);
                          if (!c) return;
                          if (ok)
                            wifi_respond(ue, FrameKind::WifiMResp,
                                         end + sc_.mac.sifs5(),
                                         [this, ue](bool rok, double) {
                                           on_mresp(ue, rok);
                                         });
                          arm_deadline(c, sc_.mac.sifs5() + sc_.mac.ctrl5() +
                                              4 * sc_.mac.slot5());
                        }});
  }

  void arm_deadline(Chain* c, double delay) {
    const std::uint64_t gen = ++c->deadline_gen;
    const int ue = c->ue;
    q_.schedule_in(delay, EventKind::Timer, [this, ue, gen] {
      Chain* c = chain_of(ue);
      if (!c || c->deadline_gen != gen) return;
      chain_fail(c);
    });
  }

  void on_mresp(int ue, bool ok) {
    Chain* c = chain_of(ue);
    if (!c) return;
    ++c->deadline_gen;
    if (!ok) {
      chain_fail(c);
      return;
    }
    c->stage = 2;
    // every AP records the broadcast fingerprint
    c->psi.resize(sc_.env.num_aps());
    for (int n = 0; n < sc_.env.num_aps(); ++n) {
      c->psi[n] = wifi_rss_dbm(sc_.env.aps[n], sc_.env.ues[ue], sc_.radio);
      if (sc_.radio.measurement_noise)
        c->psi[n] += meas_rng_.normal(0.0, sc_.radio.measurement_sigma_db);
    }
    OnlineFingerprint fp;
    fp.rss = c->psi;
    fp.ue_id = ue;
    fp.timestamp = q_.now();
    if (sc_.learn.apc_map_guard) {
      c->matched_lp = match_lp(c->psi);
      ue_lp_cache_[ue] = c->matched_lp;
    }
    std::set<int> unavailable = busy_;
    for (int a : reserved_) unavailable.insert(a);
    if (sc_.learn.apc_map_guard) {
      // pre-qualify: only offer APs the map predicts can clear admission
      const double bar =
          sc_.mac.min_serving_snr_db + sc_.learn.interference_reserve_db;
      for (int a = 0; a < sc_.env.num_aps(); ++a) {
        if (unavailable.count(a)) continue;
        double best = kNegInfDb;
        for (int d = 1; d <= sc_.env.aps[a].num_sectors; ++d)
          best = std::max(best, predicted_sinr_db(c->matched_lp, a, d));
        if (best < bar) unavailable.insert(a);
      }
    }
    const auto chosen =
        select_ap(fp, exemplars_, unavailable, sc_.learn.ap_select_gate_sq_db);
    if (!chosen) {
      ++counters_["chain_no_ap"];
      chain_fail(c);
      return;
    }
    c->chosen = *chosen;
    reserved_.insert(c->chosen);
    if (c->initiator != c->chosen) initiating_.erase(c->initiator);
    wifi_submit(c->chosen, WifiJob{FrameKind::SwitchOn, NodeRef::ue(ue),
                                   [this, ue](bool ok, double end) {
                                     Chain* c = chain_of(ue);
                                     if (!c) return;
                                     ue_mmw_on_[ue] = ok ? 1 : 0;
                                     compute_plan(c, end);
                                   }});
  }

  void compute_plan(Chain* c, double now_hint) {
    c->stage = 3;
    if (exemplars_[c->chosen].empty()) {
      chain_fail(c);
      return;
    }
    OnlineFingerprint fp;
    fp.rss = c->psi;
    fp.ue_id = c->ue;
    c->plan.ap_id = c->chosen;
    c->plan.ue_id = c->ue;
    c->plan.best_beams = estimate_best_beams(fp, exemplars_[c->chosen],
                                             sc_.learn.x_best_beams);
    for (int m = 0; m < sc_.env.num_aps(); ++m) {
      if (m == c->chosen) continue;
      c->plan.bad_candidates[m] = bad_beam_candidates(
          dbs_, c->chosen, c->plan.best_beams, m, sc_.radio.mcs, noise_dbm());
    }
    trace_frame(now_hint, FrameKind::Cli, Band::Wire, NodeRef::controller(),
                NodeRef::broadcast(), -1, sc_.mac.wire_latency(),
                Outcome::Sent);
    const int ue = c->ue;
    q_.schedule_in(sc_.mac.wire_latency(), EventKind::Timer, [this, ue] {
      Chain* c = chain_of(ue);
      if (c) request_token(c);
    });
  }

  // ---- BF grant + NAV + BRP ----

  void request_token(Chain* c) {
    c->stage = 4;
    token_queue_.push_back(c->ue);
    pump_token();
  }

  void pump_token() {
    while (!token_held_ && !token_queue_.empty()) {
      const int ue = token_queue_.front();
      token_queue_.pop_front();
      Chain* c = chain_of(ue);
      if (!c) continue;
      token_held_ = true;
      c->holds_token = true;
      c->grant_id = ++grant_seq_;
      send_navset(c);
      return;
    }
  }

  void release_grant(std::uint64_t grant_id) {
    if (token_held_ && current_grant_ == grant_id) {
      token_held_ = false;
      pump_token();
    }
  }

  void send_navset(Chain* c) {
    current_grant_ = c->grant_id;
    // eliminate bad beams registered against this AP, then size the window
    std::vector<int> eliminated;
    for (const auto& [victim, sectors] : bad_at_[c->chosen])
      eliminated.insert(eliminated.end(), sectors.begin(), sectors.end());
    c->candidates.clear();
    for (int b : c->plan.best_beams)
      if (std::find(eliminated.begin(), eliminated.end(), b) ==
          eliminated.end())
        c->candidates.push_back(b);
    if (sc_.learn.apc_map_guard) {
      std::vector<int> safe;
      for (int b : c->candidates) {
        bool hurts = false;
        for (const auto& v : active_beams(c->chosen))
          if (breaks_victim(v, c->chosen, b)) hurts = true;
        if (!hurts) safe.push_back(b);
      }
      if (safe.empty()) {
        // every shortlisted beam would degrade an active link; decline and
        // let the station retry once the victim's service window ends
        ++guard_declines_;
        c->holds_token = false;
        release_grant(c->grant_id);
        chain_fail(c);
        return;
      }
      c->candidates = std::move(safe);
    } else if (c->candidates.empty()) {
      c->candidates = c->plan.best_beams;  // serve anyway, flag it
      ++metrics_.brp_fallbacks;
    }
    const double nav_dur = c->candidates.size() * sc_.mac.brp_slot() +
                           sc_.mac.sifs60() + sc_.mac.ctrl60() +
                           sc_.mac.nav_margin_us * 1e-6;
    const int ue = c->ue;
    const std::uint64_t grant = c->grant_id;
    wifi_submit(
        c->chosen,
        WifiJob{FrameKind::NavSet, NodeRef::broadcast(),
                [this, ue, nav_dur, grant](bool, double end) {
                  Chain* c = chain_of(ue);
                  if (!c) {
                    release_grant(grant);
                    return;
                  }
                  c->nav_announced = true;
                  c->nav_end = end + nav_dur;
                  nav_windows_.push_back(
                      NavWindow{c->chosen, end, c->nav_end});
                  q_.schedule(c->nav_end, EventKind::Timer,
                              [this, grant] { release_grant(grant); });
                  q_.schedule_in(sc_.mac.sifs60(), EventKind::Timer,
                                 [this, ue] {
                                   Chain* c = chain_of(ue);
                                   if (c) run_brp(c, 0);
                                 });
                }});
  }

  void run_brp(Chain* c, std::size_t idx) {
    c->stage = 5;
    if (idx >= c->candidates.size()) {
      send_fbk(c);
      return;
    }
    const int ue = c->ue;
    const int beam = c->candidates[idx];
    const double start = q_.now();
    const double end = start + sc_.mac.brp_slot();
    const long long tx = m60_.begin_tx(start, end, pt_.ap_node(c->chosen), beam);
    const bool listening = ue_mmw_on_[ue] != 0;
    const int ap = c->chosen;
    if (listening)
      m60_.begin_rx(tx, pt_.ue_node(ue), control_snr(), link_blocked(ap, ue));
    q_.schedule(end, EventKind::FrameEnd, [this, ue, ap, idx, beam, tx, start,
                                           listening] {
      m60_.end_tx(tx);
      Outcome out_kind = Outcome::Lost;
      if (listening) {
        const auto out = m60_.end_rx(tx, pt_.ue_node(ue));
        out_kind = out.outcome;
        Chain* c = chain_of(ue);
        if (out.success && c) {
          c->probe_power_dbm[beam] = out.signal_dbm;
          c->probe_sinr_db[beam] = out.end_sinr_db;
        } else if (!out.success) {
          count_loss(out, false);
        }
      }
      trace_frame(start, FrameKind::Brp, Band::Mmw60, NodeRef::ap(ap),
                  NodeRef::ue(ue), beam, sc_.mac.brp_slot(), out_kind);
      Chain* c = chain_of(ue);
      if (c) run_brp(c, idx + 1);
    });
  }

  void send_fbk(Chain* c) {
    c->stage = 6;
    if (c->probe_power_dbm.empty() || !ue_mmw_on_[c->ue]) {
      ++counters_["chain_probes_lost"];
      chain_fail(c);
      return;
    }
    const int ue = c->ue;
    const int ap = c->chosen;
    const double start = q_.now() + sc_.mac.sifs60();
    const double end = start + sc_.mac.ctrl60();
    const int listen_sector = c->candidates.front();
    q_.schedule(start, EventKind::FrameStart, [this, ue, ap, start, end,
                                               listen_sector] {
      if (!chain_of(ue)) return;
      const long long tx =
          m60_.begin_tx(start, end, pt_.ue_node(ue), -1,
                        ue_response_scale(ue, ap, listen_sector));
      // feedback is received on the leading candidate sector
      m60_.begin_rx(tx, pt_.ap_node(ap), control_snr(), link_blocked(ap, ue),
                    listen_sector);
      q_.schedule(end, EventKind::FrameEnd, [this, ue, ap, tx, start] {
        m60_.end_tx(tx);
        const auto out = m60_.end_rx(tx, pt_.ap_node(ap));
        trace_frame(start, FrameKind::Fbk, Band::Mmw60, NodeRef::ue(ue),
                    NodeRef::ap(ap), -1, sc_.mac.ctrl60(), out.outcome);
        Chain* c = chain_of(ue);
        if (!c) return;
        if (!out.success) {
          count_loss(out, false);
          chain_fail(c);
          return;
        }
        finish_refinement(c);
      });
    });
  }

  void finish_refinement(Chain* c) {
    // best probed beam by link quality: measured SINR, capped by the map
    // prediction under the currently active beams
    int best_beam = -1;
    double quality = kNegInfDb;
    for (const auto& [beam, sinr] : c->probe_sinr_db) {
      double q = sinr;
      if (sc_.learn.apc_map_guard)
        q = std::min(q, predicted_sinr_db(c->matched_lp, c->chosen, beam));
      if (q > quality) {
        quality = q;
        best_beam = beam;
      }
    }
    // links that cannot sustain the serving floor are declined; the station
    // retries once a better AP frees up
    if (sc_.learn.apc_map_guard)
      quality -= sc_.learn.interference_reserve_db;  // headroom for entrants
    const auto mcs = mcs_for_snr(sc_.radio.mcs, quality);
    if (!mcs || quality < sc_.mac.min_serving_snr_db) {
      ++counters_["chain_low_quality"];
      chain_fail(c);
      return;
    }
    c->confirmed_beam = best_beam;
    c->confirmed_mcs = *mcs;
    c->stage = 7;
    const int ue = c->ue;
    const int mcs_idx = *mcs;
    wifi_submit(c->chosen,
                WifiJob{FrameKind::Bid, NodeRef::broadcast(),
                        [this, ue, best_beam, mcs_idx](bool, double end) {
                          Chain* c = chain_of(ue);
                          if (!c) return;
                          activate_session(c, best_beam, mcs_idx, end);
                        }});
  }

  void activate_session(Chain* c, int beam, int mcs, double bid_end) {
    // refined bad sets, relayed to the other APs over the backhaul
    refine_bad_beams_on_bid(c->plan, beam);
    for (const auto& [m, sectors] : c->plan.refined_bad)
      if (!sectors.empty()) bad_at_[m][c->chosen] = sectors;

    const int ap = c->chosen;
    Session s;
    s.ap = ap;
    s.ue = c->ue;
    s.beam = beam;
    s.mcs = mcs;
    s.matched_lp = c->matched_lp;
    s.started = bid_end;
    s.cw = sc_.mac.cwmin;
    busy_.insert(ap);
    reserved_.erase(ap);
    initiating_.erase(c->initiator);
    ue_session_[c->ue] = ap;
    chain_attempts_[c->ue] = 0;
    chain_cw_[c->ue] = sc_.mac.cwmin;
    chains_.erase(c->ue);
    sessions_[ap] = s;
    q_.schedule_in(sc_.mac.sifs60(), EventKind::Timer,
                   [this, ap] { session_cycle(ap); });
    kick();
  }

  void chain_fail(Chain* c) {
    const int ue = c->ue;
    ++c->deadline_gen;
    if (c->holds_token && !c->nav_announced) {
      // grant held but the window was never announced; hand it on
      token_held_ = false;
    }
    if (c->chosen >= 0) reserved_.erase(c->chosen);
    initiating_.erase(c->initiator);
    chains_.erase(ue);
    pump_token();

    ++chain_attempts_[ue];
    if (chain_attempts_[ue] > sc_.mac.max_retx) {
      sources_[ue].sync(q_.now());
      if (sources_[ue].has_backlog()) {
        Packet pkt{next_packet_id_++, ue, sc_.traffic.packet_bits,
                   sources_[ue].pop_head(), sc_.mac.max_retx};
        drop_retx(pkt);
      }
      chain_attempts_[ue] = 0;
      chain_cw_[ue] = sc_.mac.cwmin;
    } else {
      // failed chains usually signal a busy room, not collisions; retry on a
      // shorter horizon than the data backoff cap
      chain_cw_[ue] = std::min({2 * chain_cw_[ue], sc_.mac.cwmax, 256});
    }
    const double delay =
        (1 + static_cast<int>(chain_rng_.uniform_int(
                 static_cast<std::uint64_t>(chain_cw_[ue])))) *
        sc_.mac.slot5();
    cooldown_until_[ue] = q_.now() + delay;
    q_.schedule_in(delay, EventKind::Timer, [this] { kick(); });
    kick();
  }

  // ---- data session on the coordinated beam ----

  struct Session {
    int ap = -1, ue = -1, beam = -1, mcs = 0;
    int matched_lp = -1;
    double started = 0.0;
    Packet pkt;
    bool has_pkt = false;
    int consec_fail = 0;
    int cw = 16;
  };

  void session_cycle(int ap) {
    const auto it = sessions_.find(ap);
    if (it == sessions_.end()) return;
    Session& s = it->second;
    if (q_.now() - s.started >= sc_.mac.quantum()) {
      ++counters_["teardown_quantum"];
      teardown(ap);
      return;
    }
    if (!s.has_pkt) {
      sources_[s.ue].sync(q_.now());
      if (!sources_[s.ue].has_backlog()) {
        ++counters_["teardown_empty"];
        teardown(ap);
        return;
      }
      s.pkt = Packet{next_packet_id_++, s.ue, sc_.traffic.packet_bits,
                     sources_[s.ue].pop_head(), 0};
      s.has_pkt = true;
      ++in_service_count_;
    }
    const double dur = data_duration(s.mcs);
    const double start = q_.now();
    const double end = start + dur;
    const long long tx = m60_.begin_tx(start, end, pt_.ap_node(ap), s.beam);
    m60_.begin_rx(tx, pt_.ue_node(s.ue), min_snr_for(s.mcs),
                  link_blocked(ap, s.ue));
    const int ue = s.ue;
    const int beam = s.beam;
    q_.schedule(end, EventKind::FrameEnd, [this, ap, ue, beam, tx, start,
                                           dur] {
      m60_.end_tx(tx);
      const auto out = m60_.end_rx(tx, pt_.ue_node(ue));
      trace_frame(start, FrameKind::Data, Band::Mmw60, NodeRef::ap(ap),
                  NodeRef::ue(ue), beam, dur, out.outcome);
      count_loss(out, true);
      if (!sessions_.count(ap)) return;
      if (out.success) {
        session_ack(ap, q_.now());
      } else {
        q_.schedule_in(sc_.mac.sifs60() + sc_.mac.ctrl60() + sc_.mac.slot60(),
                       EventKind::Timer,
                       [this, ap] { session_result(ap, false, 0.0); });
      }
    });
  }

  void session_ack(int ap, double data_end) {
    const auto it = sessions_.find(ap);
    if (it == sessions_.end()) return;
    const int ue = it->second.ue;
    const double start = data_end + sc_.mac.sifs60();
    const double end = start + sc_.mac.ctrl60();
    const int listen_sector = it->second.beam;
    q_.schedule(start, EventKind::FrameStart, [this, ap, ue, start, end,
                                               data_end, listen_sector] {
      const long long tx =
          m60_.begin_tx(start, end, pt_.ue_node(ue), -1,
                        ue_response_scale(ue, ap, listen_sector));
      m60_.begin_rx(tx, pt_.ap_node(ap), control_snr(), link_blocked(ap, ue),
                    listen_sector);
      q_.schedule(end, EventKind::FrameEnd, [this, ap, ue, tx, start,
                                             data_end] {
        m60_.end_tx(tx);
        const auto out = m60_.end_rx(tx, pt_.ap_node(ap));
        trace_frame(start, FrameKind::Ack, Band::Mmw60, NodeRef::ue(ue),
                    NodeRef::ap(ap), -1, sc_.mac.ctrl60(), out.outcome);
        if (!out.success) count_loss(out, false);
        session_result(ap, out.success, data_end);
      });
    });
  }

  void session_result(int ap, bool ok, double delivery_time) {
    const auto it = sessions_.find(ap);
    if (it == sessions_.end()) return;
    Session& s = it->second;
    if (ok) {
      deliver(s.pkt, delivery_time);
      --in_service_count_;
      s.has_pkt = false;
      s.consec_fail = 0;
      s.cw = sc_.mac.cwmin;
      q_.schedule_in(sc_.mac.sifs60(), EventKind::Timer,
                     [this, ap] { session_cycle(ap); });
      return;
    }
    ++s.consec_fail;
    ++s.pkt.retx_count;
    if (s.pkt.retx_count > sc_.mac.max_retx) {
      drop_retx(s.pkt);
      --in_service_count_;
      s.has_pkt = false;
    }
    if (s.consec_fail >= sc_.mac.session_abort_failures) {
      ++counters_["teardown_abort"];
      teardown(ap);
      return;
    }
    s.cw = std::min(2 * s.cw, sc_.mac.cwmax);
    const double delay =
        sc_.mac.sifs60() +
        session_rng_[ap]->uniform_int(static_cast<std::uint64_t>(s.cw)) *
            sc_.mac.slot60();
    q_.schedule_in(delay, EventKind::Timer, [this, ap] { session_cycle(ap); });
  }

  void teardown(int ap) {
    const auto it = sessions_.find(ap);
    if (it == sessions_.end()) return;
    Session& s = it->second;
    if (s.has_pkt) {
      sources_[s.ue].push_front(s.pkt.arrival_time);
      --in_service_count_;
    }
    ue_session_[s.ue] = -1;
    busy_.erase(ap);
    for (auto& [m, victims] : bad_at_) victims.erase(ap);
    sessions_.erase(it);
    kick();
  }

  const FingerprintDatabases dbs_;
  const std::vector<std::vector<ExemplarSet>> exemplars_;
  Medium5 m5_;
  std::vector<WifiNode> wifi_;
  std::map<int, std::unique_ptr<Chain>> chains_;  // keyed by UE
  std::map<int, Session> sessions_;               // keyed by AP
  std::set<int> busy_, reserved_, initiating_;
  std::map<int, std::map<int, std::vector<int>>> bad_at_;  // ap -> victim -> bad
  std::deque<int> token_queue_;
  bool token_held_ = false;
  std::uint64_t grant_seq_ = 0;
  std::uint64_t current_grant_ = 0;
  std::vector<char> ue_mmw_on_;
  std::vector<int> ue_session_;
  std::vector<int> chain_attempts_;
  std::vector<int> ue_lp_cache_;
  std::vector<int> chain_cw_;
  std::vector<double> cooldown_until_;
  std::vector<std::unique_ptr<Rng>> session_rng_;
  std::vector<NavWindow> nav_windows_;
  std::vector<double> p_all_mw_;  // [lp][ap][sector]
  long long guard_declines_ = 0;
  std::map<std::string, long long> counters_;
  Rng meas_rng_;
  Rng chain_rng_;
  std::uint64_t wake_gen_ = 0;
};

}  // namespace mmwsim
