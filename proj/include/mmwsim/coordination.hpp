#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "mmwsim/errors.hpp"
#include "mmwsim/learning.hpp"
#include "mmwsim/radio.hpp"

namespace mmwsim {

struct OnlineFingerprint {
  std::vector<double> rss;  // dBm, one entry per AP
  int ue_id = 0;
  double timestamp = 0.0;
};

// Per-link plan: ordered best-beam shortlist plus, per foreign AP, the beam
// candidates there that would degrade this link (keyed by which of our beams
// they were computed against), and the subset confirmed by the BID broadcast.
struct BeamPlan {
  int ap_id = 0;
  int ue_id = 0;
  std::vector<int> best_beams;  // sector ids, ordered, length <= X
  // other_ap -> (our beam -> bad sectors of other_ap)
  std::map<int, std::map<int, std::vector<int>>> bad_candidates;
  // other_ap -> bad sectors confirmed against the announced beam
  std::map<int, std::vector<int>> refined_bad;
};

// Nearest-exemplar AP selection with a distance gate; ties go to the lowest
// AP id. Absence is a valid outcome (the caller queues).
inline std::optional<int> select_ap(
    const OnlineFingerprint& fp,
    const std::vector<std::vector<ExemplarSet>>& exemplars_per_ap,
    const std::set<int>& busy_aps, double gate_sq_db) {
  std::optional<int> best_ap;
  double best_d = std::numeric_limits<double>::infinity();
  for (int n = 0; n < static_cast<int>(exemplars_per_ap.size()); ++n) {
    if (busy_aps.count(n)) continue;
    double d_min = std::numeric_limits<double>::infinity();
    for (const auto& set : exemplars_per_ap[n])
      for (const auto& ex : set.exemplars)
        d_min = std::min(d_min, sq_distance(fp.rss, ex));
    if (d_min <= gate_sq_db && d_min < best_d) {
      best_d = d_min;
      best_ap = n;
    }
  }
  return best_ap;
}

// Sector shortlist sorted by the minimum exemplar distance, ascending, ties
// to the lower sector id, truncated to X.
inline std::vector<int> estimate_best_beams(
    const OnlineFingerprint& fp, const std::vector<ExemplarSet>& ap_exemplars,
    int x_best) {
  if (ap_exemplars.empty())
    throw CoverageError("AP has no exemplar sets");
  std::vector<std::pair<double, int>> scored;
  scored.reserve(ap_exemplars.size());
  for (const auto& set : ap_exemplars) {
    double d_min = std::numeric_limits<double>::infinity();
    for (const auto& ex : set.exemplars)
      d_min = std::min(d_min, sq_distance(fp.rss, ex));
    scored.emplace_back(d_min, set.sector_id);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<int> out;
  for (const auto& [d, sector] : scored) {
    if (static_cast<int>(out.size()) >= x_best) break;
    out.push_back(sector);
  }
  return out;
}

// Bad-beam candidates of AP m against each shortlisted beam of AP n: a beam
// of m is registered when at least one overlapped LP (same best sectors in
// phi for both APs) sees its MCS step down once m's offline power is added
// as interference.
inline std::map<int, std::vector<int>> bad_beam_candidates(
    const FingerprintDatabases& db, int ap_n, const std::vector<int>& beams_n,
    int ap_m, const McsTable& mcs, double noise_dbm) {
  if (ap_m == ap_n) throw ConfigError("interfering AP must differ");
  const double noise_mw = dbm_to_mw(noise_dbm);

  std::set<int> m_sectors;
  for (int l = 0; l < db.num_lps; ++l)
    if (db.has_phi(l, ap_m)) m_sectors.insert(db.phi[l][ap_m]);

  std::map<int, std::vector<int>> out;
  for (int beam : beams_n) {
    std::vector<int> bad;
    for (int d_m : m_sectors) {
      bool degraded = false;
      for (int z = 0; z < db.num_lps && !degraded; ++z) {
        if (db.phi[z][ap_n] != beam || db.phi[z][ap_m] != d_m) continue;
        const double p_n = dbm_to_mw(db.p_off[z][ap_n]);
        const double p_m = dbm_to_mw(db.p_off[z][ap_m]);
        const int rank_snr = mcs.rank_for_snr(mw_to_dbm(p_n) - noise_dbm);
        const int rank_sinr =
            mcs.rank_for_snr(mw_to_dbm(p_n) - mw_to_dbm(p_m + noise_mw));
        if (rank_sinr < rank_snr) degraded = true;
      }
      if (degraded) bad.push_back(d_m);
    }
    out[beam] = std::move(bad);
  }
  return out;
}

// On a BID announcing the confirmed beam, keep only the candidates computed
// against it.
inline void refine_bad_beams_on_bid(BeamPlan& plan, int confirmed_beam) {
  if (std::find(plan.best_beams.begin(), plan.best_beams.end(),
                confirmed_beam) == plan.best_beams.end())
    throw ProtocolError("BID for a beam outside the announced shortlist");
  plan.refined_bad.clear();
  for (const auto& [other_ap, per_beam] : plan.bad_candidates) {
    const auto it = per_beam.find(confirmed_beam);
    plan.refined_bad[other_ap] =
        (it != per_beam.end()) ? it->second : std::vector<int>{};
  }
}

struct BrpResult {
  int beam = 0;
  double rx_power_dbm = kNegInfDb;
  int probed_beams = 0;
  bool used_fallback = false;  // elimination left nothing; probed full list
};

// Probe the surviving candidates against the true channel and keep the
// strongest. An empty post-elimination list falls back to the unfiltered
// shortlist rather than refusing service.
inline BrpResult brp_refine(
    const std::vector<int>& best_beams, const std::vector<int>& eliminated,
    const std::function<double(int)>& true_rx_power_dbm) {
  std::vector<int> candidates;
  for (int b : best_beams)
    if (std::find(eliminated.begin(), eliminated.end(), b) ==
        eliminated.end())
      candidates.push_back(b);
  BrpResult res;
  if (candidates.empty()) {
    candidates = best_beams;
    res.used_fallback = true;
  }
  if (candidates.empty()) throw CoverageError("no beams to refine");
  res.probed_beams = static_cast<int>(candidates.size());
  res.beam = candidates.front();
  for (int b : candidates) {
    const double p = true_rx_power_dbm(b);
    if (p > res.rx_power_dbm) {
      res.rx_power_dbm = p;
      res.beam = b;
    }
  }
  return res;
}

}  // namespace mmwsim
