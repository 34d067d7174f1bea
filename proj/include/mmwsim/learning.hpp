#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "mmwsim/errors.hpp"
#include "mmwsim/geometry.hpp"
#include "mmwsim/radio.hpp"
#include "mmwsim/rng.hpp"

namespace mmwsim {

inline constexpr int kNullSector = -1;

// Offline radio maps: psi is the Wi-Fi fingerprint table, phi the best mmw
// sector per (LP, AP) with kNullSector where the AP cannot cover the LP, and
// p_off the received power at the best sector (zero linear power when null,
// kept as -inf dBm in memory).
struct FingerprintDatabases {
  int num_lps = 0;
  int num_aps = 0;
  std::vector<std::vector<double>> psi;      // [lp][ap], dBm
  std::vector<std::vector<int>> phi;         // [lp][ap], sector id or null
  std::vector<std::vector<double>> p_off;    // [lp][ap], dBm or -inf

  bool has_phi(int lp, int ap) const { return phi[lp][ap] != kNullSector; }

  void validate() const {
    if (static_cast<int>(psi.size()) != num_lps ||
        static_cast<int>(phi.size()) != num_lps ||
        static_cast<int>(p_off.size()) != num_lps)
      throw ConfigError("fingerprint tables disagree on LP count");
    for (int l = 0; l < num_lps; ++l) {
      if (static_cast<int>(psi[l].size()) != num_aps ||
          static_cast<int>(phi[l].size()) != num_aps ||
          static_cast<int>(p_off[l].size()) != num_aps)
        throw ConfigError("fingerprint tables disagree on AP count");
      for (int n = 0; n < num_aps; ++n) {
        const bool null_phi = phi[l][n] == kNullSector;
        const bool zero_p = p_off[l][n] == kNegInfDb;
        if (null_phi != zero_p)
          throw ConfigError("phi/p_off null entries out of sync");
      }
    }
  }
};

// Best sector by brute argmax over the AP's sectors, ties to the lowest id;
// null when even the best sector cannot reach the control SNR.
inline FingerprintDatabases build_databases(const Environment& env,
                                            const RadioConfig& rc) {
  FingerprintDatabases db;
  db.num_lps = env.num_lps();
  db.num_aps = env.num_aps();
  const double noise_dbm = noise_power_dbm(rc.noise);
  const double floor_dbm = noise_dbm + rc.mcs.control_min_snr_db();

  db.psi.assign(db.num_lps, std::vector<double>(db.num_aps, 0.0));
  db.phi.assign(db.num_lps, std::vector<int>(db.num_aps, kNullSector));
  db.p_off.assign(db.num_lps, std::vector<double>(db.num_aps, kNegInfDb));

  for (int l = 0; l < db.num_lps; ++l) {
    const Point3& lp = env.learning_points[l];
    for (int n = 0; n < db.num_aps; ++n) {
      const ApNode& ap = env.aps[n];
      db.psi[l][n] = wifi_rss_dbm(ap, lp, rc);
      int best = kNullSector;
      double best_p = kNegInfDb;
      for (int d = 1; d <= ap.num_sectors; ++d) {
        const double p =
            rx_power_mmw(ap, d, lp, rc.pattern, rc.freq_mmw_hz, rc.rx_gain_dbi);
        if (p > best_p) {
          best_p = p;
          best = d;
        }
      }
      if (best != kNullSector && best_p >= floor_dbm) {
        db.phi[l][n] = best;
        db.p_off[l][n] = best_p;
      }
    }
  }
  return db;
}

// Partition of LPs with a non-null best sector for this AP.
inline std::map<int, std::vector<int>> group_by_best_sector(
    const FingerprintDatabases& db, int ap_id) {
  if (ap_id < 0 || ap_id >= db.num_aps)
    throw ConfigError("ap_id out of range");
  std::map<int, std::vector<int>> groups;
  for (int l = 0; l < db.num_lps; ++l)
    if (db.has_phi(l, ap_id)) groups[db.phi[l][ap_id]].push_back(l);
  return groups;
}

struct AffinityPropagationParams {
  double damping = 0.5;
  int max_iter = 200;
  int convergence_window = 15;
  std::optional<double> preference;  // default: median of similarities
};

struct AffinityPropagationResult {
  std::vector<int> exemplars;   // ascending indices into the input
  std::vector<int> assignment;  // per point, an index from `exemplars`
  bool converged = false;
  int iterations = 0;
};

// Standard responsibility/availability message passing on a dense similarity
// table. A hash-keyed perturbation far below the data scale breaks the exact
// degeneracies of symmetric inputs while keeping the result a pure function
// of the inputs.
inline AffinityPropagationResult affinity_propagation(
    const std::vector<std::vector<double>>& similarity,
    const AffinityPropagationParams& params = {}) {
  const int n = static_cast<int>(similarity.size());
  if (n == 0) throw ConfigError("empty similarity table");
  for (const auto& row : similarity)
    if (static_cast<int>(row.size()) != n)
      throw ConfigError("similarity table must be square");
  for (const auto& row : similarity)
    for (double v : row)
      if (!std::isfinite(v)) throw ConfigError("similarity must be finite");
  if (!(params.damping >= 0.5 && params.damping < 1.0))
    throw ConfigError("damping must be in [0.5, 1)");

  AffinityPropagationResult res;
  if (n == 1) {
    res.exemplars = {0};
    res.assignment = {0};
    res.converged = true;
    return res;
  }

  double pref;
  if (params.preference) {
    pref = *params.preference;
  } else {
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(n) * (n - 1));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        if (i != k) vals.push_back(similarity[i][k]);
    std::sort(vals.begin(), vals.end());
    const std::size_t m = vals.size();
    pref = (m % 2) ? vals[m / 2] : 0.5 * (vals[m / 2 - 1] + vals[m / 2]);
  }

  // A graded preference far below the data scale breaks exact symmetric
  // degeneracies deterministically, favoring lower indices as exemplars.
  std::vector<std::vector<double>> s(n, std::vector<double>(n, 0.0));
  const double eps = 1e-9 * (1.0 + std::abs(pref));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      s[i][k] = (i == k) ? pref - eps * i : similarity[i][k];

  std::vector<std::vector<double>> r(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  const double lam = params.damping;

  std::vector<char> is_exemplar(n, 0);
  int stable = 0;
  for (res.iterations = 0; res.iterations < params.max_iter;
       ++res.iterations) {
    // responsibilities
    for (int i = 0; i < n; ++i) {
      double max1 = -std::numeric_limits<double>::infinity();
      double max2 = max1;
      int arg1 = -1;
      for (int k = 0; k < n; ++k) {
        const double v = a[i][k] + s[i][k];
        if (v > max1) {
          max2 = max1;
          max1 = v;
          arg1 = k;
        } else if (v > max2) {
          max2 = v;
        }
      }
      for (int k = 0; k < n; ++k) {
        const double target = s[i][k] - (k == arg1 ? max2 : max1);
        r[i][k] = lam * r[i][k] + (1.0 - lam) * target;
      }
    }
    // availabilities
    for (int k = 0; k < n; ++k) {
      double sum_pos = 0.0;
      for (int i = 0; i < n; ++i)
        if (i != k) sum_pos += std::max(0.0, r[i][k]);
      for (int i = 0; i < n; ++i) {
        double target;
        if (i == k) {
          target = sum_pos;
        } else {
          target = std::min(
              0.0, r[k][k] + sum_pos - std::max(0.0, r[i][k]));
        }
        a[i][k] = lam * a[i][k] + (1.0 - lam) * target;
      }
    }
    // exemplar set stability; an empty set does not count as converged
    bool changed = false;
    int count = 0;
    for (int k = 0; k < n; ++k) {
      const char e = (r[k][k] + a[k][k] > 0.0) ? 1 : 0;
      count += e;
      if (e != is_exemplar[k]) {
        is_exemplar[k] = e;
        changed = true;
      }
    }
    stable = changed ? 0 : stable + 1;
    if (stable >= params.convergence_window && count > 0) {
      res.converged = true;
      ++res.iterations;
      break;
    }
  }

  for (int k = 0; k < n; ++k)
    if (is_exemplar[k]) res.exemplars.push_back(k);
  if (res.exemplars.empty()) {
    int best = 0;
    for (int k = 1; k < n; ++k)
      if (r[k][k] + a[k][k] > r[best][best] + a[best][best]) best = k;
    res.exemplars = {best};
  }

  res.assignment.assign(n, res.exemplars.front());
  for (int i = 0; i < n; ++i) {
    if (std::binary_search(res.exemplars.begin(), res.exemplars.end(), i)) {
      res.assignment[i] = i;
      continue;
    }
    double best_s = -std::numeric_limits<double>::infinity();
    int best_k = res.exemplars.front();
    for (int k : res.exemplars) {
      if (similarity[i][k] > best_s) {
        best_s = similarity[i][k];
        best_k = k;
      }
    }
    res.assignment[i] = best_k;
  }
  return res;
}

// One exemplar family per (AP, best sector): the representative Wi-Fi
// fingerprints selected by affinity propagation within the sector group.
struct ExemplarSet {
  int ap_id = 0;
  int sector_id = 0;
  std::vector<std::vector<double>> exemplars;   // fingerprint rows
  std::vector<int> exemplar_lps;                // LP index per exemplar
  std::vector<std::vector<int>> member_lps;     // LP indices per cluster
  bool converged = true;

  std::vector<int> all_members() const {
    std::vector<int> out;
    for (const auto& c : member_lps) out.insert(out.end(), c.begin(), c.end());
    std::sort(out.begin(), out.end());
    return out;
  }
};

inline double sq_distance(const std::vector<double>& a,
                          const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline std::vector<ExemplarSet> build_exemplars(
    const FingerprintDatabases& db, int ap_id,
    const AffinityPropagationParams& params = {}) {
  std::vector<ExemplarSet> out;
  for (const auto& [sector, lps] : group_by_best_sector(db, ap_id)) {
    const int g = static_cast<int>(lps.size());
    std::vector<std::vector<double>> sim(g, std::vector<double>(g, 0.0));
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j)
        sim[i][j] = -sq_distance(db.psi[lps[i]], db.psi[lps[j]]);
    const auto ap_res = affinity_propagation(sim, params);

    ExemplarSet set;
    set.ap_id = ap_id;
    set.sector_id = sector;
    set.converged = ap_res.converged;
    set.member_lps.resize(ap_res.exemplars.size());
    for (std::size_t e = 0; e < ap_res.exemplars.size(); ++e) {
      const int lp = lps[ap_res.exemplars[e]];
      set.exemplar_lps.push_back(lp);
      set.exemplars.push_back(db.psi[lp]);
    }
    for (int i = 0; i < g; ++i) {
      const auto it = std::find(ap_res.exemplars.begin(),
                                ap_res.exemplars.end(), ap_res.assignment[i]);
      set.member_lps[static_cast<std::size_t>(
                         it - ap_res.exemplars.begin())]
          .push_back(lps[i]);
    }
    out.push_back(std::move(set));
  }
  return out;
}

}  // namespace mmwsim
