#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "mmwsim/errors.hpp"
#include "mmwsim/learning.hpp"

namespace mmwsim {

// Flat-file sentinel for null best-sector power; never a reachable dBm value
// in this model, and -inf is never written out.
inline constexpr double kDbFileSentinel = -999.0;
inline constexpr const char* kDbMagic = "mmwdb";
inline constexpr int kDbVersion = 1;

inline std::string format_dbm(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Header (L, N, D per AP) followed by row-major psi, phi, p_off tables.
inline std::string serialize_databases(const FingerprintDatabases& db,
                                       const std::vector<int>& sectors_per_ap) {
  if (static_cast<int>(sectors_per_ap.size()) != db.num_aps)
    throw ConfigError("sectors_per_ap length must match AP count");
  std::ostringstream out;
  out << kDbMagic << ' ' << kDbVersion << '\n';
  out << db.num_lps << ' ' << db.num_aps << '\n';
  for (int n = 0; n < db.num_aps; ++n)
    out << sectors_per_ap[n] << (n + 1 == db.num_aps ? '\n' : ' ');
  for (int l = 0; l < db.num_lps; ++l)
    for (int n = 0; n < db.num_aps; ++n)
      out << format_dbm(db.psi[l][n]) << (n + 1 == db.num_aps ? '\n' : ' ');
  for (int l = 0; l < db.num_lps; ++l)
    for (int n = 0; n < db.num_aps; ++n)
      out << db.phi[l][n] << (n + 1 == db.num_aps ? '\n' : ' ');
  for (int l = 0; l < db.num_lps; ++l) {
    for (int n = 0; n < db.num_aps; ++n) {
      const double v = db.p_off[l][n];
      out << (v == kNegInfDb ? format_dbm(kDbFileSentinel) : format_dbm(v))
          << (n + 1 == db.num_aps ? '\n' : ' ');
    }
  }
  return out.str();
}

struct LoadedDatabases {
  FingerprintDatabases db;
  std::vector<int> sectors_per_ap;
};

inline LoadedDatabases deserialize_databases(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kDbMagic || version != kDbVersion)
    throw ConfigError("not a fingerprint database file");
  LoadedDatabases out;
  auto& db = out.db;
  if (!(in >> db.num_lps >> db.num_aps) || db.num_lps < 1 || db.num_aps < 1)
    throw ConfigError("bad database dimensions");
  out.sectors_per_ap.resize(db.num_aps);
  for (int n = 0; n < db.num_aps; ++n)
    if (!(in >> out.sectors_per_ap[n]))
      throw ConfigError("truncated sector counts");

  db.psi.assign(db.num_lps, std::vector<double>(db.num_aps, 0.0));
  db.phi.assign(db.num_lps, std::vector<int>(db.num_aps, kNullSector));
  db.p_off.assign(db.num_lps, std::vector<double>(db.num_aps, kNegInfDb));
  for (int l = 0; l < db.num_lps; ++l)
    for (int n = 0; n < db.num_aps; ++n)
      if (!(in >> db.psi[l][n])) throw ConfigError("truncated psi table");
  for (int l = 0; l < db.num_lps; ++l)
    for (int n = 0; n < db.num_aps; ++n)
      if (!(in >> db.phi[l][n])) throw ConfigError("truncated phi table");
  for (int l = 0; l < db.num_lps; ++l) {
    for (int n = 0; n < db.num_aps; ++n) {
      double v = 0.0;
      if (!(in >> v)) throw ConfigError("truncated p_off table");
      db.p_off[l][n] = (v == kDbFileSentinel) ? kNegInfDb : v;
    }
  }
  db.validate();
  return out;
}

}  // namespace mmwsim
