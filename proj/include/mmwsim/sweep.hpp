#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mmwsim/config.hpp"
#include "mmwsim/db_io.hpp"
#include "mmwsim/run.hpp"

namespace mmwsim {

inline constexpr const char* kResultsHeader =
    "scenario_id,protocol,num_aps,num_ues,seed,horizon_s,throughput_gbps,"
    "avg_delay_ms,collisions,dropped,bhi_overhead,status";

struct SweepPoint {
  Protocol protocol;
  int ap_count = 0;
  std::uint64_t seed = 0;
  std::string scenario_id;
  std::string status = "ok";
  MetricsRecord metrics;
  Trace trace{false};
};

inline std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string csv_row(const SweepPoint& p, int num_ues,
                           double horizon_s) {
  std::ostringstream o;
  o << p.scenario_id << ',' << to_string(p.protocol) << ',' << p.ap_count
    << ',' << num_ues << ',' << p.seed << ',' << csv_double(horizon_s) << ',';
  if (p.status == "ok") {
    const auto s = compute_metrics(p.metrics);
    o << csv_double(s.throughput_gbps) << ',';
    if (s.avg_delay_s) o << csv_double(*s.avg_delay_s * 1e3);
    o << ',' << p.metrics.collision_count << ',' << p.metrics.dropped << ','
      << csv_double(p.metrics.bhi_overhead_fraction);
  } else {
    o << ",,,,";
  }
  o << ',' << p.status;
  return o.str();
}

struct SweepOutput {
  std::vector<SweepPoint> points;  // deterministic (protocol, aps, seed) order
  std::string csv;                 // header + one row per point
  bool all_ok = true;
  double wall_clock_s = 0.0;
};

// Runs the full (protocol x ap_count x seed) grid. Points execute on a
// bounded worker pool; rows are emitted in grid order regardless of
// completion order.
inline SweepOutput run_sweep(const RunConfig& cfg, unsigned workers = 0) {
  SweepOutput out;
  for (const auto protocol : cfg.run.protocols) {
    for (const int ap_count : cfg.run.ap_counts) {
      for (const auto seed : cfg.run.seeds) {
        SweepPoint p;
        p.protocol = protocol;
        p.ap_count = ap_count;
        p.seed = seed;
        p.scenario_id = std::string(to_string(protocol)) + "-" +
                        std::to_string(ap_count) + "ap-seed" +
                        std::to_string(seed);
        out.points.push_back(std::move(p));
      }
    }
  }

  if (workers == 0) {
    workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
  }
  workers = std::min<unsigned>(workers, out.points.size());

  const auto t0 = std::chrono::steady_clock::now();
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= out.points.size()) return;
      SweepPoint& p = out.points[i];
      try {
        const Scenario sc =
            build_scenario(cfg, p.ap_count, p.seed, p.protocol);
        RunResult res = run_scenario(sc, p.protocol);
        p.metrics = res.metrics;
        p.trace = std::move(res.trace);
      } catch (const std::exception& e) {
        std::string msg = e.what();
        for (auto& c : msg)
          if (c == ',' || c == '\n') c = ';';
        p.status = "error: " + msg;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  out.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  std::ostringstream csv;
  csv << kResultsHeader << '\n';
  for (const auto& p : out.points) {
    csv << csv_row(p, cfg.env.num_ues, cfg.run.horizon_s) << '\n';
    if (p.status != "ok") out.all_ok = false;
  }
  out.csv = csv.str();
  return out;
}

struct BuildDbOutput {
  std::string file_text;
  std::string summary;
};

// Offline phase: build the fingerprint databases for the configured
// environment and report per-AP group and exemplar counts.
inline BuildDbOutput build_db_command(const RunConfig& cfg) {
  const Scenario sc = build_scenario(cfg, cfg.env.num_aps,
                                     cfg.run.seeds.front(),
                                     Protocol::DualBand);
  const auto learned = build_learning(sc.env, sc.radio, sc.learn);
  std::vector<int> sectors;
  for (const auto& ap : sc.env.aps) sectors.push_back(ap.num_sectors);

  BuildDbOutput out;
  out.file_text = serialize_databases(learned.dbs, sectors);
  std::ostringstream s;
  s << "aps=" << sc.env.num_aps() << " lps=" << sc.env.num_lps() << "\n";
  for (int n = 0; n < sc.env.num_aps(); ++n) {
    int covered = 0;
    for (int l = 0; l < learned.dbs.num_lps; ++l)
      if (learned.dbs.has_phi(l, n)) ++covered;
    s << "ap" << n << ": groups=" << learned.exemplars[n].size()
      << " covered_lps=" << covered << " exemplars=";
    std::size_t total = 0;
    for (std::size_t g = 0; g < learned.exemplars[n].size(); ++g) {
      if (g) s << '+';
      s << learned.exemplars[n][g].exemplars.size();
      total += learned.exemplars[n][g].exemplars.size();
    }
    s << " (total " << total << ")\n";
  }
  out.summary = s.str();
  return out;
}

}  // namespace mmwsim
