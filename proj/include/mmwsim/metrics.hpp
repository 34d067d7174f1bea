#pragma once

#include <optional>
#include <string>

#include "mmwsim/errors.hpp"

namespace mmwsim {

struct MetricsRecord {
  std::string protocol;
  double horizon_s = 0.0;

  long long delivered_bits = 0;
  long long generated = 0;
  long long delivered = 0;
  long long dropped = 0;
  long long in_flight = 0;
  double sum_delay_s = 0.0;
  long long collision_count = 0;         // receptions lost to interference
  double bhi_overhead_fraction = 0.0;    // training overhead ratio

  // drop and loss breakdown
  long long dropped_overflow = 0;
  long long dropped_retx = 0;
  long long data_interference_losses = 0;  // DATA frames failed by interference
  long long blocked_losses = 0;
  long long brp_fallbacks = 0;

  void check_conservation() const {
    if (generated != delivered + dropped + in_flight)
      throw SimFault("packet conservation violated: generated=" +
                     std::to_string(generated) + " delivered=" +
                     std::to_string(delivered) + " dropped=" +
                     std::to_string(dropped) + " in_flight=" +
                     std::to_string(in_flight));
    if (sum_delay_s < 0.0) throw SimFault("negative delay sum");
  }
};

struct SummaryMetrics {
  double throughput_gbps = 0.0;
  std::optional<double> avg_delay_s;  // absent when nothing was delivered
};

inline SummaryMetrics compute_metrics(const MetricsRecord& rec) {
  SummaryMetrics out;
  if (rec.horizon_s > 0.0)
    out.throughput_gbps = rec.delivered_bits / rec.horizon_s / 1e9;
  if (rec.delivered > 0) out.avg_delay_s = rec.sum_delay_s / rec.delivered;
  return out;
}

// Aggregate throughput estimate for N concurrent links given the single-link
// throughput and its training overhead ratio.
inline double analytic_rn(int n, double alpha1, double r1) {
  if (!(n * alpha1 < 1.0))
    throw std::domain_error("analytic_rn requires N * alpha1 < 1");
  return (1.0 - n * alpha1) * n * r1;
}

}  // namespace mmwsim
