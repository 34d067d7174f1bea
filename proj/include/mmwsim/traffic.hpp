#pragma once

#include <deque>
#include <limits>

#include "mmwsim/errors.hpp"
#include "mmwsim/rng.hpp"

namespace mmwsim {

// Poisson packet arrivals for one flow, materialized lazily into a bounded
// FIFO. The stream is a pure function of its seed, so the queue state at any
// time does not depend on when sync() is called.
class PoissonSource {
 public:
  PoissonSource(double rate_bps, long long packet_bits, int queue_limit,
                Rng rng)
      : mean_interarrival_s_(static_cast<double>(packet_bits) / rate_bps),
        queue_limit_(queue_limit),
        rng_(rng) {
    if (!(rate_bps > 0.0)) throw ConfigError("offered load must be positive");
    next_arrival_ = rng_.exponential(mean_interarrival_s_);
  }

  double mean_interarrival_s() const { return mean_interarrival_s_; }
  double next_arrival_time() const { return next_arrival_; }

  // Materialize all arrivals up to and including t.
  void sync(double t) {
    while (next_arrival_ <= t) {
      ++generated_;
      if (static_cast<int>(queue_.size()) < queue_limit_) {
        queue_.push_back(next_arrival_);
      } else {
        ++dropped_overflow_;
      }
      next_arrival_ += rng_.exponential(mean_interarrival_s_);
    }
  }

  bool has_backlog() const { return !queue_.empty(); }
  double head_arrival() const { return queue_.front(); }

  double pop_head() {
    const double t = queue_.front();
    queue_.pop_front();
    return t;
  }

  // Returns an aborted in-service packet to the head of the line; bypasses
  // the cap since the packet was already admitted.
  void push_front(double arrival) { queue_.push_front(arrival); }

  long long generated() const { return generated_; }
  long long dropped_overflow() const { return dropped_overflow_; }
  long long queue_len() const { return static_cast<long long>(queue_.size()); }

 private:
  double mean_interarrival_s_;
  int queue_limit_;
  Rng rng_;
  double next_arrival_ = 0.0;
  long long generated_ = 0;
  long long dropped_overflow_ = 0;
  std::deque<double> queue_;
};

}  // namespace mmwsim
