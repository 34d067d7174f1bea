#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include "mmwsim/errors.hpp"

namespace mmwsim {

enum class EventKind {
  FrameStart,
  FrameEnd,
  BackoffExpiry,
  PacketArrival,
  BlockageToggle,
  Timer,
};

struct SimEvent {
  double time = 0.0;
  std::uint64_t seq = 0;  // insertion order, ties on equal times
  EventKind kind = EventKind::Timer;
  std::function<void()> fn;
};

struct SimEventLater {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

// Deterministic discrete-event clock: strict (time, seq) order, and the
// clock never moves backwards.
class EventQueue {
 public:
  double now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  std::size_t processed() const { return processed_; }

  void schedule(double time, EventKind kind, std::function<void()> fn) {
    if (!(time >= now_) || !std::isfinite(time))
      throw SimFault("event scheduled in the past: t=" + std::to_string(time) +
                     " now=" + std::to_string(now_));
    heap_.push(SimEvent{time, next_seq_++, kind, std::move(fn)});
  }

  void schedule_in(double delay, EventKind kind, std::function<void()> fn) {
    schedule(now_ + delay, kind, std::move(fn));
  }

  // Runs everything scheduled up to and including `horizon`.
  void run_until(double horizon) {
    while (!heap_.empty() && heap_.top().time <= horizon) {
      // std::priority_queue::top is const; move out via const_cast to avoid
      // copying the closure.
      SimEvent ev = std::move(const_cast<SimEvent&>(heap_.top()));
      heap_.pop();
      now_ = ev.time;
      ++processed_;
      ev.fn();
    }
    now_ = horizon;
  }

 private:
  double now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::size_t processed_ = 0;
  std::priority_queue<SimEvent, std::vector<SimEvent>, SimEventLater> heap_;
};

}  // namespace mmwsim
