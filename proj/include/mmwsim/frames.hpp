#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

namespace mmwsim {

enum class Band { Wifi5, Mmw60, Wire };

inline const char* to_string(Band b) {
  switch (b) {
    case Band::Wifi5: return "5GHz";
    case Band::Mmw60: return "60GHz";
    case Band::Wire: return "wire";
  }
  return "?";
}

enum class FrameKind {
  Ssw,
  SswFeedback,
  TriggerSweep,
  RssiFeedback,
  Cli,
  Rts,
  Cts,
  Bli,
  Api,
  WifiMReq,
  WifiMResp,
  SwitchOn,
  NavSet,
  Brp,
  Fbk,
  Bid,
  Data,
  Ack,
};

inline const char* to_string(FrameKind k) {
  switch (k) {
    case FrameKind::Ssw: return "SSW";
    case FrameKind::SswFeedback: return "SSW-Feedback";
    case FrameKind::TriggerSweep: return "TriggerSweep";
    case FrameKind::RssiFeedback: return "RSSI-Feedback";
    case FrameKind::Cli: return "CLI";
    case FrameKind::Rts: return "RTS";
    case FrameKind::Cts: return "CTS";
    case FrameKind::Bli: return "BLI";
    case FrameKind::Api: return "API";
    case FrameKind::WifiMReq: return "WiFi-M-Req";
    case FrameKind::WifiMResp: return "WiFi-M-Resp";
    case FrameKind::SwitchOn: return "SwitchOn";
    case FrameKind::NavSet: return "NAVset";
    case FrameKind::Brp: return "BRP";
    case FrameKind::Fbk: return "FBK";
    case FrameKind::Bid: return "BID";
    case FrameKind::Data: return "DATA";
    case FrameKind::Ack: return "ACK";
  }
  return "?";
}

// Node addressing: APs, UEs, the central controller (BBU or APC), broadcast.
struct NodeRef {
  enum Type { Ap, Ue, Controller, Broadcast } type = Broadcast;
  int idx = -1;

  static NodeRef ap(int i) { return {Ap, i}; }
  static NodeRef ue(int i) { return {Ue, i}; }
  static NodeRef controller() { return {Controller, 0}; }
  static NodeRef broadcast() { return {Broadcast, -1}; }

  std::string str() const {
    switch (type) {
      case Ap: return "ap" + std::to_string(idx);
      case Ue: return "ue" + std::to_string(idx);
      case Controller: return "ctrl";
      case Broadcast: return "*";
    }
    return "?";
  }
};

struct MacFrame {
  FrameKind kind = FrameKind::Data;
  Band band = Band::Mmw60;
  NodeRef src;
  NodeRef dst;
  int sector_id = -1;  // 60 GHz only
  double duration = 0.0;
  long long payload_bits = 0;  // DATA only
};

enum class Outcome { Ok, Collision, Blocked, Lost, Sent };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Ok: return "ok";
    case Outcome::Collision: return "collision";
    case Outcome::Blocked: return "blocked";
    case Outcome::Lost: return "lost";
    case Outcome::Sent: return "sent";
  }
  return "?";
}

struct TraceRow {
  double time = 0.0;
  FrameKind kind = FrameKind::Data;
  Band band = Band::Mmw60;
  NodeRef src;
  NodeRef dst;
  int sector = -1;
  double duration = 0.0;
  Outcome outcome = Outcome::Sent;
};

class Trace {
 public:
  explicit Trace(bool enabled = false) : enabled_(enabled) {}

  bool enabled() const { return enabled_; }
  const std::vector<TraceRow>& rows() const { return rows_; }

  void add(const TraceRow& row) {
    if (enabled_) rows_.push_back(row);
  }

  static std::string header() {
    return "time_s,kind,band,src,dst,sector,duration_s,outcome";
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << header() << '\n';
    char buf[64];
    for (const auto& r : rows_) {
      std::snprintf(buf, sizeof(buf), "%.9f", r.time);
      out << buf << ',' << to_string(r.kind) << ',' << to_string(r.band) << ','
          << r.src.str() << ',' << r.dst.str() << ',';
      if (r.sector >= 0) out << r.sector;
      std::snprintf(buf, sizeof(buf), "%.9f", r.duration);
      out << ',' << buf << ',' << to_string(r.outcome) << '\n';
    }
    return out.str();
  }

 private:
  bool enabled_;
  std::vector<TraceRow> rows_;
};

}  // namespace mmwsim
