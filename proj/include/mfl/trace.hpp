// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Run traces: an ordered, replayable log of everything an online algorithm
// did. Serialized as JSON lines: one header line, one line per event, and a
// closing "final" line with the cost breakdown and a state checksum.

#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mfl/core.hpp"

namespace mfl {

enum class EventType {
  kArrival,
  kCut,
  kIncrease,
  kRoundingPurchase,
  kFallbackPurchase,
  kFreePurchase,
  kOpen,
  kServe,
};

inline std::string_view EventTypeName(EventType type) {
  switch (type) {
    case EventType::kArrival: return "arrival";
    case EventType::kCut: return "cut";
    case EventType::kIncrease: return "increase";
    case EventType::kRoundingPurchase: return "rounding-purchase";
    case EventType::kFallbackPurchase: return "fallback-purchase";
    case EventType::kFreePurchase: return "free-purchase";
    case EventType::kOpen: return "open";
    case EventType::kServe: return "serve";
  }
  return "?";
}

inline EventType ParseEventType(std::string_view name) {
  for (auto t : {EventType::kArrival, EventType::kCut, EventType::kIncrease,
                 EventType::kRoundingPurchase, EventType::kFallbackPurchase,
                 EventType::kFreePurchase, EventType::kOpen, EventType::kServe}) {
    if (EventTypeName(t) == name) return t;
  }
  throw Error(ErrorCode::kParseError, "unknown trace event '" +
                                          std::string(name) + "'");
}

struct TraceEvent {
  EventType type = EventType::kArrival;
  std::optional<std::size_t> client;
  std::optional<std::size_t> facility;
  std::optional<std::size_t> edge;
  std::optional<std::uint64_t> cut_id;
  std::optional<std::size_t> cut_size;
  std::optional<double> cut_weight;
  std::optional<double> old_fraction;
  std::optional<double> new_fraction;
  // Free-form qualifier, e.g. which side of the metric wrapper opened a
  // facility ("plugin" or "wrapper").
  std::string note;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct TraceHeader {
  std::string instance_hash;
  std::string algorithm;
  std::string ofl;
  std::uint64_t seed = 0;
  int k_max = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::optional<double> alpha;
  std::optional<int> draw_count;
};

struct TraceFooter {
  CostBreakdown cost;
  double rounding_cost = 0.0;  // S'
  double fallback_cost = 0.0;  // S''
  std::string checksum;
};

struct RunTrace {
  TraceHeader header;
  std::vector<TraceEvent> events;
  std::optional<TraceFooter> footer;

  void Emit(TraceEvent event) { events.push_back(std::move(event)); }
};

// ---------------------------------------------------------------------------
// Hashing

class Fnv1a {
 public:
  void Add(std::string_view bytes) {
    for (unsigned char ch : bytes) {
      state_ ^= ch;
      state_ *= 0x100000001b3ULL;
    }
  }
  void Add(std::uint64_t value) {
    for (int b = 0; b < 8; ++b) {
      state_ ^= (value >> (8 * b)) & 0xff;
      state_ *= 0x100000001b3ULL;
    }
  }
  void Add(double value) { Add(std::bit_cast<std::uint64_t>(value)); }

  std::uint64_t value() const { return state_; }
  std::string hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 0; i < 16; ++i) out[15 - i] = kDigits[(state_ >> (4 * i)) & 0xf];
    return out;
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

// Checksum over the final state: open set, assignments and cost bits.
inline std::string SolutionChecksum(const Solution& sol) {
  Fnv1a h;
  h.Add(static_cast<std::uint64_t>(sol.open_facilities.size()));
  for (FacilityIndex j : sol.open_facilities) h.Add(static_cast<std::uint64_t>(j));
  for (const auto& [i, facilities] : sol.assignments) {
    h.Add(static_cast<std::uint64_t>(i));
    h.Add(static_cast<std::uint64_t>(facilities.size()));
    for (FacilityIndex j : facilities) h.Add(static_cast<std::uint64_t>(j));
  }
  h.Add(sol.cost.facility_cost);
  h.Add(sol.cost.connection_cost);
  return h.hex();
}

// ---------------------------------------------------------------------------
// JSON lines

inline nlohmann::json ToJson(const TraceEvent& e) {
  nlohmann::json j;
  j["event"] = EventTypeName(e.type);
  if (e.client) j["client"] = *e.client;
  if (e.facility) j["facility"] = *e.facility;
  if (e.edge) j["edge"] = *e.edge;
  if (e.cut_id) j["cut_id"] = *e.cut_id;
  if (e.cut_size) j["cut_size"] = *e.cut_size;
  if (e.cut_weight) j["cut_weight"] = *e.cut_weight;
  if (e.old_fraction) j["old_fraction"] = *e.old_fraction;
  if (e.new_fraction) j["new_fraction"] = *e.new_fraction;
  if (!e.note.empty()) j["note"] = e.note;
  return j;
}

inline TraceEvent TraceEventFromJson(const nlohmann::json& j) {
  TraceEvent e;
  e.type = ParseEventType(j.at("event").get<std::string>());
  auto opt = [&](const char* key, auto& field) {
    using T = typename std::remove_reference_t<decltype(field)>::value_type;
    if (j.contains(key)) field = j.at(key).get<T>();
  };
  opt("client", e.client);
  opt("facility", e.facility);
  opt("edge", e.edge);
  opt("cut_id", e.cut_id);
  opt("cut_size", e.cut_size);
  opt("cut_weight", e.cut_weight);
  opt("old_fraction", e.old_fraction);
  opt("new_fraction", e.new_fraction);
  if (j.contains("note")) e.note = j.at("note").get<std::string>();
  return e;
}

inline void WriteTrace(const RunTrace& trace, std::ostream& out) {
  const TraceHeader& h = trace.header;
  nlohmann::json header = {{"instance_hash", h.instance_hash},
                           {"algorithm", h.algorithm},
                           {"ofl", h.ofl},
                           {"seed", h.seed},
                           {"k", h.k_max},
                           {"n", h.n},
                           {"m", h.m}};
  if (h.alpha) header["alpha"] = *h.alpha;
  if (h.draw_count) header["draw_count"] = *h.draw_count;
  out << nlohmann::json{{"header", header}}.dump() << '\n';
  for (const auto& e : trace.events) out << ToJson(e).dump() << '\n';
  if (trace.footer) {
    const TraceFooter& f = *trace.footer;
    nlohmann::json fin = {{"facility_cost", f.cost.facility_cost},
                          {"connection_cost", f.cost.connection_cost},
                          {"total", f.cost.total()},
                          {"rounding_cost", f.rounding_cost},
                          {"fallback_cost", f.fallback_cost},
                          {"checksum", f.checksum}};
    out << nlohmann::json{{"final", fin}}.dump() << '\n';
  }
}

inline RunTrace ReadTrace(std::istream& in) {
  RunTrace trace;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::kParseError, std::string("bad trace line: ") + ex.what());
    }
    if (j.contains("header")) {
      const auto& h = j["header"];
      trace.header.instance_hash = h.at("instance_hash").get<std::string>();
      trace.header.algorithm = h.at("algorithm").get<std::string>();
      trace.header.ofl = h.value("ofl", "");
      trace.header.seed = h.at("seed").get<std::uint64_t>();
      trace.header.k_max = h.at("k").get<int>();
      trace.header.n = h.at("n").get<std::size_t>();
      trace.header.m = h.at("m").get<std::size_t>();
      if (h.contains("alpha")) trace.header.alpha = h["alpha"].get<double>();
      if (h.contains("draw_count")) trace.header.draw_count = h["draw_count"].get<int>();
      have_header = true;
    } else if (j.contains("final")) {
      const auto& f = j["final"];
      TraceFooter footer;
      footer.cost.facility_cost = f.at("facility_cost").get<double>();
      footer.cost.connection_cost = f.at("connection_cost").get<double>();
      footer.rounding_cost = f.value("rounding_cost", 0.0);
      footer.fallback_cost = f.value("fallback_cost", 0.0);
      footer.checksum = f.at("checksum").get<std::string>();
      trace.footer = footer;
    } else {
      trace.events.push_back(TraceEventFromJson(j));
    }
  }
  if (!have_header) throw Error(ErrorCode::kParseError, "trace has no header line");
  return trace;
}

}  // namespace mfl
