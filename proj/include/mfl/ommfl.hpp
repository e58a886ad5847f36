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

// Metric multi-connection wrapper around any single-connection plug-in.
//
// Per arrival: run the plug-in (k = 1); on the very first arrival also open
// the k_max - 1 cheapest facilities other than the plug-in's choice; then
// connect the client to its k_i - 1 cheapest open facilities besides the
// plug-in's. Facilities opened by the wrapper stay closed from the plug-in's
// point of view until it opens them itself, in which case no second opening
// charge is made but the plug-in's own ledger still records it.

#pragma once

#include <algorithm>
#include <memory>
#include <set>
#include <vector>

#include "mfl/core.hpp"
#include "mfl/ofl.hpp"
#include "mfl/trace.hpp"

namespace mfl {

struct DecompositionReport {
  double c_fac = 0.0;         // wrapper, facilities
  double c_con = 0.0;         // wrapper, connections
  double plugin_fac = 0.0;    // plug-in's own ledger, facilities
  double plugin_con = 0.0;    // plug-in's own ledger, connections
  double f_max = 0.0;
  double f_min = 0.0;
  double c_max = 0.0;         // extremes used for the checks
  double c_min = 0.0;
  double c_max_arrived = 0.0; // extremes over arrived clients only
  double c_min_arrived = 0.0;
  int k = 1;

  double total() const { return c_fac + c_con; }
  double plugin_total() const { return plugin_fac + plugin_con; }

  // a / b, with 0 / 0 = 0 and x / 0 = inf.
  static double Ratio(double a, double b) {
    if (b > 0.0) return a / b;
    return a > 0.0 ? kInfinity : 0.0;
  }
  // x * (k - 1) that stays 0 when k = 1 even for infinite x.
  double TimesKMinusOne(double x) const {
    return k == 1 ? 0.0 : x * static_cast<double>(k - 1);
  }

  double FacilityBound() const { return plugin_fac + TimesKMinusOne(f_max); }
  double ConnectionBound() const {
    return plugin_con * (1.0 + TimesKMinusOne(Ratio(c_max, c_min)));
  }
  double Multiplier() const {
    return 2.0 + TimesKMinusOne(Ratio(f_max, f_min)) +
           TimesKMinusOne(Ratio(c_max, c_min));
  }
  double TotalBound() const { return plugin_total() * Multiplier(); }

  bool FacilityBoundHolds() const { return LessOrClose(c_fac, FacilityBound()); }
  bool ConnectionBoundHolds() const {
    return LessOrClose(c_con, ConnectionBound());
  }
  bool TotalBoundHolds() const { return LessOrClose(total(), TotalBound()); }
};

class Ommfl {
 public:
  Ommfl(std::vector<double> opening_costs, int k_max,
        std::unique_ptr<OflAlgorithm> plugin)
      : opening_costs_(std::move(opening_costs)),
        k_max_(k_max),
        plugin_(std::move(plugin)) {
    if (k_max < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
    if (opening_costs_.size() < static_cast<std::size_t>(k_max)) {
      throw Error(ErrorCode::kInfeasibleRequirement,
                  "infeasible requirement: fewer facilities than k");
    }
  }

  void set_trace(RunTrace* trace) { trace_ = trace; }

  struct Outcome {
    std::vector<FacilityIndex> opened;
    std::vector<FacilityIndex> connected;
  };

  Outcome OnArrival(ClientIndex i, const ConnectionCosts& costs, int k_i) {
    if (solution_.assignments.contains(i)) {
      throw Error(ErrorCode::kDuplicateClient,
                  "client " + std::to_string(i) + " already arrived");
    }
    if (costs.size() != opening_costs_.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "connection cost vector does not match facility count");
    }
    std::size_t allowed = 0;
    for (const auto& c : costs) allowed += c.has_value();
    if (k_i < 1 || allowed < static_cast<std::size_t>(k_i)) {
      throw Error(ErrorCode::kInfeasibleClient,
                  "infeasible client " + std::to_string(i));
    }
    Emit({.type = EventType::kArrival, .client = i});
    Outcome out;
    const bool first = arrived_.empty();
    arrived_.push_back(i);
    for (const auto& c : costs) {
      if (!c) continue;
      c_min_arrived_ = std::min(c_min_arrived_, *c);
      c_max_arrived_ = std::max(c_max_arrived_, *c);
    }

    // Step 1: the plug-in.
    const OflDecision d = plugin_->OnArrival(costs);
    for (FacilityIndex j : d.opened) {
      plugin_fac_ += opening_costs_[j];
      Open(j, "plugin", out);
    }
    const double plugin_cost = *costs.at(d.connected_to);
    plugin_con_ += plugin_cost;
    Connect(i, d.connected_to, costs, out);

    // Step 2: on the first arrival, open the cheapest k_max - 1 others.
    if (first && k_max_ > 1) {
      std::vector<FacilityIndex> others;
      for (FacilityIndex j = 0; j < opening_costs_.size(); ++j) {
        if (j != d.connected_to) others.push_back(j);
      }
      std::stable_sort(others.begin(), others.end(),
                       [&](FacilityIndex a, FacilityIndex b) {
                         return opening_costs_[a] < opening_costs_[b];
                       });
      others.resize(static_cast<std::size_t>(k_max_ - 1));
      for (FacilityIndex j : others) Open(j, "wrapper", out);
    }

    // Step 3: k_i - 1 further connections, cheapest first.
    std::size_t missing = static_cast<std::size_t>(k_i - 1);
    std::vector<FacilityIndex> candidates;
    for (FacilityIndex j : solution_.open_facilities) {
      if (j != d.connected_to && costs[j]) candidates.push_back(j);
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](FacilityIndex a, FacilityIndex b) {
                       return *costs[a] < *costs[b];
                     });
    for (FacilityIndex j : candidates) {
      if (missing == 0) break;
      Connect(i, j, costs, out);
      --missing;
    }
    // Forbidden edges can leave a deficit; cover it with the cheapest closed
    // allowed facilities (opening plus connection).
    if (missing > 0) {
      std::vector<FacilityIndex> closed;
      for (FacilityIndex j = 0; j < opening_costs_.size(); ++j) {
        if (costs[j] && !solution_.open_facilities.contains(j)) closed.push_back(j);
      }
      std::stable_sort(closed.begin(), closed.end(),
                       [&](FacilityIndex a, FacilityIndex b) {
                         return opening_costs_[a] + *costs[a] <
                                opening_costs_[b] + *costs[b];
                       });
      for (FacilityIndex j : closed) {
        if (missing == 0) break;
        Open(j, "wrapper", out);
        Connect(i, j, costs, out);
        --missing;
      }
      deficit_opens_ += 1;
    }
    return out;
  }

  // Instrumented cost decomposition. Connection extremes used for the checks
  // come from `full` when given, otherwise from the arrived clients.
  DecompositionReport Report(const Instance* full = nullptr) const {
    DecompositionReport r;
    r.c_fac = solution_.cost.facility_cost;
    r.c_con = solution_.cost.connection_cost;
    r.plugin_fac = plugin_fac_;
    r.plugin_con = plugin_con_;
    r.f_max = 0.0;
    r.f_min = kInfinity;
    for (double f : opening_costs_) {
      r.f_max = std::max(r.f_max, f);
      r.f_min = std::min(r.f_min, f);
    }
    r.c_max_arrived = c_max_arrived_;
    r.c_min_arrived = arrived_.empty() ? 0.0 : c_min_arrived_;
    if (full) {
      r.c_max = full->c_max();
      r.c_min = full->c_min();
    } else {
      r.c_max = r.c_max_arrived;
      r.c_min = r.c_min_arrived;
    }
    r.k = k_max_;
    return r;
  }

  const Solution& solution() const { return solution_; }
  const std::vector<ClientIndex>& arrived() const { return arrived_; }
  const std::set<FacilityIndex>& wrapper_open() const { return wrapper_open_; }
  const OflAlgorithm& plugin() const { return *plugin_; }
  std::size_t deficit_opens() const { return deficit_opens_; }

 private:
  void Emit(TraceEvent event) {
    if (trace_) trace_->Emit(std::move(event));
  }

  void Open(FacilityIndex j, const char* side, Outcome& out) {
    Emit({.type = EventType::kOpen, .facility = j, .note = side});
    if (!solution_.open_facilities.insert(j).second) return;
    if (std::string_view(side) == "wrapper") wrapper_open_.insert(j);
    solution_.cost.facility_cost += opening_costs_[j];
    out.opened.push_back(j);
  }

  void Connect(ClientIndex i, FacilityIndex j, const ConnectionCosts& costs,
               Outcome& out) {
    solution_.assignments[i].insert(j);
    solution_.cost.connection_cost += *costs[j];
    out.connected.push_back(j);
    Emit({.type = EventType::kServe, .client = i, .facility = j});
  }

  std::vector<double> opening_costs_;
  int k_max_;
  std::unique_ptr<OflAlgorithm> plugin_;
  Solution solution_;
  std::set<FacilityIndex> wrapper_open_;
  std::vector<ClientIndex> arrived_;
  double plugin_fac_ = 0.0;
  double plugin_con_ = 0.0;
  double c_min_arrived_ = kInfinity;
  double c_max_arrived_ = 0.0;
  std::size_t deficit_opens_ = 0;
  RunTrace* trace_ = nullptr;
};

}  // namespace mfl
