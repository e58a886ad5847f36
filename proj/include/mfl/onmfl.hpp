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

// Online randomized algorithm for non-metric multi-facility location.
//
// On each arrival the algorithm works on the client's residual view of the
// rooted graph and repeats until k_i disjoint root-client paths are bought:
//
//   1. While the min cut (max flow) to the client is below 1, raise the
//      fractions on a minimum cut Q by f <- f (1 + 1/c) + 1/(|Q| c).
//   2. Buy every edge whose fraction exceeds the threshold alpha.
//   3. If no bought path reaches the client in the residual view, buy the
//      cheapest residual path (bought edges cost nothing).
//   4. Open every facility whose root edge is bought and hide the client
//      edges of the paths that now serve the client.
//
// alpha is the minimum of 2 * ceil(log2(k_max * n + 1)) uniform draws, taken
// once for the whole run.

#pragma once

#include <bit>
#include <cstdint>
#include <set>
#include <vector>

#include "mfl/core.hpp"
#include "mfl/flowgraph.hpp"
#include "mfl/random.hpp"
#include "mfl/trace.hpp"

namespace mfl {

// Slack on the "max flow < 1" guard of the fractional loop.
inline constexpr double kFlowGuardSlack = 1e-9;

// Upper bound on cuts processed for one arrival before giving up.
inline constexpr std::uint64_t kMaxIncreasesPerArrival = 50'000'000;

struct AlphaThreshold {
  int draw_count = 2;
  double alpha = 0.0;
  std::uint64_t seed = 0;

  // 2 * ceil(log2(k_max * n + 1)).
  static int DrawCount(std::size_t n, int k_max) {
    const std::uint64_t x = static_cast<std::uint64_t>(k_max) * n + 1;
    return 2 * static_cast<int>(std::bit_width(x - 1));
  }

  static AlphaThreshold Draw(std::size_t n, int k_max, std::uint64_t seed) {
    AlphaThreshold t;
    t.seed = seed;
    t.draw_count = DrawCount(n, k_max);
    Rng rng(seed);
    t.alpha = 1.0;
    for (int l = 0; l < t.draw_count; ++l) t.alpha = std::min(t.alpha, rng.Uniform());
    return t;
  }
};

enum class PurchaseReason { kRounding, kFallback, kFree };

struct Purchase {
  EdgeId edge = 0;
  PurchaseReason reason = PurchaseReason::kRounding;
  double cost = 0.0;
};

struct ArrivalResult {
  std::vector<Purchase> purchases;
  std::vector<FacilityIndex> served;  // facilities newly assigned to the client
};

// Runtime checks on the arrival loop, accumulated over the run.
struct OnmflStats {
  std::uint64_t loop_exits = 0;
  double min_exit_flow = kInfinity;
  std::uint64_t exit_violations = 0;       // flow < 1 - slack after loop
  std::uint64_t residual_checks = 0;       // G' nonempty at each increase
  std::uint64_t residual_violations = 0;
  std::uint64_t rounding_checks = 0;       // f > alpha implies purchased
  std::uint64_t rounding_violations = 0;
  std::uint64_t rounding_paths = 0;        // paths completed without fallback
  std::uint64_t fallback_paths = 0;
};

class Onmfl {
 public:
  Onmfl(std::size_t n, int k_max, std::vector<double> opening_costs,
        std::uint64_t seed)
      : Onmfl(n, k_max, std::move(opening_costs),
              AlphaThreshold::Draw(n, std::max(k_max, 1), seed)) {}

  Onmfl(std::size_t n, int k_max, std::vector<double> opening_costs,
        AlphaThreshold alpha)
      : n_(n),
        k_max_(k_max),
        opening_costs_(std::move(opening_costs)),
        alpha_(alpha),
        graph_(opening_costs_) {
    if (n < 1 || k_max < 1) {
      throw Error(ErrorCode::kInvalidArgument, "n and k must be at least 1");
    }
    if (opening_costs_.size() < static_cast<std::size_t>(k_max)) {
      throw Error(ErrorCode::kInfeasibleRequirement,
                  "infeasible requirement: fewer facilities than k");
    }
    for (FacilityIndex j = 0; j < opening_costs_.size(); ++j) {
      if (opening_costs_[j] == 0.0) graph_.PurchaseEdge(graph_.root_edge(j));
    }
  }

  void set_trace(RunTrace* trace) {
    trace_ = trace;
    graph_.set_trace(trace);
  }

  ArrivalResult OnArrival(ClientIndex i, const ConnectionCosts& costs, int k_i) {
    if (graph_.has_client(i)) {
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
                  "client " + std::to_string(i) +
                      " has fewer allowed facilities than its requirement");
    }

    Emit({.type = EventType::kArrival, .client = i});
    ArrivalResult result;
    graph_.set_active_client(i);
    for (EdgeId e : graph_.AddClient(i, costs)) {
      if (graph_.edge(e).cost == 0.0) Buy(e, PurchaseReason::kFree, result);
    }
    arrived_.push_back(i);
    Serve(i, result);

    const std::size_t need = static_cast<std::size_t>(k_i);
    std::uint64_t increases = 0;
    while (served_count(i) < need) {
      // Step 1: fractional increases until max flow >= 1.
      while (true) {
        const Cut cut = graph_.MinCut(i);
        if (!(cut.weight < 1.0 - kFlowGuardSlack)) break;
        ++stats_.residual_checks;
        if (served_count(i) >= need || graph_.LiveFacilities(i).empty()) {
          ++stats_.residual_violations;
        }
        graph_.FractionIncrease(cut);
        if (++increases > kMaxIncreasesPerArrival) {
          throw Error(ErrorCode::kInvariantViolation,
                      "fractional loop did not converge");
        }
      }
      const double exit_flow = graph_.MaxFlowValue(i);
      ++stats_.loop_exits;
      stats_.min_exit_flow = std::min(stats_.min_exit_flow, exit_flow);
      if (exit_flow < 1.0 - kFlowGuardSlack) ++stats_.exit_violations;

      // Step 2: threshold rounding over every edge of the graph.
      for (EdgeId e = 0; e < graph_.num_edges(); ++e) {
        if (graph_.edge(e).fraction > alpha_.alpha) {
          Buy(e, PurchaseReason::kRounding, result);
        }
      }
      for (EdgeId e = 0; e < graph_.num_edges(); ++e) {
        ++stats_.rounding_checks;
        const EdgeState& s = graph_.edge(e);
        if (s.fraction > alpha_.alpha && !s.purchased) ++stats_.rounding_violations;
      }

      // Step 3: make sure at least one residual path is bought.
      bool any_bought = false;
      for (FacilityIndex j : graph_.LiveFacilities(i)) {
        any_bought = any_bought || graph_.PathPurchased(i, j);
      }
      if (any_bought) {
        ++stats_.rounding_paths;
      } else {
        const FacilityIndex j = MinCostResidualPath(i);
        Buy(graph_.root_edge(j), PurchaseReason::kFallback, result);
        Buy(*graph_.connection_edge(i, j), PurchaseReason::kFallback, result);
        ++stats_.fallback_paths;
      }

      // Step 4.
      Serve(i, result);
    }
    return result;
  }

  // Live facility minimizing the unpaid cost of its two edges.
  FacilityIndex MinCostResidualPath(ClientIndex i) const {
    std::optional<FacilityIndex> best;
    double best_cost = kInfinity;
    for (FacilityIndex j : graph_.LiveFacilities(i)) {
      const EdgeState& root = graph_.edge(graph_.root_edge(j));
      const EdgeState& conn = graph_.edge(*graph_.connection_edge(i, j));
      const double residual = (root.purchased ? 0.0 : root.cost) +
                              (conn.purchased ? 0.0 : conn.cost);
      if (!best || residual < best_cost) {
        best = j;
        best_cost = residual;
      }
    }
    if (!best) {
      throw Error(ErrorCode::kNoResidualPath,
                  "no residual path to client " + std::to_string(i));
    }
    return *best;
  }

  const Solution& solution() const { return solution_; }
  const std::vector<ClientIndex>& arrived() const { return arrived_; }
  const FlowGraph& graph() const { return graph_; }
  // Direct graph access for tests and diagnostics.
  FlowGraph& mutable_graph() { return graph_; }
  const AlphaThreshold& alpha() const { return alpha_; }
  const OnmflStats& stats() const { return stats_; }
  double rounding_cost() const { return rounding_cost_; }
  double fallback_cost() const { return fallback_cost_; }
  std::size_t n() const { return n_; }
  int k_max() const { return k_max_; }

  std::size_t served_count(ClientIndex i) const {
    auto it = solution_.assignments.find(i);
    return it == solution_.assignments.end() ? 0 : it->second.size();
  }

 private:
  void Emit(TraceEvent event) {
    if (trace_) trace_->Emit(std::move(event));
  }

  void Buy(EdgeId e, PurchaseReason reason, ArrivalResult& result) {
    if (!graph_.PurchaseEdge(e)) return;
    const EdgeState& s = graph_.edge(e);
    if (s.kind == EdgeKind::kRoot) {
      solution_.cost.facility_cost += s.cost;
    } else {
      solution_.cost.connection_cost += s.cost;
    }
    EventType type = EventType::kFreePurchase;
    switch (reason) {
      case PurchaseReason::kRounding:
        rounding_cost_ += s.cost;
        type = EventType::kRoundingPurchase;
        break;
      case PurchaseReason::kFallback:
        fallback_cost_ += s.cost;
        type = EventType::kFallbackPurchase;
        break;
      case PurchaseReason::kFree:
        break;
    }
    result.purchases.push_back({e, reason, s.cost});
    Emit({.type = type, .client = s.client, .facility = s.facility, .edge = e});
  }

  // Opens facilities with bought root edges and assigns the client to every
  // residual facility whose path is bought, hiding those edges.
  void Serve(ClientIndex i, ArrivalResult& result) {
    for (FacilityIndex j = 0; j < opening_costs_.size(); ++j) {
      if (graph_.edge(graph_.root_edge(j)).purchased &&
          solution_.open_facilities.insert(j).second) {
        Emit({.type = EventType::kOpen, .facility = j});
      }
    }
    auto& assigned = solution_.assignments[i];
    for (FacilityIndex j : graph_.LiveFacilities(i)) {
      if (!graph_.PathPurchased(i, j)) continue;
      graph_.RemoveServedEdge(i, j);
      assigned.insert(j);
      result.served.push_back(j);
      Emit({.type = EventType::kServe, .client = i, .facility = j});
    }
  }

  std::size_t n_;
  int k_max_;
  std::vector<double> opening_costs_;
  AlphaThreshold alpha_;
  FlowGraph graph_;
  Solution solution_;
  std::vector<ClientIndex> arrived_;
  double rounding_cost_ = 0.0;
  double fallback_cost_ = 0.0;
  OnmflStats stats_;
  RunTrace* trace_ = nullptr;
};

}  // namespace mfl
