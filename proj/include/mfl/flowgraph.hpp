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

// The rooted facility graph used by the non-metric online algorithm.
//
// Nodes: a root r, one node per facility, one node per arrived client. Edges:
// r -> j priced at the opening cost of j, and j -> i priced at the connection
// cost of i to j. Serving client i with k facilities means buying k
// edge-disjoint r-i paths. Each edge carries a fraction that only grows and a
// purchase flag that never reverts.
//
// Every r-i path has exactly two edges and two paths share at most r and i,
// so a minimum r-i cut picks, per live facility, the lighter of its two edges.
// The per-client "residual" view hides the client edges that were already
// used to serve that client.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "mfl/core.hpp"
#include "mfl/maxflow.hpp"
#include "mfl/trace.hpp"

namespace mfl {

using EdgeId = std::size_t;

enum class EdgeKind { kRoot, kConnection };

struct EdgeState {
  EdgeKind kind = EdgeKind::kRoot;
  FacilityIndex facility = 0;
  std::optional<ClientIndex> client;  // set for connection edges
  double cost = 0.0;
  double fraction = 0.0;
  bool purchased = false;
};

struct Cut {
  std::vector<EdgeId> edges;
  double weight = 0.0;
  std::uint64_t id = 0;

  std::size_t size() const { return edges.size(); }
};

enum class CutMethod { kStructural, kAugmentingPath };

// Counters for the runtime-checked inequalities of the fractional update.
struct FractionStats {
  std::uint64_t increases = 0;        // cuts processed
  std::uint64_t edge_updates = 0;     // individual edge updates
  std::uint64_t bound_violations = 0; // sum c_e * delta_e >= 2
  double max_cost_increase = 0.0;     // largest sum c_e * delta_e seen
  std::uint64_t identity_violations = 0;
  double max_identity_rel_error = 0.0;  // |c*delta - (f + 1/|Q|)| relative
};

class FlowGraph {
 public:
  explicit FlowGraph(std::span<const double> opening_costs)
      : num_facilities_(opening_costs.size()) {
    for (FacilityIndex j = 0; j < opening_costs.size(); ++j) {
      edges_.push_back({EdgeKind::kRoot, j, std::nullopt, opening_costs[j]});
    }
  }

  std::size_t num_facilities() const { return num_facilities_; }
  std::size_t num_edges() const { return edges_.size(); }
  const EdgeState& edge(EdgeId e) const { return edges_.at(e); }
  EdgeId root_edge(FacilityIndex j) const { return j; }

  bool has_client(ClientIndex i) const { return clients_.contains(i); }

  std::optional<EdgeId> connection_edge(ClientIndex i, FacilityIndex j) const {
    const ClientNode& node = client(i);
    return node.edges.at(j);
  }

  // Adds the client node and one edge per allowed facility.
  std::vector<EdgeId> AddClient(ClientIndex i, const ConnectionCosts& costs) {
    if (clients_.contains(i)) {
      throw Error(ErrorCode::kDuplicateClient,
                  "client " + std::to_string(i) + " already present");
    }
    if (costs.size() != num_facilities()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "connection cost vector does not match facility count");
    }
    ClientNode node;
    node.edges.resize(costs.size());
    node.removed.assign(costs.size(), false);
    std::vector<EdgeId> added;
    for (FacilityIndex j = 0; j < costs.size(); ++j) {
      if (!costs[j]) continue;
      const EdgeId e = edges_.size();
      edges_.push_back({EdgeKind::kConnection, j, i, *costs[j]});
      node.edges[j] = e;
      added.push_back(e);
    }
    clients_.emplace(i, std::move(node));
    return added;
  }

  // Facilities j whose edge j -> i is present and still in the residual view.
  std::vector<FacilityIndex> LiveFacilities(ClientIndex i) const {
    const ClientNode& node = client(i);
    std::vector<FacilityIndex> out;
    for (FacilityIndex j = 0; j < node.edges.size(); ++j) {
      if (node.edges[j] && !node.removed[j]) out.push_back(j);
    }
    return out;
  }

  bool IsRemoved(ClientIndex i, FacilityIndex j) const {
    return client(i).removed.at(j);
  }

  // Minimum r-i cut under fraction weights in the residual view. Zero-cost
  // edges are never placed in a cut (their fraction cannot be raised), so they
  // act as infinite capacity. Ties prefer the root edge.
  Cut MinCut(ClientIndex i) const {
    const std::vector<FacilityIndex> live = LiveFacilities(i);
    if (live.empty()) {
      throw Error(ErrorCode::kNoResidualPath,
                  "no residual path to client " + std::to_string(i));
    }
    const ClientNode& node = client(i);
    Cut cut;
    for (FacilityIndex j : live) {
      const double w_root = CutWeight(root_edge(j));
      const double w_conn = CutWeight(*node.edges[j]);
      if (w_root == kInfinity && w_conn == kInfinity) {
        cut.weight = kInfinity;
        continue;
      }
      if (w_root <= w_conn) {
        cut.edges.push_back(root_edge(j));
        cut.weight += w_root;
      } else {
        cut.edges.push_back(*node.edges[j]);
        cut.weight += w_conn;
      }
    }
    if (cut.weight == kInfinity) cut.edges.clear();
    cut.id = next_cut_id_;
    return cut;
  }

  // The same cut computed by Edmonds-Karp on the explicit residual graph.
  Cut MinCutAugmenting(ClientIndex i) const {
    const std::vector<FacilityIndex> live = LiveFacilities(i);
    if (live.empty()) {
      throw Error(ErrorCode::kNoResidualPath,
                  "no residual path to client " + std::to_string(i));
    }
    const ClientNode& node = client(i);
    const std::size_t root = 0;
    const std::size_t sink = live.size() + 1;
    MaxFlowGraph<double> g(live.size() + 2);
    std::vector<EdgeId> arc_to_edge;
    for (std::size_t p = 0; p < live.size(); ++p) {
      const FacilityIndex j = live[p];
      const auto a = g.AddArc(root, p + 1, CutWeight(root_edge(j)));
      const auto b = g.AddArc(p + 1, sink, CutWeight(*node.edges[j]));
      arc_to_edge.resize(std::max(a, b) + 1);
      arc_to_edge[a] = root_edge(j);
      arc_to_edge[b] = *node.edges[j];
    }
    Cut cut;
    cut.id = next_cut_id_;
    cut.weight = g.Solve(root, sink);
    if (cut.weight == kInfinity) return cut;
    double check = 0.0;
    for (auto a : g.MinCutArcs()) {
      cut.edges.push_back(arc_to_edge[a]);
      check += g.capacity(a);
    }
    cut.weight = check;
    return cut;
  }

  double MaxFlowValue(ClientIndex i,
                      CutMethod method = CutMethod::kStructural) const {
    return method == CutMethod::kStructural ? MinCut(i).weight
                                            : MinCutAugmenting(i).weight;
  }

  // f_e <- f_e * (1 + 1/c_e) + 1 / (|Q| * c_e) for every e in the cut.
  // Returns the per-edge deltas in cut order.
  std::vector<double> FractionIncrease(const Cut& cut) {
    if (!(cut.weight < 1.0)) {
      throw Error(ErrorCode::kSaturatedCut, "increase on saturated cut");
    }
    if (cut.edges.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "increase on empty cut");
    }
    const double q = static_cast<double>(cut.size());
    double pre_weight = 0.0;
    double cost_increase = 0.0;
    std::vector<double> deltas;
    deltas.reserve(cut.size());
    if (trace_) {
      trace_->Emit({.type = EventType::kCut,
                    .client = active_client_,
                    .cut_id = cut.id,
                    .cut_size = cut.size(),
                    .cut_weight = cut.weight});
    }
    for (EdgeId e : cut.edges) {
      EdgeState& s = edges_.at(e);
      if (!(s.cost > 0.0)) {
        throw Error(ErrorCode::kInvariantViolation,
                    "zero-cost edge reached a fraction increase");
      }
      const double old_f = s.fraction;
      const double new_f = old_f * (1.0 + 1.0 / s.cost) + 1.0 / (q * s.cost);
      const double delta = new_f - old_f;
      s.fraction = new_f;
      deltas.push_back(delta);
      pre_weight += old_f;
      const double paid = s.cost * delta;
      cost_increase += paid;

      const double expected = old_f + 1.0 / q;
      const double rel_err = std::abs(paid - expected) / std::max(1.0, expected);
      stats_.max_identity_rel_error =
          std::max(stats_.max_identity_rel_error, rel_err);
      if (rel_err > kRelTol) ++stats_.identity_violations;
      ++stats_.edge_updates;
      if (trace_) {
        trace_->Emit({.type = EventType::kIncrease,
                      .client = s.client,
                      .facility = s.facility,
                      .edge = e,
                      .cut_id = cut.id,
                      .cut_size = cut.size(),
                      .old_fraction = old_f,
                      .new_fraction = new_f});
      }
    }
    ++stats_.increases;
    ++next_cut_id_;
    stats_.max_cost_increase = std::max(stats_.max_cost_increase, cost_increase);
    // Pre-update weight below 1 means the cost of this increase is
    // (sum f_e) + 1 < 2.
    if (pre_weight < 1.0 && !(cost_increase < 2.0)) {
      ++stats_.bound_violations;
      throw Error(ErrorCode::kInvariantViolation,
                  "fraction increase cost reached 2");
    }
    return deltas;
  }

  // Sets a fraction directly. Fractions never decrease.
  void RaiseFraction(EdgeId e, double value) {
    EdgeState& s = edges_.at(e);
    if (value < s.fraction) {
      throw Error(ErrorCode::kInvalidArgument, "fractions may not decrease");
    }
    s.fraction = value;
  }

  // Returns true if the edge was not purchased before.
  bool PurchaseEdge(EdgeId e) {
    EdgeState& s = edges_.at(e);
    if (s.purchased) return false;
    s.purchased = true;
    return true;
  }

  bool PathPurchased(ClientIndex i, FacilityIndex j) const {
    const auto& e = client(i).edges.at(j);
    return e && edges_[root_edge(j)].purchased && edges_[*e].purchased;
  }

  std::size_t PurchasedDisjointPathCount(ClientIndex i) const {
    const ClientNode& node = client(i);
    std::size_t count = 0;
    for (FacilityIndex j = 0; j < node.edges.size(); ++j) {
      count += PathPurchased(i, j);
    }
    return count;
  }

  void RemoveServedEdge(ClientIndex i, FacilityIndex j) {
    ClientNode& node = client(i);
    const auto& e = node.edges.at(j);
    if (!e || !edges_[*e].purchased) {
      throw Error(ErrorCode::kEdgeNotPurchased,
                  "cannot remove an unpurchased edge from the residual view");
    }
    node.removed[j] = true;
  }

  const FractionStats& stats() const { return stats_; }

  void set_trace(RunTrace* trace) { trace_ = trace; }
  void set_active_client(ClientIndex i) { active_client_ = i; }

 private:
  struct ClientNode {
    std::vector<std::optional<EdgeId>> edges;  // per facility
    std::vector<bool> removed;                 // residual view
  };

  double CutWeight(EdgeId e) const {
    const EdgeState& s = edges_[e];
    return s.cost > 0.0 ? s.fraction : kInfinity;
  }

  const ClientNode& client(ClientIndex i) const {
    auto it = clients_.find(i);
    if (it == clients_.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "client " + std::to_string(i) + " not in graph");
    }
    return it->second;
  }
  ClientNode& client(ClientIndex i) {
    return const_cast<ClientNode&>(std::as_const(*this).client(i));
  }

  std::size_t num_facilities_;
  std::vector<EdgeState> edges_;
  std::unordered_map<ClientIndex, ClientNode> clients_;
  FractionStats stats_;
  std::uint64_t next_cut_id_ = 0;
  ClientIndex active_client_ = 0;
  RunTrace* trace_ = nullptr;
};

}  // namespace mfl
