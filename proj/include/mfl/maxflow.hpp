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

// Edmonds-Karp max flow on small directed graphs.
//
// Used as the general-purpose cross-check for the closed-form cut of the
// depth-2 facility graph. Capacities may be +infinity; a source-sink path made
// only of infinite arcs yields an infinite flow value.

#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <limits>
#include <vector>

namespace mfl {

template <typename Capacity = double>
class MaxFlowGraph {
 public:
  using ArcId = std::size_t;

  explicit MaxFlowGraph(std::size_t num_nodes) : adjacency_(num_nodes) {}

  ArcId AddArc(std::size_t from, std::size_t to, Capacity capacity) {
    const ArcId id = arcs_.size();
    arcs_.push_back({from, to, capacity, Capacity{}});
    adjacency_[from].push_back(id);
    // Residual twin at id + 1.
    arcs_.push_back({to, from, Capacity{}, Capacity{}});
    adjacency_[to].push_back(id + 1);
    return id;
  }

  Capacity Solve(std::size_t source, std::size_t sink) {
    constexpr Capacity kInf = std::numeric_limits<Capacity>::infinity();
    Capacity total{};
    std::vector<ArcId> parent(adjacency_.size());
    while (true) {
      std::vector<bool> seen(adjacency_.size(), false);
      std::deque<std::size_t> queue{source};
      seen[source] = true;
      while (!queue.empty() && !seen[sink]) {
        const std::size_t u = queue.front();
        queue.pop_front();
        for (ArcId a : adjacency_[u]) {
          const Arc& arc = arcs_[a];
          if (seen[arc.to] || Residual(a) <= Capacity{}) continue;
          seen[arc.to] = true;
          parent[arc.to] = a;
          queue.push_back(arc.to);
        }
      }
      if (!seen[sink]) break;
      Capacity bottleneck = kInf;
      for (std::size_t v = sink; v != source; v = arcs_[parent[v]].from) {
        bottleneck = std::min(bottleneck, Residual(parent[v]));
      }
      if (bottleneck == kInf) {
        source_side_ = ReachableFrom(source);
        return kInf;
      }
      for (std::size_t v = sink; v != source; v = arcs_[parent[v]].from) {
        const ArcId a = parent[v];
        arcs_[a].flow += bottleneck;
        arcs_[a ^ 1].flow -= bottleneck;
      }
      total += bottleneck;
    }
    source_side_ = ReachableFrom(source);
    return total;
  }

  // Forward arcs crossing from the source side to the sink side after Solve.
  std::vector<ArcId> MinCutArcs() const {
    std::vector<ArcId> out;
    for (ArcId a = 0; a < arcs_.size(); a += 2) {
      if (source_side_[arcs_[a].from] && !source_side_[arcs_[a].to]) {
        out.push_back(a);
      }
    }
    return out;
  }

  Capacity capacity(ArcId a) const { return arcs_[a].capacity; }

 private:
  struct Arc {
    std::size_t from;
    std::size_t to;
    Capacity capacity;
    Capacity flow;
  };

  Capacity Residual(ArcId a) const { return arcs_[a].capacity - arcs_[a].flow; }

  std::vector<bool> ReachableFrom(std::size_t source) const {
    std::vector<bool> seen(adjacency_.size(), false);
    std::deque<std::size_t> queue{source};
    seen[source] = true;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (ArcId a : adjacency_[u]) {
        if (!seen[arcs_[a].to] && Residual(a) > Capacity{}) {
          seen[arcs_[a].to] = true;
          queue.push_back(arcs_[a].to);
        }
      }
    }
    return seen;
  }

  std::vector<Arc> arcs_;
  std::vector<std::vector<ArcId>> adjacency_;
  std::vector<bool> source_side_;
};

}  // namespace mfl
