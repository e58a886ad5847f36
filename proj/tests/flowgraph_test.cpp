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

#include "mfl/flowgraph.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "mfl/random.hpp"

namespace mfl {
namespace {

// Minimum over every per-facility choice of root or connection edge.
double EnumeratedMinCut(const FlowGraph& g, ClientIndex i) {
  const auto live = g.LiveFacilities(i);
  double best = kInfinity;
  for (std::uint64_t mask = 0; mask < (1ULL << live.size()); ++mask) {
    double w = 0;
    for (std::size_t p = 0; p < live.size(); ++p) {
      const EdgeId e = (mask >> p & 1) ? *g.connection_edge(i, live[p])
                                       : g.root_edge(live[p]);
      w += g.edge(e).fraction;
    }
    best = std::min(best, w);
  }
  return best;
}

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

TEST(FlowGraphTest, AddClientCreatesOneEdgePerAllowedFacility) {
  const std::vector<double> open{1, 2, 3};
  FlowGraph g(open);
  EXPECT_EQ(g.AddClient(0, {1.0, 2.0, 3.0}).size(), 3u);
  const auto added = g.AddClient(1, {1.0, std::nullopt, 3.0});
  EXPECT_EQ(added.size(), 2u);
  for (EdgeId e : added) {
    EXPECT_EQ(g.edge(e).fraction, 0.0);
    EXPECT_FALSE(g.edge(e).purchased);
  }
  EXPECT_EQ(CodeOf([&] { g.AddClient(1, {1.0, 1.0, 1.0}); }),
            ErrorCode::kDuplicateClient);
}

TEST(FlowGraphTest, ClientWithoutAllowedFacilityHasNoResidualPath) {
  const std::vector<double> open{1, 2, 3};
  FlowGraph g(open);
  EXPECT_TRUE(g.AddClient(0, ConnectionCosts(3)).empty());
  EXPECT_EQ(CodeOf([&] { g.MinCut(0); }), ErrorCode::kNoResidualPath);
}

TEST(FlowGraphTest, MinCutPicksLighterEdgePerFacility) {
  const std::vector<double> open{1, 1};
  FlowGraph g(open);
  g.AddClient(0, {1.0, 1.0});
  g.RaiseFraction(g.root_edge(0), 0.3);
  g.RaiseFraction(*g.connection_edge(0, 0), 0.5);
  g.RaiseFraction(g.root_edge(1), 0.7);
  g.RaiseFraction(*g.connection_edge(0, 1), 0.2);
  const Cut cut = g.MinCut(0);
  EXPECT_EQ(cut.edges, (std::vector<EdgeId>{g.root_edge(0), *g.connection_edge(0, 1)}));
  EXPECT_DOUBLE_EQ(cut.weight, 0.5);
  EXPECT_DOUBLE_EQ(EnumeratedMinCut(g, 0), 0.5);
  EXPECT_DOUBLE_EQ(g.MaxFlowValue(0), 0.5);
  EXPECT_DOUBLE_EQ(g.MaxFlowValue(0, CutMethod::kAugmentingPath), 0.5);
}

TEST(FlowGraphTest, AllZeroFractionsTieTowardRootEdges) {
  const std::vector<double> open{1, 1, 1};
  FlowGraph g(open);
  g.AddClient(0, {1.0, 1.0, 1.0});
  const Cut cut = g.MinCut(0);
  EXPECT_EQ(cut.weight, 0.0);
  EXPECT_EQ(cut.edges, (std::vector<EdgeId>{0, 1, 2}));
  EXPECT_EQ(g.MaxFlowValue(0), 0.0);
}

TEST(FlowGraphTest, SingleFacilityTakesSmallerEdge) {
  const std::vector<double> open{1};
  FlowGraph g(open);
  g.AddClient(0, {1.0});
  g.RaiseFraction(g.root_edge(0), 1.0);
  g.RaiseFraction(*g.connection_edge(0, 0), 0.4);
  const Cut cut = g.MinCut(0);
  EXPECT_EQ(cut.edges, std::vector<EdgeId>{*g.connection_edge(0, 0)});
  EXPECT_DOUBLE_EQ(cut.weight, 0.4);
}

TEST(FlowGraphTest, SaturatedSidesGiveFlowAtLeastOne) {
  const std::vector<double> open{1, 1};
  FlowGraph g(open);
  g.AddClient(0, {1.0, 1.0});
  g.RaiseFraction(g.root_edge(0), 1.0);
  g.RaiseFraction(*g.connection_edge(0, 0), 2.0);
  g.RaiseFraction(*g.connection_edge(0, 1), 1.5);
  g.RaiseFraction(g.root_edge(1), 1.0);
  EXPECT_GE(g.MaxFlowValue(0), 1.0);
}

TEST(FlowGraphTest, FractionIncreaseFormula) {
  const std::vector<double> open{1, 1};
  FlowGraph g(open);
  g.AddClient(0, {1.0, 1.0});
  // c = 1, f = 0, |Q| = 2 -> 0.5.
  g.FractionIncrease(g.MinCut(0));
  EXPECT_DOUBLE_EQ(g.edge(0).fraction, 0.5);
  EXPECT_DOUBLE_EQ(g.edge(1).fraction, 0.5);
}

TEST(FlowGraphTest, FractionIncreaseSingleEdgeCut) {
  const std::vector<double> open{1};
  FlowGraph g(open);
  g.AddClient(0, {5.0});
  g.RaiseFraction(g.root_edge(0), 0.5);
  g.RaiseFraction(*g.connection_edge(0, 0), 0.9);
  // c = 1, f = 0.5, |Q| = 1 -> 0.5 * 2 + 1 = 2.
  const auto deltas = g.FractionIncrease(g.MinCut(0));
  EXPECT_DOUBLE_EQ(g.edge(0).fraction, 2.0);
  EXPECT_DOUBLE_EQ(deltas.at(0), 1.5);
}

TEST(FlowGraphTest, FractionIncreaseWithCostFour) {
  const std::vector<double> open{4, 4};
  FlowGraph g(open);
  g.AddClient(0, {9.0, 9.0});
  g.RaiseFraction(g.root_edge(0), 0.25);
  g.RaiseFraction(g.root_edge(1), 0.25);
  g.RaiseFraction(*g.connection_edge(0, 0), 0.5);
  g.RaiseFraction(*g.connection_edge(0, 1), 0.5);
  g.FractionIncrease(g.MinCut(0));
  const double c = 4, f = 0.25, q = 2;
  const double expected = f + f / c + 1 / (q * c);
  EXPECT_DOUBLE_EQ(g.edge(0).fraction, expected);
  EXPECT_DOUBLE_EQ(g.edge(0).fraction, 0.4375);
}

TEST(FlowGraphTest, SaturatedCutIsRejected) {
  const std::vector<double> open{1};
  FlowGraph g(open);
  g.AddClient(0, {1.0});
  g.RaiseFraction(g.root_edge(0), 1.0);
  g.RaiseFraction(*g.connection_edge(0, 0), 1.0);
  EXPECT_EQ(CodeOf([&] { g.FractionIncrease(g.MinCut(0)); }),
            ErrorCode::kSaturatedCut);
}

TEST(FlowGraphTest, FractionsNeverDecrease) {
  const std::vector<double> open{1};
  FlowGraph g(open);
  g.RaiseFraction(0, 0.5);
  EXPECT_THROW(g.RaiseFraction(0, 0.25), Error);
}

TEST(FlowGraphTest, PurchaseIsIdempotentAndPathNeedsBothEdges) {
  const std::vector<double> open{1, 1};
  FlowGraph g(open);
  g.AddClient(0, {1.0, 1.0});
  EXPECT_TRUE(g.PurchaseEdge(*g.connection_edge(0, 1)));
  EXPECT_FALSE(g.PurchaseEdge(*g.connection_edge(0, 1)));
  EXPECT_FALSE(g.PathPurchased(0, 1));
  EXPECT_EQ(g.PurchasedDisjointPathCount(0), 0u);
  g.PurchaseEdge(g.root_edge(0));
  EXPECT_EQ(g.PurchasedDisjointPathCount(0), 0u);
  g.PurchaseEdge(*g.connection_edge(0, 0));
  g.PurchaseEdge(g.root_edge(1));
  EXPECT_TRUE(g.PathPurchased(0, 0));
  EXPECT_EQ(g.PurchasedDisjointPathCount(0), 2u);
}

TEST(FlowGraphTest, RemoveServedEdgeOnlyAffectsResidualView) {
  const std::vector<double> open{1, 1};
  FlowGraph g(open);
  g.AddClient(0, {1.0, 1.0});
  const EdgeId e0 = *g.connection_edge(0, 0);
  g.RaiseFraction(e0, 0.1);
  EXPECT_EQ(CodeOf([&] { g.RemoveServedEdge(0, 0); }), ErrorCode::kEdgeNotPurchased);
  g.PurchaseEdge(g.root_edge(0));
  g.PurchaseEdge(e0);
  g.RemoveServedEdge(0, 0);
  const Cut cut = g.MinCut(0);
  EXPECT_TRUE(std::find(cut.edges.begin(), cut.edges.end(), e0) == cut.edges.end());
  EXPECT_EQ(cut.size(), 1u);
  EXPECT_EQ(g.edge(e0).fraction, 0.1);
  EXPECT_EQ(g.PurchasedDisjointPathCount(0), 1u);

  g.PurchaseEdge(g.root_edge(1));
  g.PurchaseEdge(*g.connection_edge(0, 1));
  g.RemoveServedEdge(0, 1);
  EXPECT_EQ(CodeOf([&] { g.MinCut(0); }), ErrorCode::kNoResidualPath);
}

TEST(FlowGraphTest, ZeroCostEdgesStayOutOfCuts) {
  const std::vector<double> open{0, 2};
  FlowGraph g(open);
  g.AddClient(0, {3.0, 0.0});
  const Cut cut = g.MinCut(0);
  ASSERT_EQ(cut.size(), 2u);
  for (EdgeId e : cut.edges) EXPECT_GT(g.edge(e).cost, 0.0);
  EXPECT_EQ(cut.edges[0], *g.connection_edge(0, 0));
  EXPECT_EQ(cut.edges[1], g.root_edge(1));
}

TEST(FlowGraphTest, CostIncreaseIsBelowTwoAndMatchesIdentity) {
  Rng rng(5);
  const std::vector<double> open{1, 3, 7, 2, 9, 4};
  for (int trial = 0; trial < 200; ++trial) {
    FlowGraph g(open);
    ConnectionCosts costs(open.size());
    for (auto& c : costs) c = rng.Uniform(0.5, 10);
    g.AddClient(0, costs);
    while (true) {
      const Cut cut = g.MinCut(0);
      if (cut.weight >= 1.0) break;
      std::vector<double> before;
      for (EdgeId e : cut.edges) before.push_back(g.edge(e).fraction);
      const auto deltas = g.FractionIncrease(cut);
      double paid = 0;
      for (std::size_t p = 0; p < cut.size(); ++p) {
        const double c = g.edge(cut.edges[p]).cost;
        paid += c * deltas[p];
        EXPECT_NEAR(c * deltas[p], before[p] + 1.0 / cut.size(), 1e-9);
      }
      EXPECT_LT(paid, 2.0);
    }
  }
}

TEST(FlowGraphTest, StructuralAugmentingAndEnumeratedCutsAgree) {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + rng.Below(6);
    std::vector<double> open(m, 1.0);
    FlowGraph g(open);
    ConnectionCosts costs(m);
    for (auto& c : costs) c = 1.0;
    g.AddClient(0, costs);
    for (FacilityIndex j = 0; j < m; ++j) {
      g.RaiseFraction(g.root_edge(j), static_cast<double>(rng.Below(1025)) / 1024);
      g.RaiseFraction(*g.connection_edge(0, j), static_cast<double>(rng.Below(1025)) / 1024);
    }
    const Cut structural = g.MinCut(0);
    const Cut augmenting = g.MinCutAugmenting(0);
    EXPECT_EQ(structural.weight, EnumeratedMinCut(g, 0));
    EXPECT_EQ(structural.weight, augmenting.weight);
    // At most one edge per facility.
    std::set<FacilityIndex> seen;
    for (EdgeId e : structural.edges) EXPECT_TRUE(seen.insert(g.edge(e).facility).second);
  }
}

TEST(FlowGraphTest, StatsCountEveryIncrease) {
  const std::vector<double> open{2, 2};
  FlowGraph g(open);
  g.AddClient(0, {2.0, 2.0});
  int calls = 0;
  while (g.MinCut(0).weight < 1.0) {
    g.FractionIncrease(g.MinCut(0));
    ++calls;
  }
  EXPECT_EQ(g.stats().increases, static_cast<std::uint64_t>(calls));
  EXPECT_EQ(g.stats().bound_violations, 0u);
  EXPECT_EQ(g.stats().identity_violations, 0u);
  EXPECT_LT(g.stats().max_cost_increase, 2.0);
}

}  // namespace
}  // namespace mfl
