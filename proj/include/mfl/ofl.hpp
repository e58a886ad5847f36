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

// Single-connection online facility location plug-ins. The metric
// multi-connection wrapper drives any of these through OflAlgorithm.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "mfl/core.hpp"
#include "mfl/random.hpp"

namespace mfl {

struct OflDecision {
  std::vector<FacilityIndex> opened;
  FacilityIndex connected_to = 0;
};

class OflAlgorithm {
 public:
  virtual ~OflAlgorithm() = default;

  // Serves one arriving client. Decisions are final.
  virtual OflDecision OnArrival(const ConnectionCosts& costs) = 0;

  virtual std::string_view name() const = 0;

  // Competitive guarantee of the plug-in, informational only.
  virtual std::string_view competitive_ratio() const = 0;

  const std::set<FacilityIndex>& open_facilities() const { return open_; }

 protected:
  explicit OflAlgorithm(std::vector<double> opening_costs)
      : opening_costs_(std::move(opening_costs)) {}

  struct Candidates {
    std::optional<FacilityIndex> nearest_open;
    double open_distance = kInfinity;
    std::optional<FacilityIndex> best_closed;  // argmin opening + connection
    double closed_total = kInfinity;
  };

  Candidates Scan(const ConnectionCosts& costs) const {
    if (costs.size() != opening_costs_.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "connection cost vector does not match facility count");
    }
    Candidates c;
    for (FacilityIndex j = 0; j < costs.size(); ++j) {
      if (!costs[j]) continue;
      if (open_.contains(j)) {
        if (*costs[j] < c.open_distance) {
          c.open_distance = *costs[j];
          c.nearest_open = j;
        }
      } else {
        const double total = opening_costs_[j] + *costs[j];
        if (total < c.closed_total) {
          c.closed_total = total;
          c.best_closed = j;
        }
      }
    }
    if (!c.nearest_open && !c.best_closed) {
      throw Error(ErrorCode::kInfeasibleClient, "client has no allowed facility");
    }
    return c;
  }

  std::vector<double> opening_costs_;
  std::set<FacilityIndex> open_;
};

// Connect to the nearest open facility unless opening a closed one is no more
// expensive in total.
class GreedyOfl final : public OflAlgorithm {
 public:
  explicit GreedyOfl(std::vector<double> opening_costs)
      : OflAlgorithm(std::move(opening_costs)) {}

  OflDecision OnArrival(const ConnectionCosts& costs) override {
    const Candidates c = Scan(costs);
    if (c.nearest_open && (!c.best_closed || c.open_distance <= c.closed_total)) {
      return {{}, *c.nearest_open};
    }
    open_.insert(*c.best_closed);
    return {{*c.best_closed}, *c.best_closed};
  }

  std::string_view name() const override { return "greedy"; }
  std::string_view competitive_ratio() const override { return "none claimed"; }
};

// Opens the best closed candidate with probability min(1, d / f), where d is
// the distance to the nearest open facility and f the candidate's opening
// cost. One uniform is consumed per arrival regardless of the outcome.
class MeyersonOfl final : public OflAlgorithm {
 public:
  MeyersonOfl(std::vector<double> opening_costs, std::uint64_t seed)
      : OflAlgorithm(std::move(opening_costs)), rng_(seed) {}

  OflDecision OnArrival(const ConnectionCosts& costs) override {
    const Candidates c = Scan(costs);
    const double coin = rng_.Uniform();
    OflDecision decision;
    if (c.best_closed) {
      const double f = opening_costs_[*c.best_closed];
      double p = 1.0;
      if (c.nearest_open) {
        p = f > 0.0 ? std::min(1.0, c.open_distance / f)
                    : (c.open_distance > 0.0 ? 1.0 : 0.0);
      }
      if (coin < p) {
        open_.insert(*c.best_closed);
        decision.opened.push_back(*c.best_closed);
      }
    }
    // Cheapest connection among open facilities after the coin flip.
    std::optional<FacilityIndex> best;
    for (FacilityIndex j : open_) {
      if (costs[j] && (!best || *costs[j] < *costs[*best])) best = j;
    }
    decision.connected_to = *best;
    return decision;
  }

  std::string_view name() const override { return "meyerson"; }
  std::string_view competitive_ratio() const override {
    return "none claimed for heterogeneous facility sets";
  }

 private:
  Rng rng_;
};

enum class OflKind { kGreedy, kMeyerson };

inline std::string_view OflKindName(OflKind kind) {
  return kind == OflKind::kGreedy ? "greedy" : "meyerson";
}

inline OflKind ParseOflKind(std::string_view name) {
  if (name == "greedy") return OflKind::kGreedy;
  if (name == "meyerson") return OflKind::kMeyerson;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown OFL plug-in '" + std::string(name) + "'");
}

inline std::unique_ptr<OflAlgorithm> MakeOfl(OflKind kind,
                                             std::vector<double> opening_costs,
                                             std::uint64_t seed) {
  if (kind == OflKind::kGreedy) {
    return std::make_unique<GreedyOfl>(std::move(opening_costs));
  }
  return std::make_unique<MeyersonOfl>(std::move(opening_costs), seed);
}

}  // namespace mfl
