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

// Instance and solution model for multi-facility location.
//
// A client must be connected to at least k_i distinct open facilities. Opening
// facility j costs f_j; connecting client i to facility j costs c(i, j). An
// absent connection cost means the pair may never be connected. Facilities and
// clients are addressed by their position in the instance; the string ids are
// only used at the file boundary.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mfl {

using FacilityIndex = std::size_t;
using ClientIndex = std::size_t;

// Connection costs of one client, indexed by facility. nullopt = forbidden.
using ConnectionCosts = std::vector<std::optional<double>>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Relative tolerance used for every comparison against an analytic bound.
inline constexpr double kRelTol = 1e-9;

inline bool LessOrClose(double lhs, double rhs, double rel_tol = kRelTol) {
  if (lhs <= rhs) return true;
  const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
  return lhs - rhs <= rel_tol * scale;
}

inline bool Close(double lhs, double rhs, double rel_tol = kRelTol) {
  return LessOrClose(lhs, rhs, rel_tol) && LessOrClose(rhs, lhs, rel_tol);
}

enum class ErrorCode {
  kInvalidArgument,
  kInfeasibleRequirement,
  kInfeasibleClient,
  kForbiddenConnection,
  kDuplicateClient,
  kNoResidualPath,
  kSaturatedCut,
  kEdgeNotPurchased,
  kInvariantViolation,
  kTooLargeForOracle,
  kHashMismatch,
  kReplayDivergence,
  kParseError,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kInfeasibleRequirement: return "infeasible_requirement";
    case ErrorCode::kInfeasibleClient: return "infeasible_client";
    case ErrorCode::kForbiddenConnection: return "forbidden_connection";
    case ErrorCode::kDuplicateClient: return "duplicate_client";
    case ErrorCode::kNoResidualPath: return "no_residual_path";
    case ErrorCode::kSaturatedCut: return "increase_on_saturated_cut";
    case ErrorCode::kEdgeNotPurchased: return "edge_not_purchased";
    case ErrorCode::kInvariantViolation: return "invariant_violation";
    case ErrorCode::kTooLargeForOracle: return "instance_too_large_for_oracle";
    case ErrorCode::kHashMismatch: return "hash_mismatch";
    case ErrorCode::kReplayDivergence: return "replay_divergence";
    case ErrorCode::kParseError: return "parse_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct Facility {
  std::string id;
  double opening_cost = 0.0;
};

struct Client {
  std::string id;
  ConnectionCosts costs;  // one slot per facility
};

struct Instance {
  std::vector<Facility> facilities;
  std::vector<Client> clients;
  // Per-client requirement k_i. A scalar k is stored as a constant vector.
  std::vector<int> requirement;
  // Remembers whether the requirement was given as a scalar (for output).
  bool scalar_requirement = true;
  bool metric = false;
  std::vector<ClientIndex> arrival_order;

  std::size_t num_facilities() const { return facilities.size(); }
  std::size_t num_clients() const { return clients.size(); }

  int k(ClientIndex i) const { return requirement.at(i); }

  int k_max() const {
    int best = 0;
    for (int k_i : requirement) best = std::max(best, k_i);
    return best;
  }

  std::vector<double> opening_costs() const {
    std::vector<double> out;
    out.reserve(facilities.size());
    for (const auto& f : facilities) out.push_back(f.opening_cost);
    return out;
  }

  double f_max() const {
    double best = 0.0;
    for (const auto& f : facilities) best = std::max(best, f.opening_cost);
    return best;
  }
  double f_min() const {
    double best = kInfinity;
    for (const auto& f : facilities) best = std::min(best, f.opening_cost);
    return facilities.empty() ? 0.0 : best;
  }

  // Extremes of allowed connection costs over `subset` (all clients if empty).
  std::pair<double, double> connection_cost_range(
      std::span<const ClientIndex> subset = {}) const {
    double lo = kInfinity, hi = 0.0;
    auto visit = [&](const Client& c) {
      for (const auto& cost : c.costs) {
        if (!cost) continue;
        lo = std::min(lo, *cost);
        hi = std::max(hi, *cost);
      }
    };
    if (subset.empty()) {
      for (const auto& c : clients) visit(c);
    } else {
      for (ClientIndex i : subset) visit(clients.at(i));
    }
    if (lo == kInfinity) lo = 0.0;
    return {lo, hi};
  }
  double c_max() const { return connection_cost_range().second; }
  double c_min() const { return connection_cost_range().first; }

  std::size_t allowed_count(ClientIndex i) const {
    std::size_t n = 0;
    for (const auto& cost : clients.at(i).costs) n += cost.has_value();
    return n;
  }
};

// Builds a scalar-k instance from dense matrices. Convenient in tests and
// generators; `costs[i][j]` is the connection cost of client i to facility j.
inline Instance MakeInstance(std::vector<double> opening_costs,
                             std::vector<ConnectionCosts> costs, int k,
                             bool metric = false) {
  Instance inst;
  for (std::size_t j = 0; j < opening_costs.size(); ++j) {
    inst.facilities.push_back({"f" + std::to_string(j), opening_costs[j]});
  }
  for (std::size_t i = 0; i < costs.size(); ++i) {
    costs[i].resize(opening_costs.size());
    inst.clients.push_back({"c" + std::to_string(i), std::move(costs[i])});
    inst.arrival_order.push_back(i);
  }
  inst.requirement.assign(inst.clients.size(), k);
  inst.scalar_requirement = true;
  inst.metric = metric;
  return inst;
}

struct CostBreakdown {
  double facility_cost = 0.0;
  double connection_cost = 0.0;

  double total() const { return facility_cost + connection_cost; }

  friend bool operator==(const CostBreakdown&, const CostBreakdown&) = default;
};

struct Solution {
  std::set<FacilityIndex> open_facilities;
  std::map<ClientIndex, std::set<FacilityIndex>> assignments;
  // Cost charged by whoever built the solution. For the online algorithms this
  // can exceed Evaluate() because purchases that ended up unused still count.
  CostBreakdown cost;
};

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string code;
  std::string message;
};

struct ValidateOptions {
  // Slack on the metric check, absolute plus relative.
  double metric_abs_slack = 1e-5;
  // Above this many client-facility pairs the metric check is sampled.
  std::size_t exhaustive_pair_limit = 10'000;
  std::size_t sampled_quadruples = 200'000;
  std::uint64_t sample_seed = 0x5eed;
};

namespace internal {

inline bool IsFiniteNonnegative(double x) { return std::isfinite(x) && x >= 0; }

// Metric check on a bipartite cost matrix: for clients a, b and facilities
// x, y the direct cost c(a, x) may not exceed the detour a-y-b-x.
inline bool MetricQuadrupleHolds(const Instance& inst, ClientIndex a,
                                 ClientIndex b, FacilityIndex x,
                                 FacilityIndex y, double slack) {
  const auto& ca = inst.clients[a].costs;
  const auto& cb = inst.clients[b].costs;
  if (!ca[x] || !ca[y] || !cb[x] || !cb[y]) return true;
  const double detour = *ca[y] + *cb[y] + *cb[x];
  return *ca[x] <= detour + slack + kRelTol * detour;
}

}  // namespace internal

inline std::vector<Violation> ValidateInstance(
    const Instance& inst, const ValidateOptions& options = {}) {
  std::vector<Violation> out;
  const std::size_t m = inst.num_facilities();
  const std::size_t n = inst.num_clients();

  for (const auto& f : inst.facilities) {
    if (!internal::IsFiniteNonnegative(f.opening_cost)) {
      out.push_back({"negative cost", "facility " + f.id +
                                          " has a negative or non-finite "
                                          "opening cost"});
    }
  }
  if (inst.requirement.size() != n) {
    out.push_back({"requirement size",
                   "requirement vector length does not match client count"});
  }
  for (ClientIndex i = 0; i < n; ++i) {
    const Client& c = inst.clients[i];
    if (c.costs.size() != m) {
      out.push_back({"unknown facility",
                     "client " + c.id +
                         " references facilities outside the declared set"});
      continue;
    }
    for (const auto& cost : c.costs) {
      if (cost && !internal::IsFiniteNonnegative(*cost)) {
        out.push_back({"negative cost", "client " + c.id +
                                            " has a negative or non-finite "
                                            "connection cost"});
        break;
      }
    }
    if (i < inst.requirement.size()) {
      const int k_i = inst.requirement[i];
      if (k_i < 1) {
        out.push_back({"bad requirement",
                       "client " + c.id + " has requirement below 1"});
      } else if (inst.allowed_count(i) < static_cast<std::size_t>(k_i)) {
        out.push_back({"insufficient allowed facilities",
                       "client " + c.id + " can reach fewer than " +
                           std::to_string(k_i) + " facilities"});
      }
    }
  }
  std::set<ClientIndex> seen;
  for (ClientIndex i : inst.arrival_order) {
    if (i >= n || !seen.insert(i).second) {
      out.push_back({"bad arrival order",
                     "arrival order repeats or references unknown clients"});
      break;
    }
  }
  if (!out.empty() || !inst.metric || n == 0 || m == 0) return out;

  std::size_t metric_failures = 0;
  auto check = [&](ClientIndex a, ClientIndex b, FacilityIndex x,
                   FacilityIndex y) {
    if (!internal::MetricQuadrupleHolds(inst, a, b, x, y,
                                        options.metric_abs_slack)) {
      ++metric_failures;
    }
  };
  if (n * m <= options.exhaustive_pair_limit) {
    for (ClientIndex a = 0; a < n; ++a)
      for (ClientIndex b = 0; b < n; ++b)
        for (FacilityIndex x = 0; x < m; ++x)
          for (FacilityIndex y = 0; y < m; ++y) check(a, b, x, y);
  } else {
    std::mt19937_64 gen(options.sample_seed);
    for (std::size_t s = 0; s < options.sampled_quadruples; ++s) {
      check(gen() % n, gen() % n, gen() % m, gen() % m);
    }
  }
  if (metric_failures > 0) {
    out.push_back({"triangle inequality",
                   std::to_string(metric_failures) +
                       " client/facility quadruples violate the triangle "
                       "inequality"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

inline CostBreakdown Evaluate(const Instance& inst, const Solution& sol) {
  CostBreakdown out;
  for (FacilityIndex j : sol.open_facilities) {
    if (j >= inst.num_facilities()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown facility index");
    }
    out.facility_cost += inst.facilities[j].opening_cost;
  }
  for (const auto& [i, facilities] : sol.assignments) {
    if (i >= inst.num_clients()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown client index");
    }
    for (FacilityIndex j : facilities) {
      if (j >= inst.num_facilities()) {
        throw Error(ErrorCode::kInvalidArgument, "unknown facility index");
      }
      const auto& cost = inst.clients[i].costs[j];
      if (!cost) {
        throw Error(ErrorCode::kForbiddenConnection,
                    "forbidden connection: client " + inst.clients[i].id +
                        " to facility " + inst.facilities[j].id);
      }
      out.connection_cost += *cost;
    }
  }
  return out;
}

inline bool IsFeasible(const Instance& inst, std::span<const ClientIndex> arrived,
                       const Solution& sol) {
  for (ClientIndex i : arrived) {
    auto it = sol.assignments.find(i);
    const std::size_t need = static_cast<std::size_t>(inst.k(i));
    if (it == sol.assignments.end()) {
      if (need > 0) return false;
      continue;
    }
    std::size_t good = 0;
    for (FacilityIndex j : it->second) {
      if (j >= inst.num_facilities()) return false;
      if (!inst.clients[i].costs[j]) return false;
      if (!sol.open_facilities.contains(j)) return false;
      ++good;
    }
    if (good < need) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Online set k-multicover and its embedding as a facility location instance.

struct OsmcSubset {
  std::string id;
  double cost = 0.0;
  std::vector<std::size_t> members;
};

struct OsmcInstance {
  std::size_t universe_size = 0;
  std::vector<OsmcSubset> subsets;
  int k = 1;
  std::vector<std::size_t> arrivals;
};

// Each subset becomes a facility with the subset's cost; each element becomes
// a client with a free edge to every subset containing it and no edge
// otherwise. The arrival order carries over.
inline Instance OsmcToOnmfl(const OsmcInstance& osmc) {
  if (osmc.k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  Instance inst;
  for (const auto& s : osmc.subsets) {
    inst.facilities.push_back({s.id, s.cost});
  }
  for (std::size_t e = 0; e < osmc.universe_size; ++e) {
    inst.clients.push_back(
        {"e" + std::to_string(e), ConnectionCosts(osmc.subsets.size())});
  }
  for (std::size_t j = 0; j < osmc.subsets.size(); ++j) {
    for (std::size_t e : osmc.subsets[j].members) {
      if (e >= osmc.universe_size) {
        throw Error(ErrorCode::kInvalidArgument,
                    "subset member outside the universe");
      }
      inst.clients[e].costs[j] = 0.0;
    }
  }
  inst.requirement.assign(osmc.universe_size, osmc.k);
  inst.scalar_requirement = true;
  inst.metric = false;
  inst.arrival_order = osmc.arrivals;
  return inst;
}

}  // namespace mfl
