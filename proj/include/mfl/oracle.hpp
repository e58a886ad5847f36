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

// Exact offline optimum by enumerating every facility subset.
//
// For a fixed open set S the best assignment connects each client to its k_i
// cheapest allowed facilities in S, so the optimum is a minimum over 2^m
// subsets. Ties go to the smaller bitmask.

#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "mfl/core.hpp"

namespace mfl {

inline constexpr std::size_t kDefaultOracleCap = 20;

struct OracleResult {
  double opt = 0.0;
  std::uint64_t mask = 0;
  Solution solution;
  std::uint64_t subsets_examined = 0;
};

namespace internal {

// Cost of serving `clients` from the facilities in `mask`, or +inf when some
// client cannot reach k_i of them. Fills `scratch` as working storage.
inline double SubsetCost(const Instance& inst,
                         std::span<const ClientIndex> clients,
                         std::uint64_t mask, std::vector<double>& scratch) {
  const std::size_t m = inst.num_facilities();
  double total = 0.0;
  for (FacilityIndex j = 0; j < m; ++j) {
    if (mask >> j & 1) total += inst.facilities[j].opening_cost;
  }
  for (ClientIndex i : clients) {
    const auto& costs = inst.clients[i].costs;
    scratch.clear();
    for (FacilityIndex j = 0; j < m; ++j) {
      if ((mask >> j & 1) && costs[j]) scratch.push_back(*costs[j]);
    }
    const std::size_t k = static_cast<std::size_t>(inst.k(i));
    if (scratch.size() < k) return kInfinity;
    std::partial_sort(scratch.begin(), scratch.begin() + k, scratch.end());
    for (std::size_t t = 0; t < k; ++t) total += scratch[t];
  }
  return total;
}

}  // namespace internal

inline OracleResult OptimalOffline(const Instance& inst,
                                   std::span<const ClientIndex> arrived,
                                   std::size_t cap = kDefaultOracleCap) {
  const std::size_t m = inst.num_facilities();
  if (m > cap || m >= 63) {
    throw Error(ErrorCode::kTooLargeForOracle,
                "instance too large for exact oracle (" + std::to_string(m) +
                    " facilities, cap " + std::to_string(cap) + ")");
  }
  for (ClientIndex i : arrived) {
    if (inst.allowed_count(i) < static_cast<std::size_t>(inst.k(i))) {
      throw Error(ErrorCode::kInfeasibleClient,
                  "client " + inst.clients[i].id + " cannot be served");
    }
  }
  OracleResult result;
  if (arrived.empty()) return result;

  std::vector<double> scratch;
  scratch.reserve(m);
  double best = kInfinity;
  std::uint64_t best_mask = 0;
  const std::uint64_t end = std::uint64_t{1} << m;
  for (std::uint64_t mask = 1; mask < end; ++mask) {
    ++result.subsets_examined;
    const double cost = internal::SubsetCost(inst, arrived, mask, scratch);
    if (cost < best) {
      best = cost;
      best_mask = mask;
    }
  }
  result.opt = best;
  result.mask = best_mask;

  // Reconstruct the assignment; ties between equal connection costs go to the
  // lower facility index.
  Solution& sol = result.solution;
  for (FacilityIndex j = 0; j < m; ++j) {
    if (best_mask >> j & 1) sol.open_facilities.insert(j);
  }
  for (ClientIndex i : arrived) {
    std::vector<FacilityIndex> usable;
    for (FacilityIndex j : sol.open_facilities) {
      if (inst.clients[i].costs[j]) usable.push_back(j);
    }
    std::stable_sort(usable.begin(), usable.end(),
                     [&](FacilityIndex a, FacilityIndex b) {
                       return *inst.clients[i].costs[a] < *inst.clients[i].costs[b];
                     });
    usable.resize(static_cast<std::size_t>(inst.k(i)));
    sol.assignments[i] = {usable.begin(), usable.end()};
  }
  sol.cost = Evaluate(inst, sol);
  if (!Close(sol.cost.total(), best)) {
    throw Error(ErrorCode::kInvariantViolation,
                "oracle reconstruction disagrees with enumerated optimum");
  }
  return result;
}

inline OracleResult OptimalOffline(const Instance& inst,
                                   std::size_t cap = kDefaultOracleCap) {
  return OptimalOffline(inst, inst.arrival_order, cap);
}

// Optimum of every arrival prefix, starting with the empty prefix.
inline std::vector<double> PrefixOpts(const Instance& inst,
                                      std::span<const ClientIndex> order,
                                      std::size_t cap = kDefaultOracleCap) {
  std::vector<double> out{0.0};
  for (std::size_t len = 1; len <= order.size(); ++len) {
    out.push_back(OptimalOffline(inst, order.first(len), cap).opt);
  }
  return out;
}

}  // namespace mfl
