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

// Seeded random instance generators.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mfl/core.hpp"
#include "mfl/random.hpp"

namespace mfl {

struct EuclideanOptions {
  std::size_t n = 6;
  std::size_t m = 8;
  int k = 1;
  std::uint64_t seed = 1;
  double box = 100.0;
  double opening_lo = 10.0;
  double opening_hi = 60.0;
};

// Facilities and clients uniform in a box; connection cost is the Euclidean
// distance rounded to 1e-6.
inline Instance GenerateEuclidean(const EuclideanOptions& opt) {
  if (opt.n < 1 || opt.m < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n and m must be at least 1");
  }
  if (opt.k < 1 || static_cast<std::size_t>(opt.k) > opt.m) {
    throw Error(ErrorCode::kInfeasibleRequirement,
                "infeasible requirement: k must be in [1, m]");
  }
  Rng rng(opt.seed);
  std::vector<std::pair<double, double>> fac(opt.m), cli(opt.n);
  std::vector<double> opening(opt.m);
  for (std::size_t j = 0; j < opt.m; ++j) {
    fac[j] = {rng.Uniform(0, opt.box), rng.Uniform(0, opt.box)};
    opening[j] = rng.Uniform(opt.opening_lo, opt.opening_hi);
  }
  std::vector<ConnectionCosts> costs(opt.n, ConnectionCosts(opt.m));
  for (std::size_t i = 0; i < opt.n; ++i) {
    cli[i] = {rng.Uniform(0, opt.box), rng.Uniform(0, opt.box)};
    for (std::size_t j = 0; j < opt.m; ++j) {
      const double d = std::hypot(cli[i].first - fac[j].first,
                                  cli[i].second - fac[j].second);
      costs[i][j] = std::round(d * 1e6) / 1e6;
    }
  }
  return MakeInstance(std::move(opening), std::move(costs), opt.k, true);
}

struct NonmetricOptions {
  std::size_t n = 6;
  std::size_t m = 8;
  int k = 1;
  std::uint64_t seed = 1;
  double cost_lo = 1.0;
  double cost_hi = 10.0;
  double opening_lo = 1.0;
  double opening_hi = 10.0;
  double density = 1.0;  // probability that a client-facility edge exists
};

// Independent uniform costs; each edge survives with probability `density`.
// Rows are resampled until the client keeps at least k edges.
inline Instance GenerateNonmetric(const NonmetricOptions& opt) {
  if (opt.n < 1 || opt.m < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n and m must be at least 1");
  }
  if (opt.k < 1 || static_cast<std::size_t>(opt.k) > opt.m) {
    throw Error(ErrorCode::kInfeasibleRequirement,
                "infeasible requirement: k must be in [1, m]");
  }
  if (!(opt.density > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "density must be positive");
  }
  Rng rng(opt.seed);
  std::vector<double> opening(opt.m);
  for (auto& f : opening) f = rng.Uniform(opt.opening_lo, opt.opening_hi);
  std::vector<ConnectionCosts> costs(opt.n);
  for (auto& row : costs) {
    do {
      row.assign(opt.m, std::nullopt);
      std::size_t kept = 0;
      for (std::size_t j = 0; j < opt.m; ++j) {
        const double c = rng.Uniform(opt.cost_lo, opt.cost_hi);
        if (opt.density >= 1.0 || rng.Uniform() < opt.density) {
          row[j] = c;
          ++kept;
        }
      }
      if (kept >= static_cast<std::size_t>(opt.k)) break;
    } while (true);
  }
  return MakeInstance(std::move(opening), std::move(costs), opt.k, false);
}

// Replaces the scalar requirement with per-client k_i uniform in [1, k_max],
// capped by what each client can reach.
inline void RandomizeRequirements(Instance& inst, int k_max, std::uint64_t seed) {
  Rng rng(seed);
  for (ClientIndex i = 0; i < inst.num_clients(); ++i) {
    const int k = 1 + static_cast<int>(rng.Below(static_cast<std::uint64_t>(k_max)));
    inst.requirement[i] = std::min<int>(k, static_cast<int>(inst.allowed_count(i)));
  }
  inst.scalar_requirement = false;
}

}  // namespace mfl
