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

// Trial harness: run an online algorithm over an arrival order, compare with
// the exact optimum, batch over seeds, search adversarial orders and replay
// recorded traces.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "mfl/core.hpp"
#include "mfl/instance_io.hpp"
#include "mfl/ofl.hpp"
#include "mfl/ommfl.hpp"
#include "mfl/onmfl.hpp"
#include "mfl/oracle.hpp"
#include "mfl/random.hpp"
#include "mfl/trace.hpp"

namespace mfl {

// kOfl runs a plug-in on its own (one connection per client); it exists to
// compare the metric wrapper against its plug-in.
enum class Algorithm { kOnmfl, kOmmfl, kOfl };

inline std::string_view AlgorithmName(Algorithm a) {
  switch (a) {
    case Algorithm::kOnmfl: return "onmfl";
    case Algorithm::kOmmfl: return "ommfl";
    case Algorithm::kOfl: return "ofl";
  }
  return "?";
}

inline Algorithm ParseAlgorithm(std::string_view name) {
  if (name == "onmfl") return Algorithm::kOnmfl;
  if (name == "ommfl") return Algorithm::kOmmfl;
  if (name == "ofl") return Algorithm::kOfl;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown algorithm '" + std::string(name) + "'");
}

struct AlgorithmConfig {
  Algorithm algorithm = Algorithm::kOnmfl;
  OflKind ofl = OflKind::kGreedy;
};

struct TrialOptions {
  std::size_t oracle_cap = kDefaultOracleCap;
  bool record_trace = true;
  // Skips the oracle when the optimum is already known.
  std::optional<double> known_opt;
};

// Sums of the runtime invariant counters over one or more runs.
struct InvariantTally {
  std::uint64_t runs = 0;
  std::uint64_t arrivals = 0;
  std::uint64_t feasibility_checks = 0;
  std::uint64_t increases = 0;
  std::uint64_t edge_updates = 0;
  std::uint64_t bound_violations = 0;
  double max_cost_increase = 0.0;
  std::uint64_t identity_violations = 0;
  double max_identity_rel_error = 0.0;
  std::uint64_t loop_exits = 0;
  std::uint64_t exit_violations = 0;
  double min_exit_flow = kInfinity;
  std::uint64_t residual_checks = 0;
  std::uint64_t residual_violations = 0;
  std::uint64_t rounding_violations = 0;
  std::uint64_t rounding_paths = 0;
  std::uint64_t fallback_paths = 0;

  void Add(const FractionStats& f) {
    increases += f.increases;
    edge_updates += f.edge_updates;
    bound_violations += f.bound_violations;
    max_cost_increase = std::max(max_cost_increase, f.max_cost_increase);
    identity_violations += f.identity_violations;
    max_identity_rel_error = std::max(max_identity_rel_error, f.max_identity_rel_error);
  }
  void Add(const OnmflStats& s) {
    loop_exits += s.loop_exits;
    exit_violations += s.exit_violations;
    min_exit_flow = std::min(min_exit_flow, s.min_exit_flow);
    residual_checks += s.residual_checks;
    residual_violations += s.residual_violations;
    rounding_violations += s.rounding_violations;
    rounding_paths += s.rounding_paths;
    fallback_paths += s.fallback_paths;
  }
  void Merge(const InvariantTally& o) {
    runs += o.runs;
    arrivals += o.arrivals;
    feasibility_checks += o.feasibility_checks;
    increases += o.increases;
    edge_updates += o.edge_updates;
    bound_violations += o.bound_violations;
    max_cost_increase = std::max(max_cost_increase, o.max_cost_increase);
    identity_violations += o.identity_violations;
    max_identity_rel_error = std::max(max_identity_rel_error, o.max_identity_rel_error);
    loop_exits += o.loop_exits;
    exit_violations += o.exit_violations;
    min_exit_flow = std::min(min_exit_flow, o.min_exit_flow);
    residual_checks += o.residual_checks;
    residual_violations += o.residual_violations;
    rounding_violations += o.rounding_violations;
    rounding_paths += o.rounding_paths;
    fallback_paths += o.fallback_paths;
  }
};

struct TrialRow {
  std::uint64_t seed = 0;
  CostBreakdown cost;
  double rounding_cost = 0.0;
  double fallback_cost = 0.0;
  std::optional<double> opt;
  std::optional<double> ratio;
  std::optional<double> envelope;
  std::optional<double> alpha;
};

struct TrialResult {
  Solution solution;
  RunTrace trace;
  TrialRow row;
  InvariantTally tally;
  std::optional<DecompositionReport> decomposition;
};

// log2(k n + 1) * log2(m + 1) for the randomized algorithm; the wrapper's
// multiplier over its plug-in cost for the metric one.
inline std::optional<double> Envelope(const Instance& inst, Algorithm algorithm) {
  const double k = inst.k_max();
  switch (algorithm) {
    case Algorithm::kOnmfl:
      return std::log2(k * static_cast<double>(inst.num_clients()) + 1.0) *
             std::log2(static_cast<double>(inst.num_facilities()) + 1.0);
    case Algorithm::kOmmfl: {
      DecompositionReport r;
      r.k = inst.k_max();
      r.f_max = inst.f_max();
      r.f_min = inst.f_min();
      r.c_max = inst.c_max();
      r.c_min = inst.c_min();
      return r.Multiplier();
    }
    case Algorithm::kOfl:
      return std::nullopt;
  }
  return std::nullopt;
}

inline std::optional<double> Ratio(double cost, std::optional<double> opt) {
  if (!opt) return std::nullopt;
  if (*opt > 0.0) return cost / *opt;
  return cost > 0.0 ? kInfinity : 1.0;
}

namespace internal {

// Plug-in on its own, with the same charging order as the wrapper.
class BareOfl {
 public:
  BareOfl(std::vector<double> opening_costs, std::unique_ptr<OflAlgorithm> plugin)
      : opening_costs_(std::move(opening_costs)), plugin_(std::move(plugin)) {}

  void set_trace(RunTrace* trace) { trace_ = trace; }

  void OnArrival(ClientIndex i, const ConnectionCosts& costs) {
    if (trace_) trace_->Emit({.type = EventType::kArrival, .client = i});
    const OflDecision d = plugin_->OnArrival(costs);
    for (FacilityIndex j : d.opened) {
      if (trace_) trace_->Emit({.type = EventType::kOpen, .facility = j, .note = "plugin"});
      if (solution_.open_facilities.insert(j).second) {
        solution_.cost.facility_cost += opening_costs_[j];
      }
    }
    solution_.assignments[i].insert(d.connected_to);
    solution_.cost.connection_cost += *costs[d.connected_to];
    if (trace_) {
      trace_->Emit({.type = EventType::kServe, .client = i, .facility = d.connected_to});
    }
  }

  const Solution& solution() const { return solution_; }

 private:
  std::vector<double> opening_costs_;
  std::unique_ptr<OflAlgorithm> plugin_;
  Solution solution_;
  RunTrace* trace_ = nullptr;
};

}  // namespace internal

inline TrialResult RunTrial(const Instance& inst,
                            std::span<const ClientIndex> order,
                            const AlgorithmConfig& config, std::uint64_t seed,
                            const TrialOptions& options = {}) {
  TrialResult result;
  RunTrace* trace = options.record_trace ? &result.trace : nullptr;
  result.trace.header = {.instance_hash = InstanceHash(inst),
                         .algorithm = std::string(AlgorithmName(config.algorithm)),
                         .ofl = config.algorithm == Algorithm::kOnmfl
                                    ? ""
                                    : std::string(OflKindName(config.ofl)),
                         .seed = seed,
                         .k_max = inst.k_max(),
                         .n = inst.num_clients(),
                         .m = inst.num_facilities()};
  result.tally.runs = 1;
  std::vector<ClientIndex> arrived;
  arrived.reserve(order.size());

  auto check_prefix = [&](const Solution& sol, bool single_connection) {
    ++result.tally.feasibility_checks;
    bool ok = true;
    if (single_connection) {
      for (ClientIndex i : arrived) {
        auto it = sol.assignments.find(i);
        ok = ok && it != sol.assignments.end() && !it->second.empty() &&
             std::all_of(it->second.begin(), it->second.end(),
                         [&](FacilityIndex j) { return sol.open_facilities.contains(j); });
      }
    } else {
      ok = IsFeasible(inst, arrived, sol);
    }
    if (!ok) {
      throw Error(ErrorCode::kInvariantViolation,
                  "infeasible solution after arrival of client " +
                      std::to_string(arrived.back()));
    }
  };

  switch (config.algorithm) {
    case Algorithm::kOnmfl: {
      Onmfl algo(inst.num_clients(), inst.k_max(), inst.opening_costs(), seed);
      algo.set_trace(trace);
      result.trace.header.alpha = algo.alpha().alpha;
      result.trace.header.draw_count = algo.alpha().draw_count;
      result.row.alpha = algo.alpha().alpha;
      for (ClientIndex i : order) {
        algo.OnArrival(i, inst.clients.at(i).costs, inst.k(i));
        arrived.push_back(i);
        check_prefix(algo.solution(), false);
      }
      result.solution = algo.solution();
      result.row.rounding_cost = algo.rounding_cost();
      result.row.fallback_cost = algo.fallback_cost();
      result.tally.Add(algo.graph().stats());
      result.tally.Add(algo.stats());
      break;
    }
    case Algorithm::kOmmfl: {
      Ommfl algo(inst.opening_costs(), inst.k_max(),
                 MakeOfl(config.ofl, inst.opening_costs(), seed));
      algo.set_trace(trace);
      for (ClientIndex i : order) {
        algo.OnArrival(i, inst.clients.at(i).costs, inst.k(i));
        arrived.push_back(i);
        check_prefix(algo.solution(), false);
      }
      result.solution = algo.solution();
      if (!order.empty()) result.decomposition = algo.Report(&inst);
      break;
    }
    case Algorithm::kOfl: {
      internal::BareOfl algo(inst.opening_costs(),
                             MakeOfl(config.ofl, inst.opening_costs(), seed));
      algo.set_trace(trace);
      for (ClientIndex i : order) {
        algo.OnArrival(i, inst.clients.at(i).costs);
        arrived.push_back(i);
        check_prefix(algo.solution(), true);
      }
      result.solution = algo.solution();
      break;
    }
  }
  result.tally.arrivals = arrived.size();

  TrialRow& row = result.row;
  row.seed = seed;
  row.cost = result.solution.cost;
  row.envelope = Envelope(inst, config.algorithm);
  if (config.algorithm != Algorithm::kOfl) {
    if (options.known_opt) {
      row.opt = options.known_opt;
    } else if (inst.num_facilities() <= options.oracle_cap) {
      row.opt = OptimalOffline(inst, order, options.oracle_cap).opt;
    }
    row.ratio = Ratio(row.cost.total(), row.opt);
  }
  result.trace.footer = TraceFooter{.cost = result.solution.cost,
                                    .rounding_cost = row.rounding_cost,
                                    .fallback_cost = row.fallback_cost,
                                    .checksum = SolutionChecksum(result.solution)};
  return result;
}

inline TrialResult RunTrial(const Instance& inst, const AlgorithmConfig& config,
                            std::uint64_t seed, const TrialOptions& options = {}) {
  return RunTrial(inst, inst.arrival_order, config, seed, options);
}

// ---------------------------------------------------------------------------
// Batches

struct TrialReport {
  AlgorithmConfig config;
  std::vector<TrialRow> rows;
  std::optional<double> opt;
  std::optional<double> envelope;
  double mean_ratio = 0.0;
  double max_ratio = 0.0;
  double min_ratio = 0.0;
  double ratio_stderr = 0.0;
  double mean_total = 0.0;
  double mean_rounding = 0.0;
  double mean_fallback = 0.0;
  InvariantTally tally;
};

inline TrialReport RunBatch(const Instance& inst,
                            std::span<const ClientIndex> order,
                            const AlgorithmConfig& config,
                            std::span<const std::uint64_t> seeds,
                            TrialOptions options = {}, unsigned threads = 1) {
  TrialReport report;
  report.config = config;
  report.envelope = Envelope(inst, config.algorithm);
  if (config.algorithm != Algorithm::kOfl && !options.known_opt &&
      inst.num_facilities() <= options.oracle_cap) {
    options.known_opt = OptimalOffline(inst, order, options.oracle_cap).opt;
  }
  report.opt = options.known_opt;
  options.record_trace = false;

  const std::size_t count = seeds.size();
  report.rows.resize(count);
  std::vector<InvariantTally> tallies(count);
  std::vector<std::exception_ptr> errors(count);
  auto work = [&](std::size_t start, std::size_t stride) {
    for (std::size_t t = start; t < count; t += stride) {
      try {
        TrialResult r = RunTrial(inst, order, config, seeds[t], options);
        report.rows[t] = r.row;
        tallies[t] = r.tally;
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w, threads);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  double sum = 0, sum_sq = 0;
  std::size_t with_ratio = 0;
  report.max_ratio = 0.0;
  report.min_ratio = kInfinity;
  for (std::size_t t = 0; t < count; ++t) {
    const TrialRow& row = report.rows[t];
    report.tally.Merge(tallies[t]);
    report.mean_total += row.cost.total();
    report.mean_rounding += row.rounding_cost;
    report.mean_fallback += row.fallback_cost;
    if (row.ratio) {
      sum += *row.ratio;
      sum_sq += *row.ratio * *row.ratio;
      report.max_ratio = std::max(report.max_ratio, *row.ratio);
      report.min_ratio = std::min(report.min_ratio, *row.ratio);
      ++with_ratio;
    }
  }
  if (count > 0) {
    report.mean_total /= count;
    report.mean_rounding /= count;
    report.mean_fallback /= count;
  }
  if (with_ratio > 0) {
    const double w = static_cast<double>(with_ratio);
    report.mean_ratio = sum / w;
    const double var = with_ratio > 1
                           ? std::max(0.0, (sum_sq - sum * sum / w) / (w - 1))
                           : 0.0;
    report.ratio_stderr = std::sqrt(var / w);
  } else {
    report.min_ratio = 0.0;
  }
  return report;
}

inline std::vector<std::uint64_t> SeedRange(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> out(count);
  std::iota(out.begin(), out.end(), first);
  return out;
}

// ---------------------------------------------------------------------------
// Adversarial arrival orders

struct WorstOrderOptions {
  std::size_t sample_size = 2000;   // permutations when not exhaustive
  std::uint64_t sample_seed = 7;
  std::size_t exhaustive_limit = 8;  // n! <= 40320
  std::size_t oracle_cap = kDefaultOracleCap;
};

struct WorstOrderResult {
  std::vector<ClientIndex> order;
  double worst_ratio = 0.0;
  double mean_ratio = 0.0;
  std::size_t permutations = 0;
  bool exhaustive = false;
};

// The ratio of a permutation is its worst realized ratio over `seeds`. All
// permutations share the same client set, so the optimum is computed once.
inline WorstOrderResult WorstOrderSearch(const Instance& inst,
                                         const AlgorithmConfig& config,
                                         std::span<const std::uint64_t> seeds,
                                         const WorstOrderOptions& options = {}) {
  std::vector<ClientIndex> base = inst.arrival_order;
  if (base.empty()) {
    for (ClientIndex i = 0; i < inst.num_clients(); ++i) base.push_back(i);
  }
  TrialOptions trial;
  trial.record_trace = false;
  trial.oracle_cap = options.oracle_cap;
  trial.known_opt = OptimalOffline(inst, base, options.oracle_cap).opt;

  WorstOrderResult out;
  double ratio_sum = 0.0;
  std::size_t ratio_count = 0;
  auto evaluate = [&](const std::vector<ClientIndex>& order) {
    double worst = 0.0;
    for (std::uint64_t seed : seeds) {
      const double r = RunTrial(inst, order, config, seed, trial).row.ratio.value();
      worst = std::max(worst, r);
      ratio_sum += r;
      ++ratio_count;
    }
    if (out.permutations == 0 || worst > out.worst_ratio) {
      out.worst_ratio = worst;
      out.order = order;
    }
    ++out.permutations;
  };

  if (base.size() <= options.exhaustive_limit) {
    out.exhaustive = true;
    std::vector<ClientIndex> order = base;
    std::sort(order.begin(), order.end());
    do {
      evaluate(order);
    } while (std::next_permutation(order.begin(), order.end()));
  } else {
    Rng rng(options.sample_seed);
    std::vector<ClientIndex> order = base;
    for (std::size_t s = 0; s < options.sample_size; ++s) {
      std::shuffle(order.begin(), order.end(), rng.engine());
      evaluate(order);
    }
  }
  out.mean_ratio = ratio_count ? ratio_sum / static_cast<double>(ratio_count) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Replay

// Rebuilds the final solution from a trace without re-running any random
// choice, charging costs from the instance. Throws on a hash mismatch or when
// the rebuilt state differs from the trace's final line.
inline Solution Replay(const RunTrace& trace, const Instance& inst) {
  if (trace.header.instance_hash != InstanceHash(inst)) {
    throw Error(ErrorCode::kHashMismatch, "trace was recorded on another instance");
  }
  const bool edge_charging = trace.header.algorithm == "onmfl";
  Solution sol;
  double rounding = 0.0, fallback = 0.0;
  std::set<std::pair<FacilityIndex, std::optional<ClientIndex>>> bought;
  auto check_facility = [&](const TraceEvent& e) {
    if (!e.facility || *e.facility >= inst.num_facilities()) {
      throw Error(ErrorCode::kReplayDivergence, "event references unknown facility");
    }
  };
  auto connection_cost = [&](ClientIndex i, FacilityIndex j) {
    if (i >= inst.num_clients() || !inst.clients[i].costs[j]) {
      throw Error(ErrorCode::kReplayDivergence, "event uses a forbidden connection");
    }
    return *inst.clients[i].costs[j];
  };
  for (const TraceEvent& e : trace.events) {
    switch (e.type) {
      case EventType::kRoundingPurchase:
      case EventType::kFallbackPurchase:
      case EventType::kFreePurchase: {
        check_facility(e);
        if (!bought.insert({*e.facility, e.client}).second) break;
        const double cost = e.client ? connection_cost(*e.client, *e.facility)
                                     : inst.facilities[*e.facility].opening_cost;
        (e.client ? sol.cost.connection_cost : sol.cost.facility_cost) += cost;
        if (e.type == EventType::kRoundingPurchase) rounding += cost;
        if (e.type == EventType::kFallbackPurchase) fallback += cost;
        break;
      }
      case EventType::kOpen:
        check_facility(e);
        if (sol.open_facilities.insert(*e.facility).second && !edge_charging) {
          sol.cost.facility_cost += inst.facilities[*e.facility].opening_cost;
        }
        break;
      case EventType::kServe: {
        check_facility(e);
        if (!e.client) throw Error(ErrorCode::kReplayDivergence, "serve without client");
        const double cost = connection_cost(*e.client, *e.facility);
        sol.assignments[*e.client].insert(*e.facility);
        if (!edge_charging) sol.cost.connection_cost += cost;
        break;
      }
      case EventType::kArrival:
      case EventType::kCut:
      case EventType::kIncrease:
        break;
    }
  }
  if (trace.footer) {
    const TraceFooter& f = *trace.footer;
    if (!(f.cost == sol.cost) || f.rounding_cost != rounding ||
        f.fallback_cost != fallback || f.checksum != SolutionChecksum(sol)) {
      throw Error(ErrorCode::kReplayDivergence,
                  "replayed state does not match the recorded final state");
    }
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Output

inline std::string FormatNumber(std::optional<double> x) {
  if (!x) return "";
  std::ostringstream out;
  out << std::setprecision(17) << *x;
  return out.str();
}

inline void WriteTrialCsv(const TrialReport& report, std::ostream& out) {
  out << "seed,facility_cost,connection_cost,total,rounding_cost,fallback_cost,"
         "opt,ratio,envelope,alpha\n";
  for (const TrialRow& r : report.rows) {
    out << r.seed << ',' << FormatNumber(r.cost.facility_cost) << ','
        << FormatNumber(r.cost.connection_cost) << ','
        << FormatNumber(r.cost.total()) << ',' << FormatNumber(r.rounding_cost)
        << ',' << FormatNumber(r.fallback_cost) << ',' << FormatNumber(r.opt)
        << ',' << FormatNumber(r.ratio) << ',' << FormatNumber(r.envelope) << ','
        << FormatNumber(r.alpha) << '\n';
  }
}

inline nlohmann::json OptionalJson(std::optional<double> x) {
  return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

inline nlohmann::json ToJson(const TrialRow& r) {
  return {{"seed", r.seed},
          {"facility_cost", r.cost.facility_cost},
          {"connection_cost", r.cost.connection_cost},
          {"total", r.cost.total()},
          {"rounding_cost", r.rounding_cost},
          {"fallback_cost", r.fallback_cost},
          {"opt", OptionalJson(r.opt)},
          {"ratio", OptionalJson(r.ratio)},
          {"envelope", OptionalJson(r.envelope)},
          {"alpha", OptionalJson(r.alpha)}};
}

inline nlohmann::json ToJson(const TrialReport& r) {
  const bool has_ratio = r.opt.has_value();
  return {{"algorithm", AlgorithmName(r.config.algorithm)},
          {"ofl", r.config.algorithm == Algorithm::kOnmfl
                      ? nlohmann::json(nullptr)
                      : nlohmann::json(OflKindName(r.config.ofl))},
          {"trials", r.rows.size()},
          {"opt", OptionalJson(r.opt)},
          {"envelope", OptionalJson(r.envelope)},
          {"mean_ratio", has_ratio ? nlohmann::json(r.mean_ratio) : nullptr},
          {"max_ratio", has_ratio ? nlohmann::json(r.max_ratio) : nullptr},
          {"min_ratio", has_ratio ? nlohmann::json(r.min_ratio) : nullptr},
          {"ratio_stderr", has_ratio ? nlohmann::json(r.ratio_stderr) : nullptr},
          {"mean_total", r.mean_total},
          {"mean_rounding_cost", r.mean_rounding},
          {"mean_fallback_cost", r.mean_fallback},
          {"rounding_paths", r.tally.rounding_paths},
          {"fallback_paths", r.tally.fallback_paths}};
}

}  // namespace mfl
