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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mfl/bench.hpp"
#include "mfl/flowgraph.hpp"
#include "mfl/generators.hpp"
#include "mfl/oracle.hpp"

namespace mfl {
namespace {

constexpr double kTol = 1e-9;

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

unsigned Workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Runs body(t) for t in [0, count) on all cores.
void ParallelFor(std::size_t count, const std::function<void(std::size_t)>& body) {
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < Workers(); ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < count; t = next++) body(t);
    });
  }
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void Report(int id, const std::string& name, const Verdict& v) {
  std::printf("%s  %2d  %s: %s\n", v.pass ? "PASS" : "FAIL", id, name.c_str(),
              v.detail.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

template <typename... Args>
std::string Format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared generated suite (criteria 1, 2, 3, 7)

struct SuiteOutcome {
  int failures = 0;
  std::string first_error;
  InvariantTally onmfl;
  std::size_t trials_with_ratio = 0;
  std::size_t ratio_below_one = 0;
  double min_ratio = kInfinity;
  std::size_t per_client_instances = 0;
  std::size_t metric_instances = 0;
  double seconds = 0.0;
};

Instance SuiteInstance(std::uint64_t t) {
  Rng rng(0xACCE55 + t);
  const int k = 1 + static_cast<int>(rng.Below(3));
  const std::size_t n = 1 + rng.Below(8);
  const std::size_t m = static_cast<std::size_t>(k) + rng.Below(11 - k);
  Instance inst;
  if (t % 2 == 0) {
    inst = GenerateEuclidean({.n = n, .m = m, .k = k, .seed = t});
  } else {
    inst = GenerateNonmetric(
        {.n = n, .m = m, .k = k, .seed = t, .density = 0.5 + 0.5 * rng.Uniform()});
  }
  if (t % 3 == 0) RandomizeRequirements(inst, k, t + 7);
  return inst;
}

SuiteOutcome RunSuite() {
  constexpr std::size_t kInstances = 1000;
  const auto start = Clock::now();
  struct Slot {
    std::string error;
    InvariantTally tally;
    std::vector<double> ratios;
    bool per_client = false;
    bool metric = false;
  };
  std::vector<Slot> slots(kInstances);
  ParallelFor(kInstances, [&](std::size_t t) {
    Slot& slot = slots[t];
    try {
      const Instance inst = SuiteInstance(t);
      slot.per_client = !inst.scalar_requirement;
      slot.metric = inst.metric;
      if (!ValidateInstance(inst).empty()) {
        slot.error = "generated instance failed validation";
        return;
      }
      const double opt = OptimalOffline(inst).opt;  // reconstruction checked inside
      const TrialOptions options{.record_trace = false, .known_opt = opt};
      const TrialResult a = RunTrial(inst, {Algorithm::kOnmfl}, t, options);
      const OflKind plugin = t % 4 < 2 ? OflKind::kGreedy : OflKind::kMeyerson;
      const TrialResult b = RunTrial(inst, {Algorithm::kOmmfl, plugin}, t, options);
      slot.tally = a.tally;
      slot.ratios = {*a.row.ratio, *b.row.ratio};
    } catch (const std::exception& e) {
      slot.error = Format("instance %zu: %s", t, e.what());
    }
  });
  SuiteOutcome out;
  for (const Slot& slot : slots) {
    if (!slot.error.empty()) {
      if (out.failures++ == 0) out.first_error = slot.error;
      continue;
    }
    out.onmfl.Merge(slot.tally);
    out.per_client_instances += slot.per_client;
    out.metric_instances += slot.metric;
    for (double r : slot.ratios) {
      ++out.trials_with_ratio;
      out.min_ratio = std::min(out.min_ratio, r);
      if (r < 1.0 - kTol) ++out.ratio_below_one;
    }
  }
  out.seconds = Seconds(start);
  return out;
}

Verdict Feasibility(const SuiteOutcome& s) {
  Verdict v;
  v.pass = s.failures == 0 && s.seconds <= 120.0 && s.per_client_instances > 0 &&
           s.metric_instances > 0 && s.metric_instances < 1000;
  v.detail = Format(
      "1000 instances (%zu metric, %zu per-client k), %llu prefix checks, "
      "%d failures, %.1fs (limit 120s)",
      s.metric_instances, s.per_client_instances,
      static_cast<unsigned long long>(s.onmfl.feasibility_checks), s.failures, s.seconds);
  if (s.failures) v.detail += "; first: " + s.first_error;
  return v;
}

Verdict IncreaseBound(const SuiteOutcome& s) {
  const InvariantTally& t = s.onmfl;
  Verdict v;
  v.pass = s.failures == 0 && t.increases > 0 && t.bound_violations == 0 &&
           t.max_cost_increase < 2.0 && t.identity_violations == 0 &&
           t.max_identity_rel_error <= kTol;
  v.detail = Format(
      "%llu increases, %llu edge updates, max sum c*df = %.12f (< 2), "
      "max identity rel error = %.3g (<= 1e-9)",
      static_cast<unsigned long long>(t.increases),
      static_cast<unsigned long long>(t.edge_updates), t.max_cost_increase,
      t.max_identity_rel_error);
  return v;
}

Verdict LoopExitFlow(const SuiteOutcome& s) {
  const InvariantTally& t = s.onmfl;
  Verdict v;
  v.pass = s.failures == 0 && t.loop_exits > 0 && t.exit_violations == 0 &&
           t.min_exit_flow >= 1.0 - kTol;
  v.detail = Format("%llu loop exits, min flow = %.12f (>= 1 - 1e-9)",
                    static_cast<unsigned long long>(t.loop_exits), t.min_exit_flow);
  return v;
}

Verdict OnlineAboveOffline(const SuiteOutcome& s, const Verdict& envelope_run,
                           std::size_t envelope_trials) {
  Verdict v;
  v.pass = s.failures == 0 && s.ratio_below_one == 0 && envelope_run.pass;
  v.detail = Format(
      "%zu suite trials + %zu envelope trials, min ratio = %.12f, %zu below 1 - 1e-9",
      s.trials_with_ratio, envelope_trials, s.min_ratio, s.ratio_below_one);
  if (!envelope_run.pass) v.detail += "; " + envelope_run.detail;
  return v;
}

// ---------------------------------------------------------------------------
// 4. Cut equivalence

double EnumeratedMinCut(const FlowGraph& g, ClientIndex i) {
  const auto live = g.LiveFacilities(i);
  double best = kInfinity;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << live.size()); ++mask) {
    double w = 0;
    for (std::size_t p = 0; p < live.size(); ++p) {
      const EdgeId e =
          (mask >> p & 1) ? *g.connection_edge(i, live[p]) : g.root_edge(live[p]);
      w += g.edge(e).fraction;
    }
    best = std::min(best, w);
  }
  return best;
}

Verdict CutEquivalence() {
  constexpr int kCases = 500;
  Rng rng(4040);
  int mismatches = 0;
  std::string first;
  for (int t = 0; t < kCases; ++t) {
    const std::size_t m = 1 + rng.Below(6);
    std::vector<double> open(m);
    for (double& c : open) c = 1.0 + static_cast<double>(rng.Below(9));
    FlowGraph g(open);
    ConnectionCosts costs(m);
    costs[rng.Below(m)] = 1.0;
    for (auto& c : costs) {
      if (!c && rng.Uniform() < 0.7) c = 1.0 + static_cast<double>(rng.Below(9));
    }
    g.AddClient(0, costs);
    // Dyadic fractions in [0, 2] keep every sum exact.
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      const double f = static_cast<double>(rng.Below(33)) / 16.0;
      if (f > 0) g.RaiseFraction(e, f);
    }
    const Cut structural = g.MinCut(0);
    const Cut augmenting = g.MinCutAugmenting(0);
    const double enumerated = EnumeratedMinCut(g, 0);
    const double flow = g.MaxFlowValue(0, CutMethod::kAugmentingPath);
    if (structural.weight != enumerated || augmenting.weight != enumerated ||
        flow != enumerated) {
      if (mismatches++ == 0) {
        first = Format("case %d: structural %.17g, enumerated %.17g, augmenting %.17g", t,
                       structural.weight, enumerated, augmenting.weight);
      }
    }
  }
  Verdict v;
  v.pass = mismatches == 0;
  v.detail = Format("%d random dyadic assignments, m <= 6, %d mismatches", kCases,
                    mismatches);
  if (mismatches) v.detail += "; " + first;
  return v;
}

// ---------------------------------------------------------------------------
// 5, 6. Wrapper

Instance MetricInstance(std::uint64_t seed) {
  Rng rng(0x5EED + seed);
  const int k = 1 + static_cast<int>(rng.Below(3));
  const std::size_t n = 1 + rng.Below(8);
  const std::size_t m = static_cast<std::size_t>(k) + rng.Below(11 - k);
  return GenerateEuclidean({.n = n, .m = m, .k = k, .seed = seed});
}

Verdict Decomposition() {
  constexpr int kRuns = 100;
  int runs = 0, violations = 0, errors = 0;
  std::string first;
  for (OflKind kind : {OflKind::kGreedy, OflKind::kMeyerson}) {
    for (int s = 0; s < kRuns; ++s) {
      try {
        const Instance inst = MetricInstance(static_cast<std::uint64_t>(s));
        const TrialResult r = RunTrial(inst, {Algorithm::kOmmfl, kind}, s,
                                       {.oracle_cap = 0, .record_trace = false});
        const DecompositionReport& d = *r.decomposition;
        ++runs;
        if (!d.FacilityBoundHolds() || !d.ConnectionBoundHolds() || !d.TotalBoundHolds()) {
          if (violations++ == 0) {
            first = Format("%s seed %d: fac %.6g/%.6g con %.6g/%.6g total %.6g/%.6g",
                           std::string(OflKindName(kind)).c_str(), s, d.c_fac,
                           d.FacilityBound(), d.c_con, d.ConnectionBound(), d.total(),
                           d.TotalBound());
          }
        }
      } catch (const std::exception& e) {
        if (errors++ == 0) first = e.what();
      }
    }
  }
  Verdict v;
  v.pass = runs == 2 * kRuns && violations == 0 && errors == 0;
  v.detail = Format("%d runs (100 greedy, 100 meyerson), %d violations, %d errors", runs,
                    violations, errors);
  if (!first.empty()) v.detail += "; " + first;
  return v;
}

Verdict Degeneracy() {
  constexpr int kRuns = 100;
  int equal = 0, total = 0;
  for (int s = 0; s < kRuns; ++s) {
    Rng rng(0xD1 + s);
    const std::size_t n = 1 + rng.Below(8), m = 1 + rng.Below(10);
    const Instance inst = GenerateEuclidean({.n = n, .m = m, .k = 1, .seed = 900u + s});
    const OflKind kind = s % 2 ? OflKind::kMeyerson : OflKind::kGreedy;
    const TrialOptions options{.oracle_cap = 0, .record_trace = false};
    const auto wrapped = RunTrial(inst, {Algorithm::kOmmfl, kind}, s, options);
    const auto bare = RunTrial(inst, {Algorithm::kOfl, kind}, s, options);
    ++total;
    equal += wrapped.row.cost.facility_cost == bare.row.cost.facility_cost &&
             wrapped.row.cost.connection_cost == bare.row.cost.connection_cost;
  }
  Verdict v;
  v.pass = equal == total && total == kRuns;
  v.detail = Format("%d/%d runs with identical cost breakdown", equal, total);
  return v;
}

// ---------------------------------------------------------------------------
// 8. Ratio envelope

struct EnvelopeOutcome {
  Verdict verdict;
  Verdict ratio_floor;
  std::size_t trials = 0;
};

EnvelopeOutcome RatioEnvelope() {
  constexpr double kC = 8.0;
  constexpr std::size_t kSeeds = 200, kOrders = 50;
  const auto start = Clock::now();
  struct Family {
    std::size_t m, n;
    int k;
  };
  const Family families[] = {{8, 6, 2}, {10, 8, 3}};
  EnvelopeOutcome out;
  bool pass = true;
  std::size_t below = 0;
  std::string detail;
  const auto seeds = SeedRange(1, kSeeds);
  for (const Family& fam : families) {
    const Instance variants[] = {
        GenerateNonmetric({.n = fam.n, .m = fam.m, .k = fam.k, .seed = 17, .density = 0.8}),
        GenerateEuclidean({.n = fam.n, .m = fam.m, .k = fam.k, .seed = 17})};
    for (const Instance& inst : variants) {
      const double bound = kC * *Envelope(inst, Algorithm::kOnmfl);
      const double opt = OptimalOffline(inst).opt;
      std::vector<std::vector<ClientIndex>> orders{inst.arrival_order};
      Rng rng(99);
      while (orders.size() < kOrders) {
        auto order = orders.back();
        std::shuffle(order.begin(), order.end(), rng.engine());
        orders.push_back(order);
      }
      double worst = 0.0;
      for (const auto& order : orders) {
        const TrialReport rep = RunBatch(inst, order, {Algorithm::kOnmfl}, seeds,
                                         {.known_opt = opt}, Workers());
        worst = std::max(worst, rep.max_ratio);
        out.trials += rep.rows.size();
        for (const TrialRow& row : rep.rows) below += *row.ratio < 1.0 - kTol;
      }
      pass = pass && worst <= bound;
      detail += Format("%s m=%zu n=%zu k=%d: max %.3f <= %.3f; ",
                       inst.metric ? "euclidean" : "nonmetric", fam.m, fam.n, fam.k,
                       worst, bound);
    }
  }
  const double seconds = Seconds(start);
  out.verdict.pass = pass && seconds <= 300.0;
  out.verdict.detail = detail + Format("%zu trials, %.1fs (limit 300s)", out.trials, seconds);
  out.ratio_floor.pass = below == 0;
  out.ratio_floor.detail = Format("%zu envelope trials below 1 - 1e-9", below);
  return out;
}

// ---------------------------------------------------------------------------
// 9. Determinism and replay

Verdict DeterminismAndReplay() {
  int runs = 0, mismatches = 0;
  std::string first;
  for (std::uint64_t s = 0; s < 60; ++s) {
    const Instance inst = SuiteInstance(s + 5000);
    for (Algorithm a : {Algorithm::kOnmfl, Algorithm::kOmmfl, Algorithm::kOfl}) {
      const AlgorithmConfig cfg{a, s % 2 ? OflKind::kMeyerson : OflKind::kGreedy};
      const TrialResult x = RunTrial(inst, cfg, s, {.oracle_cap = 0});
      const TrialResult y = RunTrial(inst, cfg, s, {.oracle_cap = 0});
      std::stringstream buf;
      WriteTrace(x.trace, buf);
      const Solution replayed = Replay(ReadTrace(buf), inst);
      ++runs;
      const bool same = x.row.cost == y.row.cost && replayed.cost == x.row.cost &&
                        x.row.rounding_cost == y.row.rounding_cost &&
                        x.row.fallback_cost == y.row.fallback_cost &&
                        SolutionChecksum(replayed) == x.trace.footer->checksum;
      if (!same && mismatches++ == 0) {
        first = Format("instance %llu algorithm %s",
                       static_cast<unsigned long long>(s + 5000),
                       std::string(AlgorithmName(a)).c_str());
      }
    }
  }
  Verdict v;
  v.pass = mismatches == 0;
  v.detail = Format("%d trials re-run and replayed from serialized traces, %d mismatches",
                    runs, mismatches);
  if (mismatches) v.detail += "; " + first;
  return v;
}

// ---------------------------------------------------------------------------
// 10. Reduction fidelity

double BruteForceCover(const OsmcInstance& osmc) {
  double best = kInfinity;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << osmc.subsets.size()); ++mask) {
    double cost = 0;
    std::vector<int> cover(osmc.universe_size, 0);
    for (std::size_t j = 0; j < osmc.subsets.size(); ++j) {
      if (!(mask >> j & 1)) continue;
      cost += osmc.subsets[j].cost;
      for (std::size_t e : osmc.subsets[j].members) ++cover[e];
    }
    bool ok = true;
    for (std::size_t e : osmc.arrivals) ok = ok && cover[e] >= osmc.k;
    if (ok) best = std::min(best, cost);
  }
  return best;
}

Verdict ReductionFidelity() {
  constexpr int kInstances = 200;
  Rng rng(1010);
  int mismatches = 0;
  std::string first;
  for (int t = 0; t < kInstances; ++t) {
    OsmcInstance osmc;
    osmc.universe_size = 1 + rng.Below(8);
    osmc.k = 1 + static_cast<int>(rng.Below(3));
    const std::size_t subsets = 1 + rng.Below(8);
    for (std::size_t j = 0; j < subsets; ++j) {
      OsmcSubset sub{"S" + std::to_string(j), 0.5 * static_cast<double>(1 + rng.Below(20)),
                     {}};
      for (std::size_t e = 0; e < osmc.universe_size; ++e) {
        if (rng.Uniform() < 0.5) sub.members.push_back(e);
      }
      osmc.subsets.push_back(std::move(sub));
    }
    std::vector<int> cover(osmc.universe_size, 0);
    for (const auto& sub : osmc.subsets) {
      for (std::size_t e : sub.members) ++cover[e];
    }
    for (std::size_t e = 0; e < osmc.universe_size; ++e) {
      if (cover[e] >= osmc.k) osmc.arrivals.push_back(e);
    }
    std::shuffle(osmc.arrivals.begin(), osmc.arrivals.end(), rng.engine());
    const Instance inst = OsmcToOnmfl(osmc);
    const double reduced = OptimalOffline(inst, inst.arrival_order).opt;
    const double direct = BruteForceCover(osmc);
    if (reduced != direct && mismatches++ == 0) {
      first = Format("instance %d: cover %.17g vs reduced %.17g", t, direct, reduced);
    }
  }
  Verdict v;
  v.pass = mismatches == 0;
  v.detail = Format("%d covering instances (<= 8 subsets, <= 8 elements), %d mismatches",
                    kInstances, mismatches);
  if (mismatches) v.detail += "; " + first;
  return v;
}

}  // namespace
}  // namespace mfl

int main() {
  using namespace mfl;
  const SuiteOutcome suite = RunSuite();
  Report(1, "feasibility after every arrival", Feasibility(suite));
  Report(2, "fraction increase bound and update identity", IncreaseBound(suite));
  Report(3, "loop-exit flow", LoopExitFlow(suite));
  Report(4, "min-cut equivalence", CutEquivalence());
  Report(5, "wrapper cost decomposition", Decomposition());
  Report(6, "k=1 wrapper equals plug-in", Degeneracy());
  const EnvelopeOutcome envelope = RatioEnvelope();
  Report(7, "online cost >= offline optimum",
         OnlineAboveOffline(suite, envelope.ratio_floor, envelope.trials));
  Report(8, "randomized algorithm ratio envelope (C = 8)", envelope.verdict);
  Report(9, "determinism and replay", DeterminismAndReplay());
  Report(10, "covering reduction fidelity", ReductionFidelity());
  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
