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

// Command-line driver: instance generation, single trials, seed batches,
// arrival-order search, exact optimum and trace replay.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "mfl/bench.hpp"
#include "mfl/generators.hpp"
#include "mfl/instance_io.hpp"
#include "mfl/oracle.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct AlgoFlags {
  std::string algo = "onmfl";
  std::string ofl = "greedy";

  mfl::AlgorithmConfig Config() const {
    return {mfl::ParseAlgorithm(algo), mfl::ParseOflKind(ofl)};
  }
};

void AddAlgoFlags(CLI::App* cmd, AlgoFlags& flags) {
  cmd->add_option("--algo", flags.algo, "onmfl, ommfl or ofl")
      ->check(CLI::IsMember({"onmfl", "ommfl", "ofl"}));
  cmd->add_option("--ofl", flags.ofl, "plug-in for ommfl/ofl: greedy or meyerson")
      ->check(CLI::IsMember({"greedy", "meyerson"}));
}

// Output directory from --out, else $MFL_OUT_DIR, else none.
std::optional<fs::path> OutDir(const std::string& flag) {
  std::string dir = flag;
  if (dir.empty()) {
    if (const char* env = std::getenv("MFL_OUT_DIR")) dir = env;
  }
  if (dir.empty()) return std::nullopt;
  fs::create_directories(dir);
  return fs::path(dir);
}

void WriteJson(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw mfl::Error(mfl::ErrorCode::kInvalidArgument, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json DecompositionJson(const mfl::DecompositionReport& r) {
  return {{"facility_cost", r.c_fac},
          {"connection_cost", r.c_con},
          {"plugin_facility_cost", r.plugin_fac},
          {"plugin_connection_cost", r.plugin_con},
          {"facility_bound", r.FacilityBound()},
          {"connection_bound", r.ConnectionBound()},
          {"total_bound", r.TotalBound()},
          {"facility_bound_holds", r.FacilityBoundHolds()},
          {"connection_bound_holds", r.ConnectionBoundHolds()},
          {"total_bound_holds", r.TotalBoundHolds()}};
}

std::vector<std::uint64_t> Seeds(std::uint64_t first, std::size_t count) {
  if (count == 0) throw mfl::Error(mfl::ErrorCode::kInvalidArgument, "--seeds must be positive");
  return mfl::SeedRange(first, count);
}

int Fail(mfl::ErrorCode code, const std::string& message) {
  std::cerr << json{{"error", mfl::ErrorCodeName(code)}, {"message", message}}.dump()
            << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online multi-facility location toolkit"};
  app.require_subcommand(1);

  std::string instance_path, out_flag, trace_path;
  std::size_t oracle_cap = mfl::kDefaultOracleCap;
  AlgoFlags algo;
  std::uint64_t seed = 1;
  std::size_t seeds = 20, samples = 2000;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random instance");
  std::string kind = "euclidean";
  mfl::EuclideanOptions euclid;
  mfl::NonmetricOptions nonmetric;
  std::size_t n = 6, m = 8;
  int k = 1, k_max_vector = 0;
  double box = euclid.box, density = nonmetric.density;
  gen->add_option("--kind", kind, "euclidean or nonmetric")
      ->check(CLI::IsMember({"euclidean", "nonmetric"}));
  gen->add_option("--n", n, "number of clients");
  gen->add_option("--m", m, "number of facilities");
  gen->add_option("--k", k, "requirement per client");
  gen->add_option("--per-client-k", k_max_vector,
                  "draw a requirement vector in 1..K instead of a scalar");
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--box", box, "side of the square (euclidean)");
  gen->add_option("--density", density, "edge probability (nonmetric)");
  gen->add_option("--out", out_flag, "output file (default stdout)");

  // run
  auto* run = app.add_subcommand("run", "run one trial and write its trace");
  run->add_option("--instance", instance_path, "instance file")->required();
  AddAlgoFlags(run, algo);
  run->add_option("--seed", seed, "trial seed");
  run->add_option("--oracle-cap", oracle_cap, "largest m solved exactly");
  run->add_option("--out", out_flag, "output directory");

  // bench
  auto* bench = app.add_subcommand("bench", "run a batch of seeds");
  bench->add_option("--instance", instance_path, "instance file")->required();
  AddAlgoFlags(bench, algo);
  bench->add_option("--seeds", seeds, "number of seeds");
  bench->add_option("--seed", seed, "first seed");
  bench->add_option("--threads", threads, "worker threads");
  bench->add_option("--oracle-cap", oracle_cap, "largest m solved exactly");
  bench->add_option("--out", out_flag, "output directory");

  // worst
  auto* worst = app.add_subcommand("worst", "search for the worst arrival order");
  worst->add_option("--instance", instance_path, "instance file")->required();
  AddAlgoFlags(worst, algo);
  worst->add_option("--seeds", seeds, "seeds per order");
  worst->add_option("--seed", seed, "first seed");
  worst->add_option("--samples", samples, "sampled orders when n > 8");
  worst->add_option("--oracle-cap", oracle_cap, "largest m solved exactly");
  worst->add_option("--out", out_flag, "output directory");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "exact offline optimum");
  oracle->add_option("--instance", instance_path, "instance file")->required();
  oracle->add_option("--oracle-cap", oracle_cap, "largest m solved exactly");

  // replay
  auto* replay = app.add_subcommand("replay", "rebuild a solution from a trace");
  replay->add_option("--instance", instance_path, "instance file")->required();
  replay->add_option("--trace", trace_path, "trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }

  try {
    if (gen->parsed()) {
      mfl::Instance inst;
      if (kind == "euclidean") {
        inst = mfl::GenerateEuclidean(
            {.n = n, .m = m, .k = k, .seed = seed, .box = box});
      } else {
        inst = mfl::GenerateNonmetric(
            {.n = n, .m = m, .k = k, .seed = seed, .density = density});
      }
      if (k_max_vector > 0) mfl::RandomizeRequirements(inst, k_max_vector, seed + 1);
      if (out_flag.empty()) {
        std::cout << mfl::ToJson(inst).dump(2) << '\n';
      } else {
        mfl::SaveInstance(inst, out_flag);
      }
      return 0;
    }

    const mfl::Instance inst = mfl::LoadInstance(instance_path);
    const auto violations = mfl::ValidateInstance(inst);
    if (!violations.empty()) {
      std::string message;
      for (const auto& v : violations) {
        message += (message.empty() ? "" : "; ") + v.code + ": " + v.message;
      }
      return Fail(mfl::ErrorCode::kInvalidArgument, message);
    }

    if (oracle->parsed()) {
      std::cout << mfl::ToJson(inst, mfl::OptimalOffline(inst, oracle_cap)).dump(2)
                << '\n';
      return 0;
    }

    if (replay->parsed()) {
      std::ifstream in(trace_path);
      if (!in) return Fail(mfl::ErrorCode::kParseError, "cannot open " + trace_path);
      const mfl::RunTrace trace = mfl::ReadTrace(in);
      const mfl::Solution sol = mfl::Replay(trace, inst);
      std::cout << json{{"facility_cost", sol.cost.facility_cost},
                        {"connection_cost", sol.cost.connection_cost},
                        {"total", sol.cost.total()},
                        {"checksum", mfl::SolutionChecksum(sol)},
                        {"matches", trace.footer.has_value()}}
                       .dump(2)
                << '\n';
      return 0;
    }

    const mfl::AlgorithmConfig config = algo.Config();
    const auto out_dir = OutDir(out_flag);

    if (run->parsed()) {
      const mfl::TrialResult r =
          mfl::RunTrial(inst, config, seed, {.oracle_cap = oracle_cap});
      json doc = mfl::ToJson(r.row);
      if (r.decomposition) doc["decomposition"] = DecompositionJson(*r.decomposition);
      if (out_dir) {
        std::ofstream trace(*out_dir / "trace.jsonl");
        mfl::WriteTrace(r.trace, trace);
        WriteJson(*out_dir / "result.json", doc);
      }
      std::cout << doc.dump(2) << '\n';
      return 0;
    }

    if (bench->parsed()) {
      const auto seed_list = Seeds(seed, seeds);
      const mfl::TrialReport report = mfl::RunBatch(
          inst, inst.arrival_order, config, seed_list, {.oracle_cap = oracle_cap}, threads);
      const json doc = mfl::ToJson(report);
      if (out_dir) {
        std::ofstream csv(*out_dir / "trials.csv");
        mfl::WriteTrialCsv(report, csv);
        WriteJson(*out_dir / "summary.json", doc);
      }
      std::cout << doc.dump(2) << '\n';
      return 0;
    }

    if (worst->parsed()) {
      const auto seed_list = Seeds(seed, seeds);
      const mfl::WorstOrderResult r = mfl::WorstOrderSearch(
          inst, config, seed_list, {.sample_size = samples, .oracle_cap = oracle_cap});
      json order = json::array();
      for (mfl::ClientIndex i : r.order) order.push_back(inst.clients[i].id);
      const json doc = {{"order", order},
                        {"worst_ratio", r.worst_ratio},
                        {"mean_ratio", r.mean_ratio},
                        {"permutations", r.permutations},
                        {"exhaustive", r.exhaustive}};
      if (out_dir) WriteJson(*out_dir / "worst.json", doc);
      std::cout << doc.dump(2) << '\n';
      return 0;
    }
  } catch (const mfl::Error& e) {
    return Fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return Fail(mfl::ErrorCode::kInvalidArgument, e.what());
  }
  return 0;
}
