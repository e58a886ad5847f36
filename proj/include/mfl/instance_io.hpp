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

// JSON instance files:
//
//   {
//     "facilities":    [{"id": "A", "opening_cost": 3}, ...],
//     "clients":       [{"id": "c1", "costs": {"A": 2, "B": 7}}, ...],
//     "k":             2            (or one integer per client),
//     "metric":        false,
//     "arrival_order": ["c1", ...]
//   }
//
// A facility missing from a client's "costs" object is a forbidden pair.

#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mfl/core.hpp"
#include "mfl/oracle.hpp"
#include "mfl/trace.hpp"

namespace mfl {

inline nlohmann::json ToJson(const Instance& inst) {
  nlohmann::json facilities = nlohmann::json::array();
  for (const auto& f : inst.facilities) {
    facilities.push_back({{"id", f.id}, {"opening_cost", f.opening_cost}});
  }
  nlohmann::json clients = nlohmann::json::array();
  for (const auto& c : inst.clients) {
    nlohmann::json costs = nlohmann::json::object();
    for (FacilityIndex j = 0; j < c.costs.size(); ++j) {
      if (c.costs[j]) costs[inst.facilities[j].id] = *c.costs[j];
    }
    clients.push_back({{"id", c.id}, {"costs", costs}});
  }
  nlohmann::json k;
  if (inst.scalar_requirement && !inst.requirement.empty() &&
      std::all_of(inst.requirement.begin(), inst.requirement.end(),
                  [&](int v) { return v == inst.requirement.front(); })) {
    k = inst.requirement.front();
  } else {
    k = inst.requirement;
  }
  nlohmann::json order = nlohmann::json::array();
  for (ClientIndex i : inst.arrival_order) order.push_back(inst.clients.at(i).id);
  return {{"facilities", facilities},
          {"clients", clients},
          {"k", k},
          {"metric", inst.metric},
          {"arrival_order", order}};
}

inline Instance InstanceFromJson(const nlohmann::json& doc) {
  try {
    Instance inst;
    std::map<std::string, FacilityIndex> facility_index;
    for (const auto& f : doc.at("facilities")) {
      const auto id = f.at("id").get<std::string>();
      if (!facility_index.emplace(id, inst.facilities.size()).second) {
        throw Error(ErrorCode::kParseError, "duplicate facility id '" + id + "'");
      }
      inst.facilities.push_back({id, f.at("opening_cost").get<double>()});
    }
    std::map<std::string, ClientIndex> client_index;
    for (const auto& c : doc.at("clients")) {
      Client client;
      client.id = c.at("id").get<std::string>();
      if (!client_index.emplace(client.id, inst.clients.size()).second) {
        throw Error(ErrorCode::kParseError,
                    "duplicate client id '" + client.id + "'");
      }
      client.costs.resize(inst.facilities.size());
      for (const auto& [fid, cost] : c.at("costs").items()) {
        auto it = facility_index.find(fid);
        if (it == facility_index.end()) {
          throw Error(ErrorCode::kParseError, "client '" + client.id +
                                                  "' references unknown "
                                                  "facility '" + fid + "'");
        }
        client.costs[it->second] = cost.get<double>();
      }
      inst.clients.push_back(std::move(client));
    }
    const auto& k = doc.at("k");
    if (k.is_array()) {
      inst.requirement = k.get<std::vector<int>>();
      inst.scalar_requirement = false;
      if (inst.requirement.size() != inst.clients.size()) {
        throw Error(ErrorCode::kParseError,
                    "k array length does not match the number of clients");
      }
    } else {
      inst.requirement.assign(inst.clients.size(), k.get<int>());
      inst.scalar_requirement = true;
    }
    inst.metric = doc.value("metric", false);
    if (doc.contains("arrival_order")) {
      for (const auto& id : doc.at("arrival_order")) {
        auto it = client_index.find(id.get<std::string>());
        if (it == client_index.end()) {
          throw Error(ErrorCode::kParseError,
                      "arrival order references unknown client '" +
                          id.get<std::string>() + "'");
        }
        inst.arrival_order.push_back(it->second);
      }
    } else {
      for (ClientIndex i = 0; i < inst.clients.size(); ++i) {
        inst.arrival_order.push_back(i);
      }
    }
    return inst;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kParseError, std::string("bad instance: ") + ex.what());
  }
}

inline Instance LoadInstance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kParseError, std::string("bad JSON: ") + ex.what());
  }
  return InstanceFromJson(doc);
}

inline void SaveInstance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kParseError, "cannot write '" + path + "'");
  out << ToJson(inst).dump(2) << '\n';
}

// Hash of the canonical JSON form; used to bind traces to instances.
inline std::string InstanceHash(const Instance& inst) {
  Fnv1a h;
  h.Add(ToJson(inst).dump());
  return h.hex();
}

inline nlohmann::json ToJson(const Instance& inst, const OracleResult& r) {
  nlohmann::json open = nlohmann::json::array();
  for (FacilityIndex j : r.solution.open_facilities) {
    open.push_back(inst.facilities[j].id);
  }
  nlohmann::json assignments = nlohmann::json::object();
  for (const auto& [i, facilities] : r.solution.assignments) {
    nlohmann::json ids = nlohmann::json::array();
    for (FacilityIndex j : facilities) ids.push_back(inst.facilities[j].id);
    assignments[inst.clients[i].id] = ids;
  }
  return {{"opt", r.opt},
          {"facility_cost", r.solution.cost.facility_cost},
          {"connection_cost", r.solution.cost.connection_cost},
          {"open_facilities", open},
          {"assignments", assignments},
          {"subsets_examined", r.subsets_examined}};
}

}  // namespace mfl
