// Copyright 2026 The forkcore Authors
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

#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "forkcore/bruteforce.hpp"
#include "forkcore/elicitation.hpp"
#include "forkcore/errors.hpp"
#include "forkcore/model.hpp"
#include "forkcore/multiway.hpp"
#include "forkcore/solver.hpp"

namespace forkcore {

// Insertion-ordered JSON keeps output byte-deterministic.
using ojson = nlohmann::ordered_json;

namespace detail {

inline int require_int(const ojson& value, const std::string& what) {
  if (!value.is_number_integer()) throw validation_error(what + " must be an integer");
  return value.get<int>();
}

inline std::string require_string(const ojson& value, const std::string& what) {
  if (!value.is_string()) throw validation_error(what + " must be a string");
  return value.get<std::string>();
}

inline std::vector<Outcome> parse_ranking(const ojson& entries,
                                          const std::vector<std::string>& labels,
                                          const std::string& what) {
  if (!entries.is_array()) throw validation_error(what + " must be an array of [label, size]");
  std::vector<Outcome> ranking;
  ranking.reserve(entries.size());
  for (const ojson& entry : entries) {
    if (!entry.is_array() || entry.size() != 2) {
      throw validation_error(what + ": each entry must be a [label, size] pair");
    }
    const std::string label = require_string(entry[0], what + ": alternative label");
    int alt = -1;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) {
        alt = static_cast<int>(i);
        break;
      }
    }
    if (alt < 0) throw validation_error(what + ": unknown alternative '" + label + "'");
    const int size = require_int(entry[1], what + ": community size");
    ranking.push_back({alt, size});
  }
  return ranking;
}

}  // namespace detail

/// Parses the profile document format:
///   {"n": 2, "alternatives": ["A","B"],
///    "agents": [{"id": 0, "ranking": [["A",2],["A",1],["B",2],["B",1]]},
///               {"id": 1, "threshold": {"preferred": "B", "j": 1}}]}
/// Each agent entry carries exactly one of "ranking" (full order, most
/// preferred first) or "threshold" (expanded on load; two alternatives
/// only). Agent ids must cover 0..n-1 exactly once, in any order.
inline Profile profile_from_json(const ojson& doc) {
  if (!doc.is_object()) throw validation_error("profile document must be a JSON object");
  if (!doc.contains("n") || !doc.contains("alternatives") || !doc.contains("agents")) {
    throw validation_error("profile document needs fields n, alternatives, agents");
  }
  const int n = detail::require_int(doc["n"], "n");
  if (n < 1) throw validation_error("n must be at least 1");
  if (!doc["alternatives"].is_array()) throw validation_error("alternatives must be an array");
  std::vector<std::string> labels;
  for (const ojson& label : doc["alternatives"]) {
    labels.push_back(detail::require_string(label, "alternative label"));
  }
  const int m = static_cast<int>(labels.size());
  if (m < 2) throw validation_error("at least two alternatives required");

  if (!doc["agents"].is_array()) throw validation_error("agents must be an array");
  if (static_cast<int>(doc["agents"].size()) != n) {
    throw validation_error("agents array has " + std::to_string(doc["agents"].size()) +
                           " entries, expected n = " + std::to_string(n));
  }
  std::vector<std::optional<PreferenceOrder>> orders(n);
  for (const ojson& agent : doc["agents"]) {
    if (!agent.is_object() || !agent.contains("id")) {
      throw validation_error("each agent entry needs an id");
    }
    const int id = detail::require_int(agent["id"], "agent id");
    if (id < 0 || id >= n) {
      throw validation_error("agent id " + std::to_string(id) + " out of range [0," +
                             std::to_string(n - 1) + "]");
    }
    if (orders[id].has_value()) {
      throw validation_error("duplicate agent id " + std::to_string(id));
    }
    const bool has_ranking = agent.contains("ranking");
    const bool has_threshold = agent.contains("threshold");
    if (has_ranking == has_threshold) {
      throw validation_error("agent " + std::to_string(id) +
                             " must carry exactly one of ranking or threshold");
    }
    const std::string what = "agent " + std::to_string(id);
    if (has_ranking) {
      std::vector<Outcome> ranking = detail::parse_ranking(agent["ranking"], labels, what);
      if (auto violation = validate_order(ranking, n, m)) {
        throw validation_error(what + ": " + *violation);
      }
      orders[id].emplace(std::move(ranking), n, m);
    } else {
      if (m != 2) {
        throw validation_error(what + ": threshold form requires exactly two alternatives");
      }
      const ojson& tp = agent["threshold"];
      if (!tp.is_object() || !tp.contains("preferred") || !tp.contains("j")) {
        throw validation_error(what + ": threshold needs fields preferred and j");
      }
      const std::string label = detail::require_string(tp["preferred"], what + ": preferred");
      int preferred = -1;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) preferred = static_cast<int>(i);
      }
      if (preferred < 0) {
        throw validation_error(what + ": unknown alternative '" + label + "'");
      }
      const int threshold = detail::require_int(tp["j"], what + ": threshold j");
      orders[id] = expand_threshold({preferred, threshold}, n);
    }
  }
  std::vector<PreferenceOrder> materialized;
  materialized.reserve(n);
  for (int id = 0; id < n; ++id) materialized.push_back(std::move(*orders[id]));
  return Profile(std::move(labels), std::move(materialized));
}

/// Emits the profile with full rankings and agents in id order.
inline ojson profile_to_json(const Profile& profile) {
  ojson doc;
  doc["n"] = profile.n();
  doc["alternatives"] = profile.alternatives();
  ojson agents = ojson::array();
  for (int id = 0; id < profile.n(); ++id) {
    ojson ranking = ojson::array();
    for (const Outcome& o : profile.order(id).ranking()) {
      ranking.push_back(ojson::array({profile.alternative_label(o.alt), o.size}));
    }
    agents.push_back(ojson{{"id", id}, {"ranking", std::move(ranking)}});
  }
  doc["agents"] = std::move(agents);
  return doc;
}

/// {"placement": {"0": "A", "1": "B"}, "sizes": {"A": 1, "B": 1}}
/// Placement keys in ascending agent-id order, sizes in alternative order.
inline ojson assignment_to_json(const Assignment& assignment, const Profile& profile) {
  ojson placement = ojson::object();
  for (int agent = 0; agent < assignment.n(); ++agent) {
    placement[std::to_string(agent)] = profile.alternative_label(assignment.alternative_of(agent));
  }
  ojson sizes = ojson::object();
  for (int alt = 0; alt < profile.m(); ++alt) {
    sizes[profile.alternative_label(alt)] = assignment.community_size(alt);
  }
  return ojson{{"placement", std::move(placement)}, {"sizes", std::move(sizes)}};
}

inline Assignment assignment_from_json(const ojson& doc, const Profile& profile) {
  if (!doc.is_object() || !doc.contains("placement") || !doc["placement"].is_object()) {
    throw validation_error("assignment document needs a placement object");
  }
  const int n = profile.n();
  std::vector<int> placement(n, -1);
  for (const auto& [key, value] : doc["placement"].items()) {
    int agent = -1;
    try {
      agent = std::stoi(key);
    } catch (const std::exception&) {
      throw validation_error("placement key '" + key + "' is not an agent id");
    }
    if (agent < 0 || agent >= n) {
      throw validation_error("placement agent id " + key + " out of range");
    }
    if (placement[agent] != -1) throw validation_error("duplicate placement for agent " + key);
    const std::string label = detail::require_string(value, "placement for agent " + key);
    const std::optional<int> alt = profile.alternative_index(label);
    if (!alt) throw validation_error("unknown alternative '" + label + "'");
    placement[agent] = *alt;
  }
  for (int agent = 0; agent < n; ++agent) {
    if (placement[agent] == -1) {
      throw validation_error("placement missing agent " + std::to_string(agent));
    }
  }
  Assignment assignment(std::move(placement), profile.m());
  if (doc.contains("sizes")) {
    for (const auto& [label, value] : doc["sizes"].items()) {
      const std::optional<int> alt = profile.alternative_index(label);
      if (!alt) throw validation_error("unknown alternative '" + label + "' in sizes");
      if (detail::require_int(value, "size of " + label) != assignment.community_size(*alt)) {
        throw validation_error("declared size of '" + label + "' does not match placement");
      }
    }
  }
  return assignment;
}

inline ojson trace_to_json(const SolverTrace& trace) {
  ojson moves = ojson::array();
  for (const SolverMove& move : trace.moves) {
    moves.push_back(ojson{{"iteration", move.iteration},
                          {"k", move.k},
                          {"moved", move.moved},
                          {"a_before", move.a_before},
                          {"b_before", move.b_before}});
  }
  return ojson{{"rule", to_string(trace.rule)}, {"iterations", std::move(moves)}};
}

inline ojson witness_to_json(const DeviationWitness& witness, const Profile& profile) {
  return ojson{{"target", profile.alternative_label(witness.target_alt)},
               {"target_size", witness.target_size},
               {"movers", witness.movers}};
}

inline ojson query_stats_to_json(const QueryStats& stats) {
  ojson per_agent = ojson::object();
  for (std::size_t agent = 0; agent < stats.per_agent.size(); ++agent) {
    const QueryCounts& counts = stats.per_agent[agent];
    ojson entry = ojson::object();
    if (counts.min_join > 0) entry["min_join"] = counts.min_join;
    if (counts.top_alternative > 0) entry["top_alternative"] = counts.top_alternative;
    if (counts.loyalty > 0) entry["loyalty"] = counts.loyalty;
    per_agent[std::to_string(agent)] = std::move(entry);
  }
  return ojson{{"rounds", stats.rounds},
               {"total_queries", stats.total_queries()},
               {"per_agent", std::move(per_agent)}};
}

inline ojson report_to_json(const ManipulationReport& report, const Profile& profile) {
  ojson misreports = ojson::object();
  for (std::size_t i = 0; i < report.coalition.size(); ++i) {
    ojson ranking = ojson::array();
    for (const Outcome& o : report.misreports[i].ranking()) {
      ranking.push_back(ojson::array({profile.alternative_label(o.alt), o.size}));
    }
    misreports[std::to_string(report.coalition[i])] = std::move(ranking);
  }
  ojson improvements = ojson::object();
  for (const Improvement& improvement : report.improvements) {
    improvements[std::to_string(improvement.agent)] =
        ojson{{"honest", ojson::array({profile.alternative_label(improvement.honest.alt),
                                       improvement.honest.size})},
              {"manipulated", ojson::array({profile.alternative_label(improvement.manipulated.alt),
                                            improvement.manipulated.size})}};
  }
  return ojson{{"found", true},
               {"coalition", report.coalition},
               {"misreports", std::move(misreports)},
               {"honest_outcome", assignment_to_json(report.honest_outcome, profile)},
               {"manipulated_outcome", assignment_to_json(report.manipulated_outcome, profile)},
               {"improvement", std::move(improvements)}};
}

inline ojson parse_json_text(const std::string& text, const std::string& what) {
  ojson doc = ojson::parse(text, nullptr, false);
  if (doc.is_discarded()) throw validation_error(what + ": not valid JSON");
  return doc;
}

inline ojson load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_json_text(text, path);
}

inline Profile load_profile_file(const std::string& path) {
  return profile_from_json(load_json_file(path));
}

}  // namespace forkcore
