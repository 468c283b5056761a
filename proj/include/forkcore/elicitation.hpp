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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "forkcore/errors.hpp"
#include "forkcore/model.hpp"
#include "forkcore/solver.hpp"

namespace forkcore {

/// Query interface the iterative solver uses instead of full orders.
/// Alternatives are fixed as 0 (the side everyone starts on) and 1.
class AgentOracle {
 public:
  virtual ~AgentOracle() = default;

  /// With a agents on the start side and b on the other: the smallest
  /// coalition size j in [1, a] such that the agent prefers (1, b + j) to
  /// (0, a), or nullopt when no coalition is tempting.
  virtual std::optional<int> answer_min_join(int a, int b) = 0;

  /// Which full community the agent prefers: 0 iff (0, n) over (1, n).
  virtual int answer_top_alternative() = 0;

  /// Smallest j such that the agent prefers (preferred, j) to (other, n).
  virtual int answer_loyalty() = 0;
};

struct QueryCounts {
  int min_join = 0;
  int top_alternative = 0;
  int loyalty = 0;
  int total() const { return min_join + top_alternative + loyalty; }
};

struct QueryStats {
  int rounds = 0;
  std::vector<QueryCounts> per_agent;
  int total_queries() const {
    int total = 0;
    for (const QueryCounts& counts : per_agent) total += counts.total();
    return total;
  }
};

struct ElicitResult {
  Assignment assignment;
  QueryStats stats;
};

/// Query-driven version of the greedy rule. Each round asks every agent
/// still on the start side for its minimum join size at the current sizes,
/// then moves the maximal self-supporting coalition. Agents moved to the
/// other side are never queried again. With truthful oracles the final
/// assignment matches the explicit rule on the underlying profile.
inline ElicitResult run_elicited(const std::vector<AgentOracle*>& oracles) {
  const int n = static_cast<int>(oracles.size());
  if (n < 1) throw validation_error("elicitation needs at least one agent");
  QueryStats stats;
  stats.per_agent.assign(n, {});
  std::vector<int> placement(n, 0);
  std::vector<int> at_home(n);
  for (int i = 0; i < n; ++i) at_home[i] = i;
  int a = n;
  int b = 0;

  std::vector<int> answer(n, 0);  // harvested min-join per home agent; 0 = none
  while (a > 0) {
    ++stats.rounds;
    std::vector<int> histogram(a + 1, 0);
    for (int agent : at_home) {
      const std::optional<int> j = oracles[agent]->answer_min_join(a, b);
      ++stats.per_agent[agent].min_join;
      if (j.has_value() && (*j < 1 || *j > a)) {
        throw protocol_error("agent " + std::to_string(agent) + " answered min-join " +
                             std::to_string(*j) + " outside [1," + std::to_string(a) + "]");
      }
      answer[agent] = j.value_or(0);
      if (answer[agent] >= 1) ++histogram[answer[agent]];
    }
    int k = 0;
    int willing_up_to = 0;
    for (int j = 1; j <= a; ++j) {
      willing_up_to += histogram[j];
      if (willing_up_to >= j) k = j;
    }
    if (k == 0) break;
    std::vector<int> staying;
    for (int agent : at_home) {
      if (answer[agent] >= 1 && answer[agent] <= k) {
        placement[agent] = 1;
        ++b;
        --a;
      } else {
        staying.push_back(agent);
      }
    }
    at_home = std::move(staying);
  }
  return {Assignment(std::move(placement), 2), std::move(stats)};
}

/// Two-query protocol for non-critically-interleaving preferences: ask each
/// agent for its preferred alternative and loyalty threshold, expand the
/// reconstructed threshold preferences, and run the greedy rule on them.
/// Issues exactly 2n queries.
inline ElicitResult run_elicited_nci(const std::vector<AgentOracle*>& oracles) {
  const int n = static_cast<int>(oracles.size());
  if (n < 1) throw validation_error("elicitation needs at least one agent");
  QueryStats stats;
  stats.per_agent.assign(n, {});
  stats.rounds = 1;
  std::vector<PreferenceOrder> expanded;
  expanded.reserve(n);
  for (int agent = 0; agent < n; ++agent) {
    const int preferred = oracles[agent]->answer_top_alternative();
    ++stats.per_agent[agent].top_alternative;
    const int loyalty = oracles[agent]->answer_loyalty();
    ++stats.per_agent[agent].loyalty;
    if (preferred != 0 && preferred != 1) {
      throw protocol_error("agent " + std::to_string(agent) + " reported invalid alternative " +
                           std::to_string(preferred));
    }
    if (loyalty < 1 || loyalty > n) {
      throw protocol_error("agent " + std::to_string(agent) + " reported loyalty " +
                           std::to_string(loyalty) +
                           ", not consistent with any threshold preference for n = " +
                           std::to_string(n));
    }
    expanded.push_back(expand_threshold({preferred, loyalty}, n));
  }
  std::vector<const PreferenceOrder*> pointers;
  pointers.reserve(n);
  for (const PreferenceOrder& order : expanded) pointers.push_back(&order);
  Assignment assignment = detail::run_greedy(pointers, 0, 1, KSelection::max_feasible, nullptr);
  return {std::move(assignment), std::move(stats)};
}

/// Oracle that answers every query truthfully from an explicit order.
class TruthfulOracle final : public AgentOracle {
 public:
  explicit TruthfulOracle(PreferenceOrder order) : order_(std::move(order)) {
    if (order_.m() != 2) {
      throw validation_error("truthful oracle requires a two-alternative order");
    }
  }

  std::optional<int> answer_min_join(int a, int b) override {
    const int n = order_.n();
    if (a < 1 || b < 0 || a + b > n) {
      throw validation_error("min-join query with invalid sizes a=" + std::to_string(a) +
                             " b=" + std::to_string(b));
    }
    const int sigma = detail::min_tempting_away_size(order_, 0, 1, a);
    if (sigma > n || sigma > a + b) return std::nullopt;
    return sigma > b ? sigma - b : 1;
  }

  int answer_top_alternative() override {
    const int n = order_.n();
    return order_.prefers({0, n}, {1, n}) ? 0 : 1;
  }

  int answer_loyalty() override {
    const int n = order_.n();
    const int preferred = answer_top_alternative();
    const Outcome other_full{1 - preferred, n};
    for (int j = 1; j <= n; ++j) {
      if (order_.prefers({preferred, j}, other_full)) return j;
    }
    return n;  // unreachable: (preferred, n) beats (other, n) by definition
  }

 private:
  PreferenceOrder order_;
};

/// Truthful adapters for every agent of a two-alternative profile.
inline std::vector<std::unique_ptr<AgentOracle>> truthful_oracles(const Profile& profile) {
  detail::require_two_alternatives(profile, "truthful oracle construction");
  std::vector<std::unique_ptr<AgentOracle>> oracles;
  oracles.reserve(profile.n());
  for (int agent = 0; agent < profile.n(); ++agent) {
    oracles.push_back(std::make_unique<TruthfulOracle>(profile.order(agent)));
  }
  return oracles;
}

inline std::vector<AgentOracle*> oracle_pointers(
    const std::vector<std::unique_ptr<AgentOracle>>& oracles) {
  std::vector<AgentOracle*> pointers;
  pointers.reserve(oracles.size());
  for (const auto& oracle : oracles) pointers.push_back(oracle.get());
  return pointers;
}

}  // namespace forkcore
