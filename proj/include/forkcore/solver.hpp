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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "forkcore/errors.hpp"
#include "forkcore/model.hpp"
#include "forkcore/multiway.hpp"

namespace forkcore {

/// The two greedy stable rules for two alternatives. RA starts with every
/// agent at the first alternative and moves maximal willing coalitions to
/// the second; RB is the mirror image.
enum class Rule { RA, RB };

inline std::string to_string(Rule rule) { return rule == Rule::RA ? "RA" : "RB"; }

/// How the coalition size k is chosen among the feasible values each
/// iteration. The rules use the maximal feasible k; the minimal variant
/// exists so tests can compare the two empirically.
enum class KSelection { max_feasible, min_feasible };

/// One iteration of the greedy loop: coalition size k, the agents moved,
/// and the community sizes before the move. Sizes are rule-relative:
/// a is the side the rule started from, b the destination side.
struct SolverMove {
  int iteration = 0;
  int k = 0;
  std::vector<int> moved;
  int a_before = 0;
  int b_before = 0;
};

struct SolverTrace {
  Rule rule = Rule::RA;
  std::vector<SolverMove> moves;
};

struct SolveResult {
  Assignment assignment;
  SolverTrace trace;
};

namespace detail {

/// Smallest destination-community size at which `order` prefers moving:
/// min s with (away, s) > (home, a), or n+1 when no such s exists.
/// Nondecreasing in a.
inline int min_tempting_away_size(const PreferenceOrder& order, int home, int away, int a) {
  const int n = order.n();
  const int home_rank = order.rank({home, a});
  // (away, s) improves with s, so the tempting sizes form an upper interval.
  int result = n + 1;
  for (int s = n; s >= 1; --s) {
    if (order.rank({away, s}) < home_rank) {
      result = s;
    } else {
      break;
    }
  }
  return result;
}

/// Greedy engine shared by both rules and by the manipulation search.
/// `orders` may alias a profile or carry per-agent misreports; the caller
/// guarantees every order has m = 2 and a consistent n.
inline Assignment run_greedy(const std::vector<const PreferenceOrder*>& orders, int home, int away,
                             KSelection selection, SolverTrace* trace) {
  const int n = static_cast<int>(orders.size());
  std::vector<int> placement(n, home);
  std::vector<int> at_home(n);
  for (int i = 0; i < n; ++i) at_home[i] = i;
  int a = n;
  int b = 0;
  int iteration = 0;

  std::vector<int> threshold(n, 0);  // per home agent: smallest feasible join size j
  std::vector<int> histogram(n + 2, 0);

  while (a > 0) {
    // Harvest, per agent still home, the smallest j in [1, a] such that the
    // agent prefers (away, b + j) to (home, a); 0 marks "never".
    std::fill(histogram.begin(), histogram.end(), 0);
    for (int agent : at_home) {
      const int sigma = min_tempting_away_size(*orders[agent], home, away, a);
      int j = 0;
      if (sigma <= n) {
        j = sigma > b ? sigma - b : 1;
      }
      threshold[agent] = j;
      if (j >= 1) ++histogram[j];
    }
    int k = 0;
    int willing_up_to = 0;  // # agents with threshold in [1, j]
    for (int j = 1; j <= a; ++j) {
      willing_up_to += histogram[j];
      if (willing_up_to >= j) {
        k = j;
        if (selection == KSelection::min_feasible) break;
      }
    }
    if (k == 0) break;

    ++iteration;
    if (iteration > n) {
      throw internal_error("greedy rule exceeded its iteration bound");
    }
    std::vector<int> moved;
    std::vector<int> staying;
    for (int agent : at_home) {
      if (threshold[agent] >= 1 && threshold[agent] <= k) {
        moved.push_back(agent);
        placement[agent] = away;
      } else {
        staying.push_back(agent);
      }
    }
    if (trace != nullptr) {
      trace->moves.push_back({iteration, k, moved, a, b});
    }
    b += static_cast<int>(moved.size());
    a -= static_cast<int>(moved.size());
    at_home = std::move(staying);
  }
  return Assignment(std::move(placement), 2);
}

inline std::vector<const PreferenceOrder*> order_pointers(const Profile& profile) {
  std::vector<const PreferenceOrder*> pointers;
  pointers.reserve(profile.n());
  for (const PreferenceOrder& order : profile.orders()) pointers.push_back(&order);
  return pointers;
}

inline void require_two_alternatives(const Profile& profile, const char* what) {
  if (profile.m() != 2) {
    throw validation_error(std::string(what) + " requires exactly two alternatives, got " +
                           std::to_string(profile.m()));
  }
}

}  // namespace detail

/// Runs the greedy rule for `rule` and returns the assignment plus its
/// trace. The output is checked against the stability definition before it
/// is returned; a failure there is a bug in this library and raises an
/// internal error.
inline SolveResult solve(const Profile& profile, Rule rule,
                         KSelection selection = KSelection::max_feasible) {
  detail::require_two_alternatives(profile, "two-alternative solver");
  const int home = rule == Rule::RA ? 0 : 1;
  const int away = 1 - home;
  SolverTrace trace{rule, {}};
  Assignment assignment =
      detail::run_greedy(detail::order_pointers(profile), home, away, selection, &trace);
  if (!is_stable(profile, assignment).stable) {
    throw internal_error("greedy rule " + to_string(rule) + " produced an unstable assignment");
  }
  return {std::move(assignment), std::move(trace)};
}

inline SolveResult run_ra(const Profile& profile) { return solve(profile, Rule::RA); }
inline SolveResult run_rb(const Profile& profile) { return solve(profile, Rule::RB); }

/// True iff RA and RB return the same assignment, which holds exactly when
/// the profile admits a unique stable assignment.
inline bool is_unique_stable(const Profile& profile) {
  return run_ra(profile).assignment == run_rb(profile).assignment;
}

}  // namespace forkcore
