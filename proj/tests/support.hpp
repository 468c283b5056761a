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

#include <string>
#include <vector>

#include "forkcore/forkcore.hpp"

namespace forkcore::testing {

/// Order from a word like "ABAB": the i-th occurrence of a letter is that
/// alternative at size n, n-1, ...
inline PreferenceOrder order_from_letters(const std::string& word, int n, int m = 2) {
  std::vector<int> indices;
  indices.reserve(word.size());
  for (char c : word) indices.push_back(c - 'A');
  return detail::order_from_word(indices, n, m);
}

inline Profile two_agent_profile(const std::string& w0, const std::string& w1) {
  return Profile({"A", "B"}, {order_from_letters(w0, 2), order_from_letters(w1, 2)});
}

/// Two agents, each happier alone at their own alternative than together at
/// the other's; the unique stable assignment forks them.
inline Profile forked_pair() { return two_agent_profile("AABB", "BBAA"); }

/// Two agents who would rather stay together wherever; two stable
/// assignments, both non-forking.
inline Profile cohesive_pair() { return two_agent_profile("ABAB", "BABA"); }

/// One committed A-agent plus one follower; both end at A, uniquely.
inline Profile mixed_pair() { return two_agent_profile("AABB", "BABA"); }

/// The four-agent prefixes with three stable assignments (all-A, all-B, and
/// the 2/2 split). `variant` in [0, 9) picks one of the 9 monotone
/// completions: v0's tail interleaves (A2,A1) with (B1) -- 3 ways -- and
/// v3's tail interleaves (A1) with (B2,B1) -- 3 ways; v1 and v2 have forced
/// tails.
inline Profile many_stable(int variant = 0) {
  const int A = 0, B = 1;
  auto make = [](std::vector<Outcome> r) { return PreferenceOrder(std::move(r), 4, 2); };
  const std::vector<std::vector<Outcome>> v0_tails = {
      {{A, 2}, {A, 1}, {B, 1}}, {{A, 2}, {B, 1}, {A, 1}}, {{B, 1}, {A, 2}, {A, 1}}};
  const std::vector<std::vector<Outcome>> v3_tails = {
      {{A, 1}, {B, 2}, {B, 1}}, {{B, 2}, {A, 1}, {B, 1}}, {{B, 2}, {B, 1}, {A, 1}}};
  std::vector<Outcome> v0 = {{B, 4}, {B, 3}, {A, 4}, {B, 2}, {A, 3}};
  for (const Outcome& o : v0_tails[variant % 3]) v0.push_back(o);
  std::vector<Outcome> v3 = {{A, 4}, {A, 3}, {B, 4}, {A, 2}, {B, 3}};
  for (const Outcome& o : v3_tails[variant / 3]) v3.push_back(o);
  std::vector<PreferenceOrder> orders;
  orders.push_back(make(std::move(v0)));
  orders.push_back(make({{B, 4}, {B, 3}, {B, 2}, {A, 4}, {B, 1}, {A, 3}, {A, 2}, {A, 1}}));
  orders.push_back(make({{A, 4}, {A, 3}, {A, 2}, {B, 4}, {A, 1}, {B, 3}, {B, 2}, {B, 1}}));
  orders.push_back(make(std::move(v3)));
  return Profile({"A", "B"}, std::move(orders));
}

inline Assignment all_at(const Profile& profile, int alt) {
  return Assignment(std::vector<int>(profile.n(), alt), profile.m());
}

inline Assignment place(const Profile& profile, std::vector<int> placement) {
  return Assignment(std::move(placement), profile.m());
}

/// Independent stability oracle: checks the raw definition against every
/// alternative assignment (all deviating agents must strictly prefer the
/// deviation). Exponential; test-only.
inline bool naive_is_stable(const Profile& profile, const Assignment& f) {
  const int n = profile.n();
  const int m = profile.m();
  bool stable = true;
  detail::for_each_placement(n, m, [&](const std::vector<int>& placement) {
    Assignment g(placement, m);
    bool differs = false;
    bool all_movers_improve = true;
    for (int agent = 0; agent < n; ++agent) {
      if (g.alternative_of(agent) != f.alternative_of(agent)) {
        differs = true;
        if (!profile.order(agent).prefers(g.induced_outcome(agent), f.induced_outcome(agent))) {
          all_movers_improve = false;
          break;
        }
      }
    }
    if (differs && all_movers_improve) {
      stable = false;
      return false;
    }
    return true;
  });
  return stable;
}

/// Independent literal transcription of the greedy loop, kept separate from
/// the library engine on purpose.
inline Assignment naive_greedy(const Profile& profile, Rule rule) {
  const int n = profile.n();
  const int home = rule == Rule::RA ? 0 : 1;
  const int away = 1 - home;
  std::vector<int> placement(n, home);
  while (true) {
    int a = 0;
    int b = 0;
    for (int p : placement) (p == home ? a : b)++;
    if (a == 0) break;
    int k = 0;
    for (int j = 1; j <= a; ++j) {
      int count = 0;
      for (int agent = 0; agent < n; ++agent) {
        if (placement[agent] == home &&
            profile.order(agent).prefers({away, b + j}, {home, a})) {
          ++count;
        }
      }
      if (count >= j) k = j;
    }
    if (k == 0) break;
    for (int agent = 0; agent < n; ++agent) {
      if (placement[agent] == home && profile.order(agent).prefers({away, b + k}, {home, a})) {
        placement[agent] = away;
      }
    }
  }
  return Assignment(std::move(placement), 2);
}

inline Profile random_profile(std::uint64_t seed, int n, int m = 2) {
  return generate_profile(n, m, {ClassTag::monotone_general, 0}, seed);
}

inline Assignment random_placement(const Profile& profile, std::uint64_t seed) {
  Rng rng(seed ^ 0x5bd1e995u);
  std::vector<int> placement(profile.n());
  for (int& p : placement) p = rng.below(profile.m());
  return Assignment(std::move(placement), profile.m());
}

}  // namespace forkcore::testing
