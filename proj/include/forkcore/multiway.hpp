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

namespace forkcore {

/// Certificate of instability: `movers` are agents not currently at `target`
/// who all prefer (target, target_size) to their current induced outcome.
/// Exactly target_size - |current target community| movers are listed.
struct DeviationWitness {
  int target_alt = 0;
  int target_size = 0;
  std::vector<int> movers;
};

struct StabilityResult {
  bool stable = true;
  std::optional<DeviationWitness> witness;
};

/// Polynomial-time stability check for any number of alternatives.
///
/// Any instability can be witnessed by a deviation in which all movers head
/// to the same alternative: movers to S benefit even if nobody else moves,
/// and by monotonicity they only gain from others staying put. So it
/// suffices to scan pairs (S, n_S) with n_S above S's current size and ask
/// whether enough agents outside S prefer (S, n_S) to their current outcome.
/// Witness movers are the lowest willing agent ids; the scan visits
/// alternatives in index order and sizes in ascending order.
inline StabilityResult is_stable(const Profile& profile, const Assignment& f) {
  const int n = profile.n();
  const int m = profile.m();
  if (f.n() != n || f.m() != m) {
    throw validation_error("assignment shape does not match profile");
  }
  for (int target = 0; target < m; ++target) {
    const int current = f.community_size(target);
    for (int target_size = current + 1; target_size <= n; ++target_size) {
      const int needed = target_size - current;
      std::vector<int> willing;
      for (int agent = 0; agent < n; ++agent) {
        if (f.alternative_of(agent) == target) continue;
        const Outcome moved{target, target_size};
        if (profile.order(agent).prefers(moved, f.induced_outcome(agent))) {
          willing.push_back(agent);
          if (static_cast<int>(willing.size()) == needed) break;
        }
      }
      if (static_cast<int>(willing.size()) >= needed) {
        return {false, DeviationWitness{target, target_size, std::move(willing)}};
      }
    }
  }
  return {true, std::nullopt};
}

namespace detail {

inline std::uint64_t assignment_count(int n, int m) {
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) {
    if (total > UINT64_MAX / static_cast<std::uint64_t>(m)) return UINT64_MAX;
    total *= static_cast<std::uint64_t>(m);
  }
  return total;
}

/// Visits all m^n placements in lexicographic order (agent 0 most
/// significant). Return false from `fn` to stop.
inline void for_each_placement(int n, int m, const std::function<bool(const std::vector<int>&)>& fn) {
  std::vector<int> placement(n, 0);
  while (true) {
    if (!fn(placement)) return;
    int pos = n - 1;
    while (pos >= 0 && placement[pos] == m - 1) {
      placement[pos] = 0;
      --pos;
    }
    if (pos < 0) return;
    ++placement[pos];
  }
}

}  // namespace detail

/// Exhaustively searches all m^n assignments and returns the canonically
/// first stable one, or nullopt when none is stable (possible for m >= 3).
inline std::optional<Assignment> find_stable_exhaustive(const Profile& profile,
                                                        std::uint64_t cap = kDefaultCap) {
  const std::uint64_t count = detail::assignment_count(profile.n(), profile.m());
  if (count > cap) {
    throw cap_error("searching " + std::to_string(count) + " assignments exceeds cap " +
                    std::to_string(cap));
  }
  std::optional<Assignment> found;
  detail::for_each_placement(profile.n(), profile.m(), [&](const std::vector<int>& placement) {
    Assignment candidate(placement, profile.m());
    if (is_stable(profile, candidate).stable) {
      found = std::move(candidate);
      return false;
    }
    return true;
  });
  return found;
}

/// A three-agent, three-alternative monotone profile with no stable
/// assignment. The displayed spine of each order is
///   v0: (B,2) > (A,2) > (A,1) > (B,1) > (C,3)
///   v1: (C,2) > (B,2) > (B,1) > (C,1) > (A,3)
///   v2: (A,2) > (C,2) > (C,1) > (A,1) > (B,3)
/// completed by placing the outcomes forced above the spine first and the
/// rest below it, each block in alternative-label order with sizes
/// descending. Tests confirm all 27 assignments are unstable.
inline Profile no_stable_witness() {
  const int A = 0, B = 1, C = 2;
  auto make = [](std::vector<Outcome> ranking) { return PreferenceOrder(std::move(ranking), 3, 3); };
  std::vector<PreferenceOrder> orders;
  orders.push_back(make({{A, 3}, {B, 3}, {B, 2}, {A, 2}, {A, 1}, {B, 1}, {C, 3}, {C, 2}, {C, 1}}));
  orders.push_back(make({{B, 3}, {C, 3}, {C, 2}, {B, 2}, {B, 1}, {C, 1}, {A, 3}, {A, 2}, {A, 1}}));
  orders.push_back(make({{A, 3}, {C, 3}, {A, 2}, {C, 2}, {C, 1}, {A, 1}, {B, 3}, {B, 2}, {B, 1}}));
  return Profile({"A", "B", "C"}, std::move(orders));
}

}  // namespace forkcore
